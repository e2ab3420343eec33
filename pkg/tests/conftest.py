import math
import sys
import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from levykit.levy import AbsCauchy, AtomicMeasure, LawMeasure, LevyTriplet, PositiveStable, SqrtAbsCauchy
from levykit.mixtures import Constant, ExpDecay, MixtureSpec
from levykit.special import StableParams

settings.register_profile("levykit", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("levykit")


def pytest_terminal_summary(terminalreporter):
    results = getattr(sys.modules.get("test_acceptance"), "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])


@pytest.fixture(autouse=True)
def _quiet_integration_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        yield


def law_triplet(law, exponents, rate=1.0):
    return LevyTriplet.compound_poisson(LawMeasure(rate, law, np.array(exponents, float), (0.0, math.inf)))


@pytest.fixture
def example2():
    return law_triplet(AbsCauchy(), [1.0, -1.0])


@pytest.fixture
def example3():
    return law_triplet(PositiveStable(0.5), [0.5, -1.0])


@pytest.fixture
def example5():
    return law_triplet(SqrtAbsCauchy(), [1.0, -1.0])


def atomic_fixtures():
    """Five atomic triplets with Gaussian parts and drifts of various shapes."""
    return [
        LevyTriplet(np.zeros(2), np.eye(2), AtomicMeasure(np.array([[1.0, 1.0]]), np.array([1.0]))),
        LevyTriplet(np.array([0.3, -0.2]), np.zeros((2, 2)),
                    AtomicMeasure(np.array([[3.0, 0.0], [0.1, 0.0]]), np.array([2.0, 5.0]))),
        LevyTriplet(np.array([1.0]), np.array([[0.5]]),
                    AtomicMeasure(np.array([[0.4], [-1.5], [2.5]]), np.array([1.0, 0.7, 0.2]))),
        LevyTriplet(np.zeros(3), np.diag([0.1, 0.0, 1.0]),
                    AtomicMeasure(np.array([[0.6, 0.0, -0.9], [1.2, 1.0, 0.3], [-0.2, 0.1, 0.05]]),
                                  np.array([0.4, 1.1, 3.0]))),
        LevyTriplet(np.array([-0.5, 0.5]), np.array([[1.0, 0.5], [0.5, 1.0]]),
                    AtomicMeasure(np.array([[0.9, 0.9], [-2.0, 0.4], [0.3, -0.3], [0.0, 1.8]]),
                                  np.array([0.5, 0.25, 2.0, 1.0]))),
    ]


def fubini_specs():
    return [
        MixtureSpec(0.5, ExpDecay(1.0), (StableParams(2.0, 1.0),)),
        MixtureSpec(0.0, ExpDecay(1.0), (StableParams(1.5, 0.7),)),
        MixtureSpec(0.7, Constant(1.0), (StableParams(1.8, 1.0), StableParams(2.0, 0.5))),
    ]
