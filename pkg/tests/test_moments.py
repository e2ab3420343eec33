import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special as sps

from conftest import law_triplet
from levykit.errors import ExponentNotInteger, ExponentOutOfRange, TauNonPositive
from levykit.levy import (
    AbsCauchy,
    AtomicMeasure,
    LevyTriplet,
    MixtureMeasure,
    SqrtAbsCauchy,
    split_truncate,
)
from levykit.mixtures import Constant, ExpDecay, MixtureSpec, TabulatedDecreasing
from levykit.moments import (
    BOUNDARY_NOTE,
    FINITE,
    INFINITE,
    UNDECIDED,
    MomentQuery,
    cp_moment_series,
    gamma_star,
    hill_index,
    levy_box_moment,
    mc_moment_diag,
    mixture_moment_exists,
    moment_exists,
    positivity_check,
    submultiplicativity_witness,
    theta_star,
)
from levykit.special import StableParams


def _in_box(w, q):
    return all(0 <= a <= b for a, b in zip(w, q))


# --- verdicts on scalar-law measures -------------------------------------------

def test_cauchy_pair_verdicts(example2):
    v = moment_exists(example2, 1.0, (0.9, 0.9))
    assert v.status == FINITE
    # |V * V^-1| = 1 and every jump has norm >= sqrt 2
    assert v.value == pytest.approx(1.0, abs=1e-8)
    for q in ((1.0, 0.0), (1.0, 1.0)):
        v = moment_exists(example2, 1.0, q)
        assert v.status == INFINITE and _in_box(v.witness, q)
        assert v.note == BOUNDARY_NOTE
    assert moment_exists(example2, 1.0, (1.5, 0.2)).note is None


def test_corner_alone_is_not_enough(example2):
    # the corner integrand |x1 x2| = 1 is bounded, yet the box contains (1, 0)
    corner = example2.measure.integrate(lambda x: np.abs(x[:, 0] * x[:, 1]))[0]
    assert corner == pytest.approx(1.0, abs=1e-8)
    assert moment_exists(example2, 1.0, (1.0, 1.0)).status == INFINITE


@pytest.mark.parametrize("k", range(1, 8))
def test_positive_stable_negative_moments(example3, k):
    v = moment_exists(example3, 1.0, (0.0, float(k)))
    assert v.status == FINITE
    # E V^-k = Gamma(1 + k/gamma) / Gamma(1 + k) with gamma = 1/2
    want = math.factorial(2 * k) / math.factorial(k)
    assert v.value == pytest.approx(want, rel=1e-7)


def test_positive_stable_first_coordinate(example3):
    v = moment_exists(example3, 1.0, (1.0, 0.0))
    assert v.status == INFINITE and _in_box(v.witness, (1.0, 0.0))
    assert moment_exists(example3, 1.0, (0.9, 0.0)).status == FINITE


def test_sqrt_cauchy_verdicts(example5):
    for q in ((1.0, 1.0), (1.9, 1.9)):
        v = moment_exists(example5, 1.0, q)
        assert v.status == FINITE and v.value == pytest.approx(1.0, abs=1e-7)
    assert moment_exists(example5, 1.0, (2.5, 0.0)).status == INFINITE
    v = moment_exists(example5, 1.0, (2.0, 2.0))
    assert v.status == INFINITE and v.witness == (2.0, 0.0) and v.note == BOUNDARY_NOTE


def test_first_moment_value_matches_closed_form():
    t = law_triplet(AbsCauchy(), [0.5, -0.5], rate=2.0)
    # |x|^2 = V + 1/V >= 2, so tau = 1 keeps everything; E V^0.4 = 1/cos(0.2 pi)
    v = moment_exists(t, 1.0, (0.8, 0.0))
    assert v.value == pytest.approx(2.0 / math.cos(0.2 * math.pi), rel=1e-8)


def test_bad_inputs(example2):
    with pytest.raises(TauNonPositive):
        moment_exists(example2, 0.0, (1.0, 1.0))
    with pytest.raises(ValueError):
        MomentQuery((-1.0, 0.0))
    with pytest.raises(ValueError):
        moment_exists(example2, 1.0, (1.0,))


@given(st.floats(0, 3), st.floats(0, 3), st.floats(0, 1), st.floats(0, 1))
def test_box_verdict_monotone(b1, b2, s1, s2):
    # Finite at beta implies Finite at any beta' <= beta
    t = law_triplet(SqrtAbsCauchy(), [1.0, -1.0])
    big = moment_exists(t, 1.0, (b1, b2), compute_value=False)
    small = moment_exists(t, 1.0, (b1 * s1, b2 * s2), compute_value=False)
    if big.status == FINITE:
        assert small.status == FINITE
    if big.status == INFINITE:
        assert _in_box(big.witness, (b1, b2))
        # the witness itself is infinite
        assert moment_exists(t, 1.0, big.witness, compute_value=False).status == INFINITE


@given(st.floats(0, 3), st.floats(0, 3))
def test_law_box_matches_exponent_interval(b1, b2):
    # x = (V, V^-1), V = sqrt|C|: box exponents s run over [-b2, b1]; finite iff inside (-2, 2)
    t = law_triplet(SqrtAbsCauchy(), [1.0, -1.0])
    v = moment_exists(t, 1.0, (b1, b2), compute_value=False)
    assert (v.status == FINITE) == (b1 < 2 and b2 < 2)


def test_atomic_always_finite():
    m = AtomicMeasure(np.array([[2.0, -1.0], [0.0, 3.0]]), np.array([0.5, 1.5]))
    v = levy_box_moment(m, (5.0, 7.0))
    assert v.status == FINITE
    assert v.value == pytest.approx(0.5 * 2 ** 5 * 1 + 0.0)


def test_mixture_measure_box():
    spec = MixtureSpec(0.5, ExpDecay(1.0), (StableParams(1.5, 1.0),))
    nu1 = MixtureMeasure(spec, (1.0, math.inf))
    assert levy_box_moment(nu1, (3.0, 1.2), compute_value=False).status == FINITE
    v = levy_box_moment(nu1, (0.0, 1.5), compute_value=False)
    assert v.status == INFINITE and v.witness == (0.0, 1.5)
    heavy = MixtureMeasure(MixtureSpec(0.5, Constant(1.0), (StableParams(2.0, 1.0),)), (1.0, math.inf))
    # theta = 0.2 + 0.6/2 = 0.5 = theta*
    assert levy_box_moment(heavy, (0.2, 0.6), compute_value=False).status == INFINITE
    assert levy_box_moment(heavy, (0.2, 0.5), compute_value=False).status == FINITE


# --- compound Poisson series --------------------------------------------------------

def _cp(points, weights, tau=0.01):
    t = LevyTriplet.compound_poisson(AtomicMeasure(np.array(points, float), np.array(weights, float)))
    return split_truncate(t, tau)


def test_series_single_atom():
    # X = N (1, 1), N ~ Poisson(1): E N^2 = 2
    assert cp_moment_series(_cp([[1.0, 1.0]], [1.0]), (1, 1)).value == pytest.approx(2.0, rel=1e-12)


def test_series_second_moment_cumulants():
    pts = np.array([[1.5, -0.5], [-0.7, 2.0], [0.3, 0.3]])
    w = np.array([0.8, 0.4, 1.3])
    s = _cp(pts, w)
    lam_m1 = w @ pts
    lam_m2 = w @ pts ** 2
    # E X1^2 = lam m2 + (lam m1)^2, first coordinate only
    r = cp_moment_series(s, (2, 0))
    assert r.value == pytest.approx(lam_m2[0] + lam_m1[0] ** 2, rel=1e-10)
    assert r.tail_bound < 1e-10


def test_series_product_nonnegative_atoms():
    pts = np.array([[1.0, 0.0], [0.0, 2.0], [0.5, 0.5]])
    w = np.array([1.0, 0.5, 2.0])
    r = cp_moment_series(_cp(pts, w), (1, 1))
    # E X1 X2 = lam E J1 J2 + lam m1_1 lam m1_2
    want = w @ (pts[:, 0] * pts[:, 1]) + (w @ pts[:, 0]) * (w @ pts[:, 1])
    assert r.value == pytest.approx(want, rel=1e-10)


def test_series_requirements():
    s = _cp([[1.0, 1.0]], [1.0])
    with pytest.raises(ExponentNotInteger):
        cp_moment_series(s, (0.5, 1.0))
    t = LevyTriplet.compound_poisson(AtomicMeasure(np.array([[0.1, 0.0], [2.0, 0.0]]), np.array([1.0, 1.0])))
    with pytest.raises(ValueError):
        cp_moment_series(split_truncate(t, 1.0), (1, 0))


# --- positivity ----------------------------------------------------------------------

def test_positivity_cases():
    s = _cp([[1.0, 0.0], [0.0, 1.0]], [1.0, 1.0])
    assert positivity_check(s, np.zeros((2, 2)))
    s1 = _cp([[1.0, 0.0]], [1.0])
    assert not positivity_check(s1, np.zeros((2, 2)))
    assert positivity_check(s1, np.diag([0.0, 1.0]))
    assert not positivity_check(s1, np.diag([1.0, 0.0]))
    assert positivity_check(s1, np.eye(2))


# --- mixtures ----------------------------------------------------------------------

def test_theta_and_gamma_star():
    assert theta_star(ExpDecay(1.0), 0.5) == math.inf
    assert theta_star(ExpDecay(0.0), 0.5) == 0.5
    assert theta_star(Constant(1.0), 0.3) == 0.3
    assert theta_star(TabulatedDecreasing((0.0, 2.0), (1.0, 0.0)), 0.3) == math.inf
    assert theta_star(TabulatedDecreasing((0.0, 2.0), (1.0, 0.2)), 0.3) == 0.3
    assert gamma_star(2.0) == math.inf and gamma_star(1.5) == 1.5


def test_mixture_moment_verdicts():
    light = MixtureSpec(0.5, ExpDecay(1.0), (StableParams(1.5, 1.0),))
    heavy = MixtureSpec(0.5, Constant(1.0), (StableParams(1.5, 1.0),))
    assert mixture_moment_exists(light, (4.0, 1.2)).status == FINITE
    assert mixture_moment_exists(heavy, (0.2, 0.3)).status == FINITE
    # theta = 0.3 + 0.3/1.5 sits on theta* = alpha
    assert mixture_moment_exists(heavy, (0.3, 0.3)).status == INFINITE
    assert mixture_moment_exists(heavy, (0.4, 0.3)).status == INFINITE
    assert mixture_moment_exists(heavy, (-0.5, 0.0)).status == UNDECIDED
    with pytest.raises(ExponentOutOfRange):
        mixture_moment_exists(light, (0.0, 1.5))
    with pytest.raises(ExponentOutOfRange):
        mixture_moment_exists(light, (0.0, -1.0))


def test_mixture_moment_against_quadrature():
    # alpha = 0, g = e^{-v}: V ~ Exp(1); E V^a |V^{1/2} X|^b = E V^{a + b/2} E|X|^b, X ~ N(0, 2)
    from levykit.mixtures import mixture_sample
    spec = MixtureSpec(0.0, ExpDecay(1.0), (StableParams(2.0, 1.0),))
    a, b = 0.5, 1.0
    assert mixture_moment_exists(spec, (a, b)).status == FINITE
    want = sps.gamma(1 + a + b / 2) * 2 ** b * sps.gamma((b + 1) / 2) / math.sqrt(math.pi)
    x = mixture_sample(spec, 200_000, seed=2)
    d = mc_moment_diag(x, (a, b))
    assert abs(d.estimate - want) < 4 * d.std_error


# --- Monte Carlo diagnostics ------------------------------------------------------------

def test_hill_on_pareto():
    rng = np.random.default_rng(0)
    for idx in (0.8, 2.0):
        x = rng.pareto(idx, 500_000) + 1.0
        assert hill_index(x) == pytest.approx(idx, rel=0.05)


def test_mc_diag_flags():
    rng = np.random.default_rng(1)
    heavy = np.column_stack([np.abs(rng.standard_cauchy(200_000)), np.ones(200_000)])
    assert mc_moment_diag(heavy, (1.0, 0.0)).divergence_flag
    light = rng.exponential(size=(200_000, 2))
    d = mc_moment_diag(light, (1.0, 1.0))
    assert not d.divergence_flag
    assert d.estimate == pytest.approx(1.0, abs=4 * d.std_error)
    assert set(d.hill_trace) == {0.005, 0.01, 0.02, 0.05}


# --- submultiplicativity -------------------------------------------------------------------

def test_witness_direct_evaluation():
    w = submultiplicativity_witness(1.0, 1000.0)
    x, y = w.x, w.y
    g = lambda z: abs(z[0] * z[1])
    assert np.linalg.norm(x) >= 1 and np.linalg.norm(y) >= 1 and np.linalg.norm(x + y) >= 1
    assert g(x + y) / (g(x) * g(y)) > 1000
    assert w.ratio_g1 == pytest.approx(g(x + y) / (g(x) * g(y)))


@given(st.floats(0.01, 50), st.floats(1, 1e8))
def test_witness_beats_any_bound(tau, bound):
    w = submultiplicativity_witness(tau, bound)
    assert w.ratio_g1 > bound and w.ratio_g2 > bound
    assert min(np.linalg.norm(w.x), np.linalg.norm(w.y)) >= tau


def test_witness_bound_below_one_rejected():
    with pytest.raises(ValueError):
        submultiplicativity_witness(1.0, 0.5)
