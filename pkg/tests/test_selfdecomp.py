import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special as sps

from levykit.errors import NoAdmissibleParams, NotHyperbola, ParameterOutOfRange, SearchBudgetExceeded
from levykit.mixtures import Constant, ExpDecay, MixtureSpec, mixture_levy_density
from levykit.selfdecomp import (
    HyperbolaAtomDist,
    brute_force_decompose,
    certificate_integral,
    corollary3_check,
    corollary4_construct,
    corollary5_sweep,
    g_certificate,
    hyperbola_decompose,
    sd_criterion,
    sd_numeric_check,
)
from levykit.special import StableParams


def _spec(alpha, gammas, g=None):
    return MixtureSpec(alpha, g or ExpDecay(1.0), tuple(StableParams(x, 1.0) for x in gammas))


# --- criterion and numeric scan ---------------------------------------------------

def test_margin_values():
    assert sd_criterion(_spec(0.0, [1.0])).margin == 0.0
    assert sd_criterion(_spec(0.5, [2.0, 2.0])).margin == pytest.approx(-0.5)
    assert sd_criterion(_spec(0.9, [1.0, 1.0])).margin == pytest.approx(0.9)


def test_criterion_label_outside_hypothesis():
    v = sd_criterion(_spec(0.5, [0.7]))
    assert not v.hypothesis_ok and v.label == "criterion-only, not conclusive"
    assert sd_criterion(_spec(0.5, [1.5])).label == "iff"


@pytest.mark.parametrize("alpha,gammas,sd", [
    (0.0, [1.0], True),
    (0.0, [1.0, 1.0], True),
    (0.5, [2.0], True),
    (0.5, [2.0, 2.0], False),
    (0.2, [1.5, 1.2], False),
    (0.9, [1.2, 1.1], True),
    (0.0, [1.5], False),
])
def test_numeric_scan_agrees_with_criterion(alpha, gammas, sd):
    v = sd_numeric_check(_spec(alpha, gammas))
    assert v.is_sd_by_criterion is sd
    assert (v.numeric_violation is None) is sd


def test_violation_is_genuine():
    v = sd_numeric_check(corollary4_construct(3))
    viol = v.numeric_violation
    spec = corollary4_construct(3)
    y, c = np.array(viol["y"]), viol["c"]
    h = mixture_levy_density(spec, y)
    hs = c ** -3 * mixture_levy_density(spec, y / c)
    assert h < hs
    assert viol["y"][0] < 0.1


@settings(max_examples=25)
@given(st.floats(0, 0.95), st.lists(st.floats(1.0, 2.0), min_size=1, max_size=2))
def test_scan_matches_sign_of_margin(alpha, gammas):
    spec = _spec(alpha, gammas)
    if abs(spec.margin) < 0.05:
        return
    v = sd_numeric_check(spec)
    assert (v.numeric_violation is not None) == (v.margin < 0)


# --- G certificate ------------------------------------------------------------------

def _closed_form_g(spec, beta, theta, x):
    # gamma = 2, scale 1, g = e^-v: E|X|^-theta = 2^-theta Gamma((1-theta)/2)/sqrt(pi) per coordinate
    m = 2 ** -theta * sps.gamma((1 - theta) / 2) / math.sqrt(math.pi)
    s = (spec.alpha + beta) * theta - spec.alpha
    return m ** (spec.dim - 1) * sps.gamma(s) * sps.gammainc(s, x)


def test_certificate_exponent_and_closed_form():
    spec = corollary4_construct(3)
    cert = g_certificate(spec, 0.25, 0.8)
    assert abs(cert["exponent"] - (-0.2)) < 1e-12
    assert cert["finite"] and cert["certificate_holds"]
    for x, gval in zip(cert["x"], cert["G"]):
        assert gval == pytest.approx(_closed_form_g(spec, 0.25, 0.8, x), rel=1e-9)


@pytest.mark.parametrize("c", [0.3, 0.7])
def test_certificate_scaling(c):
    # the same functional for cZ equals c^e G(x / c)
    spec = corollary4_construct(3)
    e = (spec.margin + 0.25) * 0.8
    for x in (0.5, 2.0):
        lhs, _ = certificate_integral(spec, 0.25, 0.8, x, c=c)
        rhs, _ = certificate_integral(spec, 0.25, 0.8, x / c)
        assert lhs == pytest.approx(c ** e * rhs, rel=1e-9)
        # e < 0 and G increasing: cZ dominates
        assert lhs > certificate_integral(spec, 0.25, 0.8, x)[0]


def test_certificate_parameter_checks():
    spec = corollary4_construct(3)
    with pytest.raises(ParameterOutOfRange):
        g_certificate(spec, 0.6, 0.8)
    with pytest.raises(ParameterOutOfRange):
        g_certificate(spec, 0.25, 0.5)
    with pytest.raises(ParameterOutOfRange):
        g_certificate(_spec(0.5, [2.0]), 0.1, 0.9)


# --- corollaries -----------------------------------------------------------------------

def test_construction_p3():
    spec = corollary4_construct(3)
    assert spec.alpha == pytest.approx(0.5) and spec.margin == pytest.approx(-0.5)
    assert [spec.drop(i).margin for i in (1, 2)] == [0.0, 0.0]
    assert all(sd_numeric_check(spec.drop(i)).numeric_violation is None for i in (1, 2))


def test_construction_p4_lowers_gamma():
    spec = corollary4_construct(4)
    assert spec.gammas[0] == pytest.approx(1.5)
    assert spec.alpha == pytest.approx(2 / 3)
    assert spec.margin < 0
    assert all(spec.drop(i).margin == 0.0 for i in (1, 2, 3))


def test_construction_rejects_bad_inputs():
    with pytest.raises(NoAdmissibleParams):
        corollary4_construct(3, gamma=1.0)
    with pytest.raises(NoAdmissibleParams):
        corollary4_construct(2.5)


def test_shifted_family_condition():
    out = corollary3_check(_spec(0.2, [1.2, 2.0]))
    assert out["value"] == pytest.approx(0.2 - 1 + 1 / 1.2)
    assert out["condition"] is False
    assert corollary3_check(_spec(0.1, [2.0, 2.0]))["condition"] is True
    with pytest.raises(ParameterOutOfRange):
        corollary3_check(_spec(0.1, [2.0]))


def test_zero_alpha_sweep():
    rows = corollary5_sweep()
    assert len(rows) == 11 + 121
    for r in rows:
        assert r["is_sd"] == r["all_cauchy"]
        assert r["margin"] == pytest.approx(sum(1 / g - 1 for g in r["gammas"]), abs=1e-12)
    assert sum(r["is_sd"] for r in rows) == 2


# --- hyperbola laws ----------------------------------------------------------------------

def test_from_parameters_atoms_on_hyperbola():
    d = HyperbolaAtomDist.from_parameters(-2.0, 1.3, 0.7, 0.3, 0.6)
    assert d.product() == pytest.approx(-2.0, abs=1e-12)
    assert d.probs.sum() == pytest.approx(1.0)
    with pytest.raises(ParameterOutOfRange):
        HyperbolaAtomDist.from_parameters(2.0, 1.0, 1.0, 0.5, 0.5)


def test_decomposition_recovers_factors():
    d = HyperbolaAtomDist.from_parameters(-2.0, 1.3, 0.7, 0.3, 0.6)
    dec = hyperbola_decompose(d)
    assert dec.decomposable
    assert (dec.b1, dec.b2) == (pytest.approx(1.3), pytest.approx(0.7))
    # rebuild the convolution of the factors and compare with the target law
    y1, y2 = dec.factors["Y1"], dec.factors["Y2"]
    law = {}
    for a, pa in zip(y1["atoms"], y1["probs"]):
        for b, pb in zip(y2["atoms"], y2["probs"]):
            key = tuple(np.round(np.add(a, b), 9))
            law[key] = law.get(key, 0.0) + pa * pb
    for (u, w), pr in zip(d.points, d.probs):
        assert law[tuple(np.round([u, w], 9))] == pytest.approx(pr, abs=1e-12)


def test_nonnegative_support_indecomposable():
    u = np.array([0.5, 1.0, 2.0, 3.0])
    d = HyperbolaAtomDist([(x, 1 / x, 0.25) for x in u])
    assert not hyperbola_decompose(d).decomposable
    assert brute_force_decompose(d.points, d.probs) is None


def test_single_atom_and_non_hyperbola():
    d = HyperbolaAtomDist([(2.0, 0.5, 1.0)])
    assert not hyperbola_decompose(d).decomposable
    with pytest.raises(NotHyperbola):
        HyperbolaAtomDist([(1.0, 1.0, 0.5), (2.0, 1.0, 0.5)]).product()
    with pytest.raises(ValueError):
        HyperbolaAtomDist([(1.0, 1.0, 0.4)])


def test_perturbed_probabilities_break_decomposability():
    d = HyperbolaAtomDist.from_parameters(0.5, -2.0, 1.0, 0.4, 0.7)
    p = d.probs * np.array([1.1, 0.9, 1.0, 1.0])
    p /= p.sum()
    p[-1] = 1 - p[:-1].sum()
    bad = HyperbolaAtomDist([(u, w, q) for (u, w), q in zip(d.points, p)])
    assert not hyperbola_decompose(bad).decomposable
    assert brute_force_decompose(bad.points, bad.probs) is None


@settings(max_examples=15)
@given(st.floats(-3, 3), st.floats(0.3, 3), st.sampled_from([-1, 1]), st.floats(0.3, 3),
       st.sampled_from([-1, 1]), st.floats(0.1, 0.9), st.floats(0.1, 0.9))
def test_fast_and_brute_force_agree_on_constructions(c, b1, s1, b2, s2, alpha, beta):
    b1, b2 = s1 * b1, s2 * b2
    if b1 * b1 - 4 * c * b1 / b2 <= 0.05:
        return
    d = HyperbolaAtomDist.from_parameters(c, b1, b2, alpha, beta)
    assert hyperbola_decompose(d).decomposable
    f = brute_force_decompose(d.points, d.probs)
    assert f is not None
    assert np.allclose(np.outer(f.p, f.q).sum(), 1.0)


def test_brute_force_budget():
    d = HyperbolaAtomDist.from_parameters(-2.0, 1.3, 0.7, 0.3, 0.6)
    with pytest.raises(SearchBudgetExceeded):
        brute_force_decompose(d.points, d.probs, budget=1)


def test_constant_g_cauchy_is_sd():
    v = sd_numeric_check(MixtureSpec(0.5, Constant(1.0), (StableParams(1.0, 1.0),)))
    assert v.margin == pytest.approx(0.5) and v.numeric_violation is None
