"""
End-to-end runs of the canonical fixtures shipped in ``levykit/fixtures``.

Each fixture file holds an ``inputs`` block and an ``expectations`` block;
a runner turns the inputs into observations keyed like the expectations,
and ``run_fixture`` compares the two.
"""

from __future__ import annotations

import json
import math
from importlib import resources

import numpy as np

from . import levy, moments, selfdecomp
from .errors import SpecParseError
from .mixtures import MixtureSpec
from .special import sample_positive_stable

__all__ = ["FIXTURE_NAMES", "load_fixture", "parse_triplet", "run_fixture", "compare",
           "random_hyperbola_instances", "qkey"]

FIXTURE_NAMES = ("example1", "example2", "example3", "example4", "example5", "example6",
                 "corollary3", "corollary4", "corollary5", "remark3")


def load_fixture(name: str) -> dict:
    if name not in FIXTURE_NAMES:
        raise SpecParseError(f"unknown fixture {name!r}")
    text = resources.files("levykit").joinpath("fixtures").joinpath(f"{name}.json").read_text()
    return json.loads(text)


def parse_triplet(d: dict) -> levy.LevyTriplet:
    """Full triplet dict, or {"compound_poisson": measure, "gaussian_form": Q?}."""
    if "compound_poisson" in d:
        meas = levy.measure_from_dict(d["compound_poisson"])
        Q = d.get("gaussian_form")
        return levy.LevyTriplet.compound_poisson(meas, None if Q is None else np.asarray(Q, float))
    return levy.LevyTriplet.from_dict(d)


def qkey(q) -> str:
    return "_".join(f"{float(x):g}" for x in q)


def compare(expected, observed) -> bool:
    if isinstance(expected, dict):
        if "approx" in expected:
            return observed is not None and abs(observed - expected["approx"]) <= expected["tol"]
        if "lt" in expected:
            return observed < expected["lt"]
        if "gt" in expected:
            return observed > expected["gt"]
    return observed == expected


# ----------------------------------------------------------------------------
# runners
# ----------------------------------------------------------------------------

def _example1(inp, seed):
    w = moments.submultiplicativity_witness(inp["tau"], inp["bound"])
    return {"witness": w.to_dict()}, {
        "ratio_g1_exceeds_bound": w.ratio_g1 > inp["bound"],
        "ratio_g2_exceeds_bound": w.ratio_g2 > inp["bound"],
    }


def _in_box(witness, q) -> bool:
    return all(0.0 <= a <= b for a, b in zip(witness, q))


def _moment_fixture(inp, seed):
    t = parse_triplet(inp["triplet"])
    results, obs = {"verdicts": {}, "mc": {}}, {}
    for q in inp["queries"]:
        v = moments.moment_exists(t, inp["tau"], q)
        k = qkey(q)
        results["verdicts"][k] = v.to_dict()
        obs[f"status_{k}"] = v.status
        obs[f"note_{k}"] = v.note is not None
        if v.status == moments.INFINITE:
            obs[f"witness_in_box_{k}"] = _in_box(v.witness, q)
    mc = inp.get("mc")
    if mc:
        x = levy.sample_triplet(t, int(mc["n"]), seed=seed)
        for q in mc["queries"]:
            d = moments.mc_moment_diag(x, q)
            results["mc"][qkey(q)] = d.to_dict()
            obs[f"mc_flag_{qkey(q)}"] = d.divergence_flag
    lap = inp.get("laplace_check")
    if lap:
        rng = np.random.default_rng(seed)
        v = sample_positive_stable(lap["gamma"], int(lap["n"]), rng)
        e = np.exp(-v)
        dev = abs(float(e.mean()) - math.exp(-1.0))
        sig = float(e.std(ddof=1) / math.sqrt(e.size))
        results["laplace"] = {"deviation": dev, "sigma": sig}
        obs["laplace_within_3sigma"] = dev < 3.0 * sig
    return results, obs


def _example4(inp, seed):
    rng = np.random.default_rng(seed)
    n = int(inp["n"])
    v = np.abs(rng.standard_cauchy(n))
    b = rng.random(n) < inp["bernoulli_p"]
    x4a = np.column_stack([v * b, v * (~b)])
    x1 = sample_positive_stable(inp["gamma"], n, rng)
    x4b = np.column_stack([x1, 1.0 / x1])
    results, obs = {}, {}
    for label, x in (("4A", x4a), ("4B", x4b)):
        for q in inp["queries"]:
            d = moments.mc_moment_diag(x, q)
            results[f"{label}_{qkey(q)}"] = d.to_dict()
            obs[f"{label}_estimate_{qkey(q)}"] = d.estimate
    return results, obs


def _example6(inp, seed):
    spec = MixtureSpec.from_dict(inp["spec"])
    v = selfdecomp.sd_numeric_check(spec)
    results = {"verdict": v.to_dict(), "stress": []}
    for n in inp["stress_n"]:
        d = dict(inp["stress_template"])
        comps = [dict(c) for c in d["components"]]
        comps[-1]["scale"] = 1.0 / n
        s = MixtureSpec.from_dict({**d, "components": comps})
        sv = selfdecomp.sd_numeric_check(s)
        results["stress"].append({"n": n, "verdict": sv.to_dict()})
    return results, {"margin": v.margin, "is_sd": v.is_sd_by_criterion,
                     "violation_found": v.numeric_violation is not None}


def _corollary3(inp, seed):
    out = [selfdecomp.corollary3_check(MixtureSpec.from_dict(s)) for s in inp["specs"]]
    return {"checks": out}, {"conditions": [o["condition"] for o in out]}


def _corollary4(inp, seed):
    spec = selfdecomp.corollary4_construct(inp["p"], inp.get("gamma", 2.0))
    full = selfdecomp.sd_numeric_check(spec)
    subs = [selfdecomp.sd_numeric_check(spec.drop(i)) for i in range(1, spec.dim)]
    cert = selfdecomp.g_certificate(spec, inp["beta"], inp["theta"], inp["x_grid"])
    viol = full.numeric_violation
    return ({"spec": spec.to_dict(), "full": full.to_dict(), "subvectors": [s.to_dict() for s in subs],
             "certificate": cert},
            {"full_margin": full.margin,
             "full_violation": viol is not None,
             "violation_y1_below_0.1": viol is not None and viol["y"][0] < 0.1,
             "sub_margins": [s.margin for s in subs],
             "sub_violations": any(s.numeric_violation is not None for s in subs),
             "certificate_exponent": cert["exponent"],
             "certificate_finite": cert["finite"]})


def _corollary5(inp, seed):
    rows = selfdecomp.corollary5_sweep(tuple(inp["p_values"]), inp["step"])
    return {"rows": rows}, {"all_match": all(r["is_sd"] == r["all_cauchy"] for r in rows),
                            "n_rows": len(rows)}


def random_hyperbola_instances(n_total: int, n_decomposable: int, seed: int) -> list:
    """Decomposable constructions followed by perturbed and nonnegative instances."""
    rng = np.random.default_rng(seed)
    out = []

    def construct():
        while True:
            c = float(rng.choice([0.0, rng.uniform(-3, 3)]))
            b1 = float(rng.choice([-1, 1]) * rng.uniform(0.3, 3))
            b2 = float(rng.choice([-1, 1]) * rng.uniform(0.3, 3))
            if b1 * b1 - 4 * c * b1 / b2 > 0.05:
                return selfdecomp.HyperbolaAtomDist.from_parameters(
                    c, b1, b2, float(rng.uniform(0.1, 0.9)), float(rng.uniform(0.1, 0.9)))

    for _ in range(n_decomposable):
        out.append(("constructed", construct()))
    kinds = ("probabilities", "geometry", "random", "nonnegative")
    for i in range(n_total - n_decomposable):
        kind = kinds[i % len(kinds)]
        if kind == "nonnegative":
            c = float(rng.uniform(0.2, 3))
            u = rng.uniform(0.2, 4, size=4)
            pts = np.column_stack([u, c / u])
        elif kind == "random":
            c = float(rng.uniform(-3, 3))
            u = rng.choice([-1, 1], size=4) * rng.uniform(0.2, 4, size=4)
            pts = np.column_stack([u, c / u])
        else:
            base = construct()
            pts = base.points.copy()
            c = base.product()
            if kind == "geometry":
                # slide one point along the hyperbola, breaking the antipodal pairing
                s = float(rng.uniform(1.2, 2.0))
                pts[0] = [pts[0, 0] * s, pts[0, 1] / s] if pts[0, 0] != 0 else [pts[0, 0], pts[0, 1] * s]
        probs = rng.dirichlet(np.ones(4)) if kind != "geometry" else None
        if kind == "probabilities":
            base_p = base.probs
            probs = base_p * np.exp(rng.uniform(-0.5, 0.5, size=4))
            probs = probs / probs.sum()
        if kind == "geometry":
            probs = base.probs
        probs = probs / probs.sum()
        probs[-1] = 1.0 - probs[:-1].sum()
        atoms = [(float(p[0]), float(p[1]), float(q)) for p, q in zip(pts, probs)]
        out.append((kind, selfdecomp.HyperbolaAtomDist(atoms)))
    return out


def _remark3(inp, seed):
    inst = random_hyperbola_instances(inp["n_total"], inp["n_decomposable"], inp.get("seed", seed))
    agree, n_dec, nonneg_ok, rows = 0, 0, True, []
    for kind, d in inst:
        fast = selfdecomp.hyperbola_decompose(d).decomposable
        slow = selfdecomp.brute_force_decompose(d.points, d.probs, 2, 2) is not None
        agree += fast == slow
        n_dec += fast
        if kind == "nonnegative" and fast:
            nonneg_ok = False
        rows.append({"kind": kind, "hyperbola": fast, "brute_force": slow})
    kinds = [k for k, _ in inst]
    return ({"instances": rows},
            {"agreement": agree, "n_constructed": kinds.count("constructed"),
             "n_perturbed": len(kinds) - kinds.count("constructed"),
             "nonnegative_indecomposable": nonneg_ok, "n_found_decomposable": n_dec})


_RUNNERS = {"example1": _example1, "example2": _moment_fixture, "example3": _moment_fixture,
            "example4": _example4, "example5": _moment_fixture, "example6": _example6,
            "corollary3": _corollary3, "corollary4": _corollary4, "corollary5": _corollary5,
            "remark3": _remark3}


def run_fixture(name: str, seed: int | None = None) -> dict:
    """Bundle {name, inputs, results, checks, status}; status is PASS or FAIL."""
    fx = load_fixture(name)
    seed = fx.get("seed", 0) if seed is None else seed
    results, observed = _RUNNERS[name](fx["inputs"], seed)
    checks = []
    for key, exp in fx["expectations"].items():
        got = observed.get(key)
        checks.append({"check": key, "expected": exp, "observed": got,
                       "pass": bool(got is not None and compare(exp, got))})
    status = "PASS" if all(c["pass"] for c in checks) else "FAIL"
    return {"name": name, "seed": seed, "inputs": fx["inputs"], "results": results,
            "checks": checks, "status": status}
