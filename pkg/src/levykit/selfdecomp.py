"""
Self-decomposability of Z = (V, V^{1/gamma_1} X_1, ..., V^{1/gamma_{p-1}} X_{p-1}).

The closed-form verdict is the sign of the margin
alpha - p + 1 + sum 1/gamma_r (an iff when every gamma_r is in [1, 2]). The
numeric check scans the Levy-density inequality h(y) >= c^-p h(y/c) on grids
that include the rays where violations concentrate. Also: G-function
certificates, the corollary constructions, and the decomposability of
two-dimensional laws supported on a hyperbola u w = c.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize

from .errors import (
    NoAdmissibleParams,
    NotHyperbola,
    ParameterOutOfRange,
    QuadratureFailure,
    SearchBudgetExceeded,
)
from .mixtures import ExpDecay, MixtureSpec, mixture_levy_density
from .special import StableParams, symmetric_stable_pdf

__all__ = [
    "SDVerdict",
    "sd_criterion",
    "sd_numeric_check",
    "DEFAULT_C_GRID",
    "DEFAULT_Y_GRID",
    "certificate_integral",
    "g_certificate",
    "corollary4_construct",
    "corollary3_check",
    "corollary5_sweep",
    "HyperbolaAtomDist",
    "Decomposition",
    "hyperbola_decompose",
    "Factorization",
    "brute_force_decompose",
]

DEFAULT_C_GRID = tuple(round(0.1 * k, 10) for k in range(1, 10))
DEFAULT_Y_GRID = {"y_min": 1e-6, "y_max": 10.0, "n": 71, "kappas": (0.0, 0.5, -0.5, 1.0, -1.0)}
_TINY = 1e-300


@dataclass
class SDVerdict:
    margin: float
    is_sd_by_criterion: bool
    hypothesis_ok: bool
    numeric_violation: dict | None = None
    numeric_checked: bool = False

    @property
    def label(self) -> str:
        return "iff" if self.hypothesis_ok else "criterion-only, not conclusive"

    def to_dict(self) -> dict:
        return {"margin": self.margin, "is_sd_by_criterion": self.is_sd_by_criterion,
                "hypothesis_ok": self.hypothesis_ok, "label": self.label,
                "numeric_checked": self.numeric_checked,
                "numeric_violation": self.numeric_violation}


def sd_criterion(spec: MixtureSpec) -> SDVerdict:
    m = spec.margin
    return SDVerdict(m, m >= 0.0, spec.hypothesis_ok)


def _ray_points(spec: MixtureSpec, y_grid: dict) -> np.ndarray:
    """Points (y1, kappa_r y1^(2/gamma_r)) ordered by y1, then by ray."""
    y1 = np.logspace(math.log10(y_grid["y_min"]), math.log10(y_grid["y_max"]), int(y_grid["n"]))
    rays = list(itertools.product(y_grid["kappas"], repeat=spec.dim - 1))
    pts = np.empty((y1.size * len(rays), spec.dim))
    row = 0
    for v in y1:
        for ray in rays:
            pts[row, 0] = v
            pts[row, 1:] = np.array(ray) * v ** (2.0 / spec.gammas)
            row += 1
    return pts


def sd_numeric_check(spec: MixtureSpec, c_grid=DEFAULT_C_GRID, y_grid: dict | None = None,
                     tolerance: float = 1e-9) -> SDVerdict:
    """Scan h(y) >= c^-p h(y/c); the first failure in (c, y1, ray) order is reported.

    A failure means h(y) < c^-p h(y/c) - tolerance * max(h(y), tiny).
    """
    grid = dict(DEFAULT_Y_GRID)
    grid.update(y_grid or {})
    verdict = sd_criterion(spec)
    verdict.numeric_checked = True
    pts = _ray_points(spec, grid)
    h = mixture_levy_density(spec, pts)
    p = spec.dim
    for c in c_grid:
        hs = c ** -p * mixture_levy_density(spec, pts / c)
        bad = np.nonzero(h < hs - tolerance * np.maximum(h, _TINY))[0]
        if bad.size:
            i = int(bad[0])
            verdict.numeric_violation = {"c": float(c), "y": pts[i].tolist(),
                                         "h_y": float(h[i]), "h_scaled": float(hs[i])}
            break
    return verdict


# ----------------------------------------------------------------------------
# G-function certificate
# ----------------------------------------------------------------------------

@lru_cache(maxsize=256)
def _abs_moment_unit(comp: StableParams, theta: float) -> float:
    """int |z|^-theta f(z) dz by quadrature on the stable pdf."""
    f = lambda z: float(symmetric_stable_pdf(comp, z))
    a, e1 = integrate.quad(f, 0.0, 1.0, weight="alg", wvar=(-theta, 0.0), limit=200)
    b, e2 = integrate.quad(lambda z: z ** -theta * f(z), 1.0, math.inf, limit=200)
    if e1 + e2 > 1e-9 * (a + b) + 1e-14:
        raise QuadratureFailure("transverse moment quadrature did not converge")
    return 2.0 * (a + b)


def certificate_integral(spec: MixtureSpec, beta: float, theta: float, x: float,
                         c: float = 1.0) -> tuple:
    """int_{0 < y1 <= x} y1^(A theta) prod |y_{r+1}|^-theta c^-p h(y / c) dy.

    A = alpha + beta + sum 1/gamma_r; c = 1 gives G(x) itself, other c give
    the same functional of the Levy measure of c Z. Returns (value, error).
    """
    a_exp = spec.alpha + beta + float(np.sum(1.0 / spec.gammas))
    # net power of y1 near 0, integrable because theta > alpha / (alpha + beta)
    lead = (spec.alpha + beta) * theta - spec.alpha - 1.0

    def smooth(y1):
        # the powers cancel to O(1) but overflow separately near 0: combine in logs
        y1 = max(y1, 1e-300)
        v = y1 / c
        gv = float(spec.g(v))
        if gv == 0.0:
            return 0.0
        log_val = (a_exp * theta - lead) * math.log(y1) - (spec.alpha + 1.0) * math.log(v) \
            + math.log(gv / c)
        for comp in spec.components:
            log_sigma = math.log(c) + math.log(v) / comp.gamma
            log_val += -theta * log_sigma + math.log(_abs_moment_unit(comp, theta))
        return math.exp(log_val)

    val, err = integrate.quad(smooth, 0.0, x, weight="alg", wvar=(lead, 0.0), limit=200,
                              epsabs=0.0, epsrel=1e-10)
    if not math.isfinite(val) or err > 1e-7 * abs(val) + 1e-300:
        raise QuadratureFailure(f"G quadrature did not converge (err {err})")
    return val, err


def g_certificate(spec: MixtureSpec, beta: float, theta: float, x_grid=(0.5, 1.0, 2.0)) -> dict:
    """Non-s.d. certificate: G finite and e = (margin + beta) theta < 0.

    With e < 0 the c Z analogue c^e G(x / c) exceeds G(x) for every c in (0, 1).
    """
    m = spec.margin
    if not m < 0:
        raise ParameterOutOfRange("margin >= 0: the admissible beta interval is empty")
    if not 0 < beta < -m:
        raise ParameterOutOfRange(f"beta must lie in (0, {-m}), got {beta}")
    lo = spec.alpha / (spec.alpha + beta)
    if not lo < theta < 1:
        raise ParameterOutOfRange(f"theta must lie in ({lo}, 1), got {theta}")
    e = (m + beta) * theta
    vals, errs = [], []
    for x in x_grid:
        v, er = certificate_integral(spec, beta, theta, float(x))
        vals.append(v)
        errs.append(er)
    finite = all(math.isfinite(v) for v in vals)
    return {"exponent": e, "beta": beta, "theta": theta, "x": [float(x) for x in x_grid],
            "G": vals, "G_error": errs, "finite": finite,
            "certificate_holds": bool(finite and e < 0)}


# ----------------------------------------------------------------------------
# corollaries
# ----------------------------------------------------------------------------

def corollary4_construct(p: int, gamma: float = 2.0, g=None) -> MixtureSpec:
    """Spec with margin < 0 whose (p-1)-dimensional subvectors all have margin 0.

    All gamma_r = gamma and alpha = (p-2)(1 - 1/gamma). When that alpha is not
    below 1 the exponent is lowered to the midpoint of (1, (p-2)/(p-3)).
    """
    if int(p) != p or p < 2:
        raise NoAdmissibleParams("p must be an integer >= 2")
    if not 1.0 < gamma <= 2.0:
        raise NoAdmissibleParams("gamma must lie in (1, 2]")
    alpha = (p - 2) * (1.0 - 1.0 / gamma)
    if alpha >= 1.0:
        gamma = 0.5 * (1.0 + (p - 2) / (p - 3))
        alpha = (p - 2) * (1.0 - 1.0 / gamma)
    if not (0.0 <= alpha < 1.0 and gamma > 1.0):
        raise NoAdmissibleParams(f"no admissible (alpha, gamma) for p = {p}")
    spec = MixtureSpec(alpha, g if g is not None else ExpDecay(1.0),
                       tuple(StableParams(gamma, 1.0) for _ in range(p - 1)))
    if not spec.margin < 0 or any(spec.drop(i).margin < 0 for i in range(1, p) if p > 2):
        raise NoAdmissibleParams("constructed margins failed verification")
    return spec


def corollary3_check(spec: MixtureSpec) -> dict:
    """alpha - p + 2 + sum_{r <= p-2} 1/gamma_r < 0 (p >= 3).

    When true, some shifted vector (c_r V + V^{1/gamma_r} X_r) is not s.d.; the
    shifts themselves are not computed.
    """
    p = spec.dim
    if p < 3:
        raise ParameterOutOfRange("the shifted-family statement needs p >= 3")
    val = math.fsum([spec.alpha, 2.0 - p] + [1.0 / g for g in spec.gammas[:-1]])
    val = 0.0 if abs(val) < 1e-12 else val
    return {"value": val, "condition": val < 0,
            "statement": "a shifted member is not s.d." if val < 0 else "no conclusion"}


def corollary5_sweep(p_values=(2, 3), step: float = 0.1) -> list:
    """alpha = 0: margin sum(1/gamma_r - 1) >= 0 exactly when every gamma_r = 1."""
    n = int(round(1.0 / step))
    grid = [round(1.0 + k * step, 10) for k in range(n + 1)]
    rows = []
    for p in p_values:
        for gammas in itertools.product(grid, repeat=p - 1):
            spec = MixtureSpec(0.0, ExpDecay(1.0), tuple(StableParams(g, 1.0) for g in gammas))
            v = sd_criterion(spec)
            rows.append({"p": p, "gammas": list(gammas), "margin": v.margin,
                         "is_sd": v.is_sd_by_criterion, "all_cauchy": all(g == 1.0 for g in gammas)})
    return rows


# ----------------------------------------------------------------------------
# laws on a hyperbola
# ----------------------------------------------------------------------------

@dataclass
class HyperbolaAtomDist:
    """Finite law of (U, W) with U W = c on its support."""

    atoms: list
    params: dict | None = None

    def __post_init__(self):
        self.atoms = [(float(u), float(w), float(pr)) for u, w, pr in self.atoms]
        probs = np.array([a[2] for a in self.atoms])
        if probs.size == 0 or np.any(probs <= 0):
            raise ValueError("atom probabilities must be positive")
        if abs(probs.sum() - 1.0) > 1e-12:
            raise ValueError("atom probabilities must sum to 1")

    @property
    def points(self) -> np.ndarray:
        return np.array([[a[0], a[1]] for a in self.atoms])

    @property
    def probs(self) -> np.ndarray:
        return np.array([a[2] for a in self.atoms])

    def product(self) -> float:
        prods = self.points[:, 0] * self.points[:, 1]
        scale = max(1.0, float(np.max(np.abs(self.points))) ** 2)
        if np.ptp(prods) > 1e-12 * scale:
            raise NotHyperbola(f"u w is not constant on the support (spread {np.ptp(prods)})")
        return float(np.mean(prods))

    @classmethod
    def from_parameters(cls, c: float, b1: float, b2: float, alpha: float, beta: float):
        """The four-atom decomposable law with factors described by (b1, b2, alpha, beta)."""
        disc = b1 * b1 - 4.0 * c * b1 / b2
        if b1 == 0 or b2 == 0 or disc <= 0 or not (0 < alpha < 1 and 0 < beta < 1):
            raise ParameterOutOfRange("need b1, b2 != 0, b1^2 - 4 c b1/b2 > 0, alpha, beta in (0, 1)")
        a1 = 0.5 * (b1 + math.sqrt(disc))
        a2 = 0.5 * (b1 - math.sqrt(disc))
        k = b2 / b1
        atoms = [(a1, a2 * k, alpha * beta), (a2, a1 * k, (1 - alpha) * beta),
                 (-a2, -a1 * k, alpha * (1 - beta)), (-a1, -a2 * k, (1 - alpha) * (1 - beta))]
        return cls(atoms, {"c": c, "b1": b1, "b2": b2, "alpha": alpha, "beta": beta})

    def to_dict(self) -> dict:
        return {"atoms": [list(a) for a in self.atoms], "params": self.params}


@dataclass
class Decomposition:
    decomposable: bool
    b1: float | None = None
    b2: float | None = None
    alpha: float | None = None
    beta: float | None = None
    factors: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"decomposable": self.decomposable, "b1": self.b1, "b2": self.b2,
                "alpha": self.alpha, "beta": self.beta, "factors": self.factors}


def _find(points: np.ndarray, x: np.ndarray, tol: float) -> int:
    d = np.max(np.abs(points - x), axis=1)
    i = int(np.argmin(d))
    return i if d[i] <= tol else -1


def hyperbola_decompose(d: HyperbolaAtomDist, tol: float = 1e-9) -> Decomposition:
    """Decomposable iff the law is the four-atom family above.

    The support must split into two antipodal pairs {P1, P4}, {P2, P3} with
    P1 = (a1, a2 k), P2 = (a2, a1 k), a1 > a2, b1 = a1 + a2 != 0, and the
    probability table [[P1, P2], [P3, P4]] must have rank one.
    """
    d.product()  # raises NotHyperbola when u w is not constant
    pts, pr = d.points, d.probs
    if pts.shape[0] != 4:
        return Decomposition(False)
    scale = max(1.0, float(np.max(np.abs(pts))))
    ptol = tol * scale
    neg = [_find(pts, -x, ptol) for x in pts]
    if any(j < 0 or j == i for i, j in enumerate(neg)):
        return Decomposition(False)
    pairs = []
    for i, j in enumerate(neg):
        if i < j:
            pairs.append((i, j))
    if len(pairs) != 2:
        return Decomposition(False)
    for first, second in ((0, 1), (1, 0)):
        for i1, i4 in (pairs[first], pairs[first][::-1]):
            for i2, i3 in (pairs[second], pairs[second][::-1]):
                a1, y1 = pts[i1]
                a2, y2 = pts[i2]
                b1 = a1 + a2
                if not a1 - a2 > ptol or abs(b1) <= ptol:
                    continue
                # k from the larger of a1, a2 in modulus
                k = y2 / a1 if abs(a1) >= abs(a2) else y1 / a2
                if abs(k) <= tol or abs(y1 - a2 * k) > ptol or abs(y2 - a1 * k) > ptol:
                    continue
                p1, p2, p3, p4 = pr[i1], pr[i2], pr[i3], pr[i4]
                beta = p1 + p2
                alpha = p1 / beta
                if abs(p3 - alpha * (1 - beta)) > tol or abs(p4 - (1 - alpha) * (1 - beta)) > tol:
                    continue
                b2 = k * b1
                factors = {
                    "Y1": {"atoms": [pts[i1].tolist(), pts[i2].tolist()], "probs": [alpha, 1 - alpha]},
                    "Y2": {"atoms": [[0.0, 0.0], [-b1, -b2]], "probs": [beta, 1 - beta]},
                }
                return Decomposition(True, float(b1), float(b2), float(alpha), float(beta), factors)
    return Decomposition(False)


# ----------------------------------------------------------------------------
# brute-force oracle
# ----------------------------------------------------------------------------

@dataclass
class Factorization:
    y1: np.ndarray
    p: np.ndarray
    y2: np.ndarray
    q: np.ndarray

    def to_dict(self) -> dict:
        return {"y1": self.y1.tolist(), "p": self.p.tolist(),
                "y2": self.y2.tolist(), "q": self.q.tolist()}


def _solve_probs(y1, y2, pts, target, rng, starts: int, tol: float):
    m, k = len(y1), len(y2)
    scale = max(1.0, float(np.max(np.abs(pts))))
    cell = np.empty((m, k), dtype=int)
    for i in range(m):
        for j in range(k):
            idx = _find(pts, y1[i] + y2[j], 1e-9 * scale)
            if idx < 0:
                return None
            cell[i, j] = idx
    if set(cell.ravel().tolist()) != set(range(len(pts))):
        return None

    def resid(z):
        p, q = z[:m], z[m:]
        out = np.zeros(len(pts) + 2)
        np.add.at(out, cell.ravel(), np.outer(p, q).ravel())
        out[: len(pts)] -= target
        out[-2] = p.sum() - 1.0
        out[-1] = q.sum() - 1.0
        return out

    grid = [0.25, 0.5, 0.75]
    inits = [np.concatenate([[a] + [(1 - a) / (m - 1)] * (m - 1), [b] + [(1 - b) / (k - 1)] * (k - 1)])
             for a in grid for b in grid] if m > 1 and k > 1 else []
    inits += [np.concatenate([rng.dirichlet(np.ones(m)), rng.dirichlet(np.ones(k))])
              for _ in range(starts)]
    for z0 in inits:
        sol = optimize.least_squares(resid, z0, bounds=(0.0, 1.0), xtol=1e-15, ftol=1e-15,
                                     gtol=1e-15, max_nfev=2000)
        if np.max(np.abs(resid(sol.x))) <= tol and np.all(sol.x > tol):
            return sol.x[:m], sol.x[m:]
    return None


def brute_force_decompose(points, probs, m: int = 2, k: int = 2, budget: int = 100000,
                          seed: int = 0, tol: float = 1e-9):
    """Independent Y1 (m atoms), Y2 (k atoms) with Y1 + Y2 equal in law to the target.

    Y2 is shifted to contain the origin, so Y1 sits inside the target support
    and Y2 inside its differences. Every candidate support pair is tried with
    multistart bounded least squares on the probabilities. Returns a
    Factorization or None.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    target = np.asarray(probs, dtype=float)
    if not (1 <= m <= 4 and 1 <= k <= 4):
        raise ValueError("support sizes are limited to 1..4")
    if m * k < len(pts):
        return None
    rng = np.random.default_rng(seed)
    count = 0
    seen = set()
    for combo in itertools.combinations(range(len(pts)), m):
        y1 = pts[list(combo)]
        diffs = pts - y1[0]
        nonzero = [i for i in range(len(pts)) if np.max(np.abs(diffs[i])) > 1e-12]
        for extra in itertools.combinations(nonzero, k - 1):
            count += 1
            if count > budget:
                raise SearchBudgetExceeded(f"more than {budget} candidate supports")
            y2 = np.vstack([np.zeros((1, pts.shape[1])), diffs[list(extra)]])
            key = (combo, tuple(np.round(y2, 12).ravel()))
            if key in seen:
                continue
            seen.add(key)
            sol = _solve_probs(y1, y2, pts, target, rng, 4, tol)
            if sol is not None:
                return Factorization(y1, sol[0], y2, sol[1])
    return None
