"""
Moment existence from the truncated Levy measure, compound-Poisson moment
series, Monte Carlo diagnostics and the submultiplicativity counterexample.

E prod |X_r|^beta_r is finite iff int prod |x_r|^alpha_r dnu1 is finite for
every alpha in the box prod [0, beta_r]; checking only the corner alpha = beta
is not enough.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ExponentNotInteger, ExponentOutOfRange, TauNonPositive
from .levy import (
    AtomicMeasure,
    LawMeasure,
    LevyTriplet,
    MixtureMeasure,
    TabulatedMeasure,
    TruncationSplit,
)
from .mixtures import ExpDecay, MixtureSpec, TabulatedDecreasing

__all__ = [
    "MomentQuery",
    "MomentVerdict",
    "levy_box_moment",
    "moment_exists",
    "cp_moment_series",
    "positivity_check",
    "theta_star",
    "gamma_star",
    "mixture_moment_exists",
    "MomentDiagnostic",
    "mc_moment_diag",
    "hill_index",
    "Witness",
    "submultiplicativity_witness",
]

FINITE, INFINITE, UNDECIDED = "Finite", "Infinite", "Undecided"

BOUNDARY_NOTE = (
    "the witness puts the scalar law exactly on its moment boundary, where the "
    "integral diverges; finiteness strictly inside the range does not extend "
    "to the closed range"
)


@dataclass(frozen=True)
class MomentQuery:
    exponents: tuple

    def __post_init__(self):
        b = tuple(float(x) for x in np.atleast_1d(self.exponents))
        if any(not math.isfinite(x) or x < 0 for x in b):
            raise ValueError("moment exponents must be finite and nonnegative")
        object.__setattr__(self, "exponents", b)

    @property
    def beta(self) -> np.ndarray:
        return np.array(self.exponents)

    @property
    def dim(self) -> int:
        return len(self.exponents)


@dataclass
class MomentVerdict:
    status: str
    witness: tuple | None = None
    value: float | None = None
    method: str = ""
    note: str | None = None

    def to_dict(self) -> dict:
        return {"status": self.status,
                "witness": None if self.witness is None else list(self.witness),
                "value": self.value, "method": self.method, "note": self.note}


def _as_query(q) -> MomentQuery:
    return q if isinstance(q, MomentQuery) else MomentQuery(tuple(np.atleast_1d(q)))


def _powprod(x: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """prod |x_r|^beta_r with 0^0 = 1."""
    ax = np.abs(x)
    with np.errstate(divide="ignore", over="ignore"):
        terms = np.where(beta == 0, 1.0, ax ** beta)
    return np.prod(terms, axis=-1)


# ----------------------------------------------------------------------------
# box criterion
# ----------------------------------------------------------------------------

def _law_box(nu: LawMeasure, beta: np.ndarray) -> MomentVerdict:
    e = nu.exponents
    s_lo_law, s_hi_law = nu.law.moment_bounds
    # prod (v^e_r)^alpha_r = v^s, s ranging over [s_min, s_max] on the box
    s_min = float(np.sum(np.where(e < 0, e * beta, 0.0)))
    s_max = float(np.sum(np.where(e > 0, e * beta, 0.0)))
    reaches_zero = any(a == 0.0 for a, _ in nu.intervals)
    reaches_inf = any(b == math.inf for _, b in nu.intervals)
    if reaches_inf and s_max >= s_hi_law:
        wit = tuple(float(b) if ee > 0 else 0.0 for ee, b in zip(e, beta))
        note = BOUNDARY_NOTE if s_max == s_hi_law else None
        return MomentVerdict(INFINITE, wit, None, "scalar-law boundary", note)
    if reaches_zero and s_min <= s_lo_law:
        wit = tuple(float(b) if ee < 0 else 0.0 for ee, b in zip(e, beta))
        note = BOUNDARY_NOTE if s_min == s_lo_law else None
        return MomentVerdict(INFINITE, wit, None, "scalar-law boundary", note)
    val, _ = nu.integrate(lambda x: _powprod(x, beta))
    return MomentVerdict(FINITE, None, float(val), "scalar-law boundary")


def theta_star(g, alpha: float) -> float:
    """sup{theta > 0 : int_1^inf v^(theta - alpha - 1) g(v) dv < inf}."""
    if isinstance(g, TabulatedDecreasing):
        return alpha if g.values[-1] > 0 else math.inf
    if isinstance(g, ExpDecay) and g.rate > 0:
        return math.inf
    return alpha


def gamma_star(gamma: float) -> float:
    return math.inf if gamma == 2.0 else gamma


def _mixture_box(nu: MixtureMeasure, beta: np.ndarray, compute_value: bool) -> MomentVerdict:
    spec = nu.spec
    for r, comp in enumerate(spec.components):
        if beta[r + 1] >= gamma_star(comp.gamma):
            wit = tuple(float(beta[k]) if k == r + 1 else 0.0 for k in range(spec.dim))
            return MomentVerdict(INFINITE, wit, None, "stable moment boundary")
    theta = float(beta[0] + np.sum(beta[1:] / spec.gammas))
    if theta >= theta_star(spec.g, spec.alpha):
        return MomentVerdict(INFINITE, tuple(map(float, beta)), None, "v-tail integral")
    val = None
    if compute_value:
        val, _ = nu.integrate(lambda y: _powprod(y, beta))
    return MomentVerdict(FINITE, None, val, "v-tail integral")


def levy_box_moment(nu1, q, compute_value: bool = True) -> MomentVerdict:
    """Is int prod |x_r|^alpha_r dnu1 finite for every alpha in prod [0, beta_r]?

    Infinite verdicts carry a witness alpha in the box.
    """
    q = _as_query(q)
    beta = q.beta
    if beta.size != nu1.dim:
        raise ValueError("query dimension differs from measure dimension")
    if not nu1.is_finite:
        raise ValueError("levy_box_moment needs the finite measure nu1")
    if isinstance(nu1, (AtomicMeasure, TabulatedMeasure)):
        val, _ = nu1.integrate(lambda x: _powprod(x, beta))
        return MomentVerdict(FINITE, None, float(val), "finite atoms")
    if isinstance(nu1, LawMeasure):
        return _law_box(nu1, beta)
    if isinstance(nu1, MixtureMeasure):
        return _mixture_box(nu1, beta, compute_value)
    return MomentVerdict(UNDECIDED, method="no reduction applies")


def moment_exists(t: LevyTriplet, tau: float, q, compute_value: bool = True) -> MomentVerdict:
    """Verdict on E prod |X_r|^beta_r through the box criterion on nu restricted to |x| >= tau.

    The Gaussian part and the small jumps have all moments and never matter.
    """
    if not tau > 0:
        raise TauNonPositive(f"tau must be positive, got {tau}")
    nu1 = t.measure.restrict(tau, math.inf)
    return levy_box_moment(nu1, q, compute_value)


# ----------------------------------------------------------------------------
# compound Poisson series
# ----------------------------------------------------------------------------

@dataclass
class SeriesResult:
    value: float
    tail_bound: float
    terms: int


def _tail_envelope(lam: float, c: float, power: float, j0: int) -> float:
    """sum_{j >= j0} e^-lam lam^j / j! (j+1)^power c^(j+1)."""
    total = 0.0
    j = j0
    while True:
        lt = -lam + j * math.log(lam) - math.lgamma(j + 1) + power * math.log(j + 1) \
            + (j + 1) * math.log(c)
        term = math.exp(lt)
        total += term
        # terms decrease geometrically once j > lam c
        if j > 2 * lam * c + power and term < 1e-18 * max(total, 1e-300):
            return total
        j += 1
        if j > j0 + 100000:
            return math.inf


def cp_moment_series(split: TruncationSplit, q, j_max: int | None = None,
                     tol: float = 1e-12) -> SeriesResult:
    """E prod |X_r|^beta_r for X = b + sum_{k <= N} J_k, N ~ Poisson(rate), J ~ nu1/rate.

    Every j-fold atom sum is enumerated exactly (multinomial weights). The
    remainder past ``j_max`` is bounded by the (j+1)^{sum beta} c^{j+1}
    envelope. Requires nu2 = 0, i.e. no small jumps, and Q = 0 implied.
    """
    q = _as_query(q)
    beta = q.beta
    if np.any(beta != np.round(beta)):
        raise ExponentNotInteger("series evaluation needs integer exponents")
    nu1 = split.nu1
    if not isinstance(nu1, (AtomicMeasure, TabulatedMeasure)):
        raise ValueError("cp_moment_series needs a finite atomic nu1")
    m2, _ = split.nu2.mass()
    if m2 != 0:
        raise ValueError("cp_moment_series needs nu2 = 0 (pure compound Poisson plus drift)")
    atoms, w = nu1._atoms()
    b = split.shifted_drift
    lam = float(np.sum(w))
    if lam == 0:
        return SeriesResult(float(_powprod(b, beta)), 0.0, 1)
    probs = w / lam
    power = float(np.sum(beta))
    c = max(float(np.dot(probs, np.prod(1.0 + np.where(beta == 0, 1.0, np.abs(atoms) ** beta), axis=1))),
            float(np.prod(1.0 + np.where(beta == 0, 1.0, np.abs(b) ** beta))))
    c = max(c, 1.0 + 1e-12)

    m = atoms.shape[0]
    # distribution of the count vector of each atom among j jumps
    level = {tuple([0] * m): 1.0}
    total = 0.0
    j = 0
    while True:
        pts = np.array(list(level.keys()), dtype=float) @ atoms + b
        pr = np.array(list(level.values()))
        expect = float(np.dot(pr, _powprod(pts, beta)))
        total += math.exp(-lam + j * math.log(lam) - math.lgamma(j + 1)) * expect
        j += 1
        bound = _tail_envelope(lam, c, power, j)
        if (j_max is not None and j > j_max) or (j_max is None and bound <= tol * max(total, 1e-300)):
            return SeriesResult(total, bound, j)
        nxt: dict = {}
        for key, p_key in level.items():
            for i in range(m):
                k2 = list(key)
                k2[i] += 1
                k2 = tuple(k2)
                nxt[k2] = nxt.get(k2, 0.0) + p_key * probs[i]
        level = nxt


# ----------------------------------------------------------------------------
# positivity
# ----------------------------------------------------------------------------

def positivity_check(split: TruncationSplit, gaussian_form) -> bool:
    """Does the law put positive mass on {prod X_r != 0}?

    Coordinates with a Gaussian component are nonzero almost surely. For the
    rest, support points base + (sum of at most p + 1 atoms of nu) are
    searched, base being the drift of the jump part.
    """
    Q = np.atleast_2d(np.asarray(gaussian_form, dtype=float))
    p = split.dim
    if np.all(np.linalg.eigvalsh(0.5 * (Q + Q.T)) > 0):
        return True
    free = np.diag(Q) <= 0
    parts = [split.nu1]
    base = split.shifted_drift.copy()
    if isinstance(split.nu2, (AtomicMeasure, TabulatedMeasure)):
        x2, w2 = split.nu2._atoms()
        if w2.size:
            base = base - w2 @ x2
            parts.append(split.nu2)
    atoms = np.vstack([m._atoms()[0] for m in parts])
    if np.all(base[free] != 0):
        return True
    for k in range(1, p + 2):
        for combo in itertools.combinations_with_replacement(range(atoms.shape[0]), k):
            pt = base + atoms[list(combo)].sum(axis=0)
            if np.all(pt[free] != 0):
                return True
    return False


# ----------------------------------------------------------------------------
# mixture moments
# ----------------------------------------------------------------------------

def mixture_moment_exists(spec: MixtureSpec, alpha) -> MomentVerdict:
    """E V^alpha_1 prod |V^{1/gamma_r} X_r|^alpha_{r+1} for signed exponents.

    Finite when theta = alpha_1 + sum alpha_{r+1}/gamma_r lies in [0, theta*);
    Infinite when the v-tail integral int_1^inf v^(theta-alpha-1) g dv diverges.
    """
    a = np.atleast_1d(np.asarray(alpha, dtype=float))
    if a.size != spec.dim:
        raise ValueError("exponent vector has the wrong length")
    for r, comp in enumerate(spec.components):
        if not -1.0 < a[r + 1] < gamma_star(comp.gamma):
            raise ExponentOutOfRange(
                f"exponent {a[r + 1]} outside (-1, {gamma_star(comp.gamma)}) for coordinate {r + 2}")
    theta = float(a[0] + np.sum(a[1:] / spec.gammas))
    ts = theta_star(spec.g, spec.alpha)
    if theta >= ts:
        return MomentVerdict(INFINITE, tuple(map(float, a)), None, "v-tail integral")
    if theta >= 0:
        return MomentVerdict(FINITE, None, None, "v-tail integral")
    return MomentVerdict(UNDECIDED, None, None, "negative v-power: tail argument silent")


# ----------------------------------------------------------------------------
# Monte Carlo diagnostics
# ----------------------------------------------------------------------------

def hill_index(x: np.ndarray, frac: float = 0.01) -> float:
    """Hill estimate of the tail index from the top ``frac`` of positive values."""
    x = np.sort(np.asarray(x, dtype=float)[np.asarray(x) > 0])[::-1]
    k = max(10, int(frac * x.size))
    if x.size <= k:
        return math.nan
    logs = np.log(x[:k]) - math.log(x[k])
    h = float(np.mean(logs))
    return math.inf if h == 0 else 1.0 / h


@dataclass
class MomentDiagnostic:
    estimate: float
    std_error: float
    hill_tail_index: float
    divergence_flag: bool
    half_estimates: tuple
    hill_trace: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"estimate": self.estimate, "std_error": self.std_error,
                "hill_tail_index": self.hill_tail_index,
                "divergence_flag": self.divergence_flag,
                "half_estimates": list(self.half_estimates),
                "hill_trace": {str(k): v for k, v in self.hill_trace.items()},
                "heuristic": True}


def mc_moment_diag(samples, q) -> MomentDiagnostic:
    """Mean of prod |X_r|^beta_r with a Hill tail index on the top 1%.

    divergence_flag is set when the index is <= 1. Heuristic only.
    """
    x = np.atleast_2d(np.asarray(samples, dtype=float))
    beta = _as_query(q).beta
    if x.shape[1] != beta.size:
        raise ValueError("sample dimension differs from query dimension")
    prod = _powprod(x, beta)
    n = prod.size
    est = float(np.mean(prod))
    se = float(np.std(prod, ddof=1) / math.sqrt(n))
    idx = hill_index(prod, 0.01)
    trace = {f: hill_index(prod, f) for f in (0.005, 0.01, 0.02, 0.05)}
    halves = (float(np.mean(prod[: n // 2])), float(np.mean(prod[n // 2:])))
    return MomentDiagnostic(est, se, idx, bool(idx <= 1.0), halves, trace)


# ----------------------------------------------------------------------------
# submultiplicativity
# ----------------------------------------------------------------------------

@dataclass
class Witness:
    x: np.ndarray
    y: np.ndarray
    ratio_g1: float
    ratio_g2: float

    def to_dict(self) -> dict:
        return {"x": self.x.tolist(), "y": self.y.tolist(),
                "ratio_g1": self.ratio_g1, "ratio_g2": self.ratio_g2}


def submultiplicativity_witness(tau: float, bound: float) -> Witness:
    """Points x = (s, 1/s), y = (1/s, s), s = max(tau, sqrt(2 bound)).

    g(x) = g(y) = 1 while g(x + y) > s^2 >= 2 bound, for g2 = |x1 x2| and for
    g1 = |x1 x2| 1{|x| >= tau}; so neither is submultiplicative with a
    constant <= bound.
    """
    if not bound >= 1:
        raise ValueError("bound must be at least 1")
    s = max(float(tau), math.sqrt(2.0 * bound))
    x = np.array([s, 1.0 / s])
    y = np.array([1.0 / s, s])

    def g2(z):
        return abs(z[0] * z[1])

    def g1(z):
        return g2(z) if np.linalg.norm(z) >= tau else 0.0

    r1 = g1(x + y) / (g1(x) * g1(y))
    r2 = g2(x + y) / (g2(x) * g2(y))
    return Witness(x, y, float(r1), float(r2))
