"""
Variance-mixture families built on a positive self-decomposable V.

``Z = (V, V^{1/gamma_1} X_1, ..., V^{1/gamma_{p-1}} X_{p-1})`` with X_r independent
symmetric stable and V having Levy density ``v^{-(alpha+1)} g(v)`` on (0, inf).
Also the multivariate generalized hyperbolic (GH) normal variance-mean
mixture N(mu + u beta Delta, u Delta), u ~ GIG.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .errors import (
    CholeskyFailure,
    NotRepresentable,
    QuadratureFailure,
    UnsupportedMixing,
)
from .special import (
    GIGParams,
    StableParams,
    as_generator,
    gig_mgf,
    sample_gig,
    sample_positive_stable,
    sample_symmetric_stable,
    symmetric_stable_pdf,
)

__all__ = [
    "ExpDecay",
    "Constant",
    "TabulatedDecreasing",
    "MixtureSpec",
    "GHSpec",
    "GHRepresentation",
    "g_from_dict",
    "mixture_levy_density",
    "mixture_char_fn",
    "mixture_log_char_fn",
    "mixture_sample",
    "v_sampler_info",
    "density_integral",
    "density_log_char_fn",
    "gh_sample",
    "gh_char_fn",
    "gh_as_mixture_spec",
]


# ----------------------------------------------------------------------------
# g families
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class ExpDecay:
    """g(v) = level * exp(-rate * v); rate = 0 gives the positive stable case."""

    rate: float = 1.0
    level: float = 1.0

    def __post_init__(self):
        if self.rate < 0 or self.level <= 0:
            raise ValueError("ExpDecay needs rate >= 0 and level > 0")

    def __call__(self, v):
        return self.level * np.exp(-self.rate * np.asarray(v, dtype=float))

    @property
    def sup(self) -> float:
        return self.level

    def tail_is_heavy(self) -> bool:
        return self.rate == 0

    def to_dict(self):
        return {"family": "exp_decay", "rate": self.rate, "level": self.level}


@dataclass(frozen=True)
class Constant:
    level: float = 1.0

    def __post_init__(self):
        if self.level <= 0:
            raise ValueError("Constant g needs a positive level")

    def __call__(self, v):
        return np.full(np.shape(v), self.level, dtype=float)

    @property
    def rate(self) -> float:
        return 0.0

    @property
    def sup(self) -> float:
        return self.level

    def tail_is_heavy(self) -> bool:
        return True

    def to_dict(self):
        return {"family": "constant", "level": self.level}


@dataclass(frozen=True)
class TabulatedDecreasing:
    """Piecewise-linear g through (v_k, g_k); flat extension outside the grid.

    Complete monotonicity is not checked, only monotone decrease on the grid.
    """

    v: tuple
    values: tuple

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float)
        g = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.shape != g.shape or v.size < 2:
            raise ValueError("tabulated g needs matching 1-d grids of length >= 2")
        if np.any(np.diff(v) <= 0) or v[0] < 0:
            raise ValueError("tabulated g grid must be increasing and nonnegative")
        if np.any(g < 0) or np.any(np.diff(g) > 0):
            raise ValueError("tabulated g must be nonnegative and nonincreasing")
        object.__setattr__(self, "v", tuple(v.tolist()))
        object.__setattr__(self, "values", tuple(g.tolist()))

    def __call__(self, v):
        return np.interp(np.asarray(v, dtype=float), self.v, self.values)

    @property
    def sup(self) -> float:
        return self.values[0]

    def tail_is_heavy(self) -> bool:
        return self.values[-1] > 0

    def to_dict(self):
        return {"family": "tabulated", "v": list(self.v), "values": list(self.values)}


def g_from_dict(d: dict):
    fam = d["family"]
    if fam == "exp_decay":
        return ExpDecay(float(d.get("rate", 1.0)), float(d.get("level", 1.0)))
    if fam == "constant":
        return Constant(float(d.get("level", 1.0)))
    if fam == "tabulated":
        return TabulatedDecreasing(tuple(d["v"]), tuple(d["values"]))
    raise ValueError(f"unknown g family {fam!r}")


# ----------------------------------------------------------------------------
# MixtureSpec
# ----------------------------------------------------------------------------

MARGIN_ATOL = 1e-12


@dataclass(frozen=True)
class MixtureSpec:
    alpha: float
    g: object
    components: tuple

    def __post_init__(self):
        comps = tuple(c if isinstance(c, StableParams) else StableParams(*c)
                      for c in self.components)
        object.__setattr__(self, "components", comps)
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError(f"alpha must lie in [0, 1), got {self.alpha}")
        if len(comps) < 1:
            raise ValueError("at least one stable component is required (p >= 2)")
        # int_0^inf v^-alpha g(v)/(1+v) dv < inf: only the tail can fail
        if self.g.tail_is_heavy() and self.alpha == 0.0:
            raise ValueError("int v^-alpha g(v)/(1+v) dv diverges: alpha = 0 needs a decaying g")

    @property
    def dim(self) -> int:
        return len(self.components) + 1

    @property
    def gammas(self) -> np.ndarray:
        return np.array([c.gamma for c in self.components])

    @property
    def scales(self) -> np.ndarray:
        return np.array([c.scale for c in self.components])

    @property
    def hypothesis_ok(self) -> bool:
        """True when every stable exponent lies in [1, 2]."""
        return bool(np.all((self.gammas >= 1.0) & (self.gammas <= 2.0)))

    @property
    def margin(self) -> float:
        m = math.fsum([self.alpha, 1.0 - self.dim] + [1.0 / g for g in self.gammas])
        # exact-zero constructions (alpha = (p-2)(1-1/gamma)) land within rounding of 0
        return 0.0 if abs(m) < MARGIN_ATOL else m

    def integrability(self) -> float:
        """Value of int_0^inf v^-alpha g(v) / (1+v) dv by quadrature."""
        f = lambda v: v ** -self.alpha * float(self.g(v)) / (1.0 + v)
        a, _ = integrate.quad(f, 0.0, 1.0, limit=200)
        b, _ = integrate.quad(f, 1.0, np.inf, limit=200)
        return a + b

    def drop(self, index: int) -> "MixtureSpec":
        """Spec of the subvector without coordinate ``index`` (1..p-1, 0-based into Z)."""
        if not 1 <= index < self.dim:
            raise ValueError("only transverse coordinates (1..p-1) can be dropped")
        comps = self.components[: index - 1] + self.components[index:]
        return MixtureSpec(self.alpha, self.g, comps)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "g": self.g.to_dict(),
            "components": [c.to_dict() for c in self.components],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MixtureSpec":
        return cls(float(d["alpha"]), g_from_dict(d["g"]),
                   tuple(StableParams.from_dict(c) for c in d["components"]))


# ----------------------------------------------------------------------------
# Levy density
# ----------------------------------------------------------------------------

def mixture_levy_density(spec: MixtureSpec, y):
    """Levy density h(y) of Z; zero off (0, inf) x R^{p-1}.

    ``y`` has shape (..., p).
    """
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != spec.dim:
        raise ValueError(f"expected points of dimension {spec.dim}")
    v = y[..., 0]
    out = np.zeros(v.shape)
    pos = v > 0
    if not np.any(pos):
        return out[()] if out.ndim == 0 else out
    vp = v[pos]
    val = vp ** -(spec.alpha + 1.0) * spec.g(vp)
    for r, comp in enumerate(spec.components):
        s = vp ** (1.0 / comp.gamma)
        val = val * symmetric_stable_pdf(comp, y[..., r + 1][pos] / s) / s
    out[pos] = val
    return out[()] if out.ndim == 0 else out


# ----------------------------------------------------------------------------
# characteristic function
# ----------------------------------------------------------------------------

_QUAD_TOL = 1e-6


def _cexpm1(z: complex) -> complex:
    """exp(z) - 1 without cancellation for small |z|."""
    x, y = z.real, z.imag
    return complex(math.expm1(x) * math.cos(y) - 2.0 * math.sin(0.5 * y) ** 2,
                   math.exp(x) * math.sin(y))


def mixture_log_char_fn(spec: MixtureSpec, t, tol: float = _QUAD_TOL):
    """int_0^inf (exp(i t1 v - v S) - 1) v^-(alpha+1) g(v) dv, S = sum scale_r |t_{r+1}|^gamma_r.

    The piece on (0, 1] is integrated in s = v^(1-alpha); the tail past v = 1
    uses Fourier-weighted quadrature. Returns (value, error_estimate).
    """
    t = np.asarray(t, dtype=float)
    if t.shape != (spec.dim,):
        raise ValueError(f"t must have length {spec.dim}")
    t1 = float(t[0])
    S = float(np.sum(spec.scales * np.abs(t[1:]) ** spec.gammas))
    if t1 == 0.0 and S == 0.0:
        return 0j, 0.0
    a, g = spec.alpha, spec.g
    z = complex(-S, t1)

    def head(s, part):
        # s = v^(1-alpha) makes the v -> 0 end regular: integrand -> z g(0)/(1-alpha)
        if s == 0.0:
            val = z * float(g(0.0))
        else:
            v = s ** (1.0 / (1.0 - a))
            val = _cexpm1(z * v) / v * float(g(v)) if v > 0 else z * float(g(0.0))
        val = val / (1.0 - a)
        return val.real if part == 0 else val.imag

    err = 0.0
    re_h, e1 = integrate.quad(head, 0.0, 1.0, args=(0,), limit=400, epsabs=tol / 10)
    im_h, e2 = integrate.quad(head, 0.0, 1.0, args=(1,), limit=400, epsabs=tol / 10)
    err += e1 + e2

    amp = lambda v: math.exp(-S * v) * v ** (-a - 1.0) * float(g(v))
    minus, e3 = integrate.quad(lambda v: v ** (-a - 1.0) * float(g(v)), 1.0, np.inf,
                               limit=400, epsabs=tol / 10)
    err += e3
    if t1 == 0.0:
        re_t, e4 = integrate.quad(amp, 1.0, np.inf, limit=400, epsabs=tol / 10)
        im_t, e5 = 0.0, 0.0
    else:
        w = abs(t1)
        re_t, e4 = integrate.quad(amp, 1.0, np.inf, weight="cos", wvar=w, limlst=200)
        im_t, e5 = integrate.quad(amp, 1.0, np.inf, weight="sin", wvar=w, limlst=200)
        im_t *= math.copysign(1.0, t1)
    err += e4 + e5
    val = complex(re_h + re_t - minus, im_h + im_t)
    if not np.isfinite(err) or err > tol * max(1.0, abs(val)):
        raise QuadratureFailure(f"mixture log ch.f. error estimate {err:.2e} exceeds {tol:.1e}")
    return val, err


def mixture_char_fn(spec: MixtureSpec, t, tol: float = _QUAD_TOL) -> complex:
    """Characteristic function of Z at t."""
    val, _ = mixture_log_char_fn(spec, t, tol)
    out = complex(np.exp(val))
    if abs(out) > 1.0 + 1e-9:
        raise QuadratureFailure(f"|phi(t)| = {abs(out)} exceeds 1")
    return out


# ----------------------------------------------------------------------------
# integration against h
# ----------------------------------------------------------------------------

_W_MIN, _W_MAX = -700.0, 230.0


@lru_cache(maxsize=16)
def _sinh_sinh(step: float, offset: float, t_max: float = 4.0):
    k = np.arange(-math.ceil(t_max / step) - 1, math.ceil(t_max / step) + 1)
    t = (k + offset) * step
    t = t[np.abs(t) <= t_max]
    u = 0.5 * math.pi * np.sinh(t)
    x = np.sinh(u)
    w = step * 0.5 * math.pi * np.cosh(t) * np.cosh(u)
    return x, w


def _product_rule(spec: MixtureSpec, step: float, offset: float):
    x1, w1 = _sinh_sinh(step, offset)
    p = spec.dim
    idx = np.meshgrid(*([np.arange(x1.size)] * (p - 1)), indexing="ij")
    idx = [i.ravel() for i in idx]
    xs = np.stack([x1[i] for i in idx], axis=1)
    wt = np.ones(xs.shape[0])
    for r, comp in enumerate(spec.components):
        wt *= w1[idx[r]] * symmetric_stable_pdf(comp, xs[:, r])
    keep = wt > 0
    return xs[keep], wt[keep]


@lru_cache(maxsize=8)
def _de_interval_rule(step: float, offset: float, finite: bool):
    """DE nodes on (-1, 1) (tanh-sinh) or (0, inf) (exp-sinh) as (node, gap, weight).

    ``gap`` is the distance to the nearer finite endpoint, kept exact near it.
    """
    t_max = 3.2 if finite else 4.0
    k = np.arange(-math.ceil(t_max / step) - 1, math.ceil(t_max / step) + 1)
    t = (k + offset) * step
    t = t[np.abs(t) <= t_max]
    u = 0.5 * math.pi * np.sinh(t)
    if finite:
        node = np.tanh(u)
        gap = 2.0 / (np.exp(2.0 * np.abs(u)) + 1.0)
        w = step * 0.5 * math.pi * np.cosh(t) / np.cosh(u) ** 2
    else:
        node = np.exp(u)
        gap = node
        w = step * 0.5 * math.pi * np.cosh(t) * node
    return node, gap, w


def _restricted_inner_2d(spec, func, v, lo, hi, step, offset):
    """int over {lo <= |y| < hi} of func(v, a x) f(x) dx, a = v^(1/gamma), p = 2."""
    comp = spec.components[0]
    a = v ** (1.0 / comp.gamma)
    if v >= hi:
        return 0.0
    x_lo = math.sqrt(max(lo * lo - v * v, 0.0)) / a
    x_hi = math.sqrt(hi * hi - v * v) / a if math.isfinite(hi) else math.inf
    if math.isfinite(x_hi):
        node, gap, w = _de_interval_rule(step, offset, True)
        half = 0.5 * (x_hi - x_lo)
        x = np.where(node < 0, x_lo + half * gap, x_hi - half * gap)
        w = w * half
    else:
        node, _, w = _de_interval_rule(step, offset, False)
        x = x_lo + node
    pts = np.empty((x.size, 2))
    pts[:, 0] = v
    pts[:, 1] = a * x
    flip = pts.copy()
    flip[:, 1] *= -1.0
    vals = np.asarray(func(pts)) + np.asarray(func(flip))
    return np.dot(vals, w * symmetric_stable_pdf(comp, x))


def density_integral(spec: MixtureSpec, func, norm_range=(0.0, math.inf),
                     v_range=(0.0, math.inf), step: float | None = None,
                     complex_valued: bool = False, epsabs: float = 1e-10,
                     epsrel: float = 1e-9):
    """int func(y) h(y) dy over {lo <= |y| < hi} with y1 inside ``v_range``.

    Fubini over y1 = v: the transverse coordinates are written
    y_{r+1} = v^{1/gamma_r} x_r, which turns h dy into
    v^{-(alpha+1)} g(v) prod f_r(x_r) dx dv. The x-integrals use a
    sinh-sinh product rule, the v-integral adaptive vector quadrature in log v.

    h is invariant under y_rest -> -y_rest and the inner integral is taken
    symmetrically, so ``func`` is averaged over that flip. This is what makes
    e.g. int (exp(i<t,y>) - 1) h dy meaningful when int min(1,|y|) h dy = inf.

    The inner error is estimated by a second rule shifted by half a step;
    the value is the mean of both. The rule is meant for non-oscillatory
    integrands; see density_log_char_fn for Fourier-type ones.

    For p = 2 a norm restriction is resolved exactly: for fixed v it is an
    interval condition on |x| and each piece gets its own DE rule. For
    p >= 3 it enters as an indicator, which the error estimate reflects.
    ``func`` maps an (n, p) array of points to n values. Returns (value, error).
    """
    p = spec.dim
    if step is None:
        step = 1 / 32 if p == 2 else 1 / 16
    lo, hi = norm_range
    restricted = lo > 0 or math.isfinite(hi)
    xa, wa = _product_rule(spec, step, 0.0)
    xb, wb = _product_rule(spec, step, 0.5)
    xs = np.vstack([xa, xb])
    wfine = np.concatenate([wa, np.zeros_like(wb)])
    wcoarse = np.concatenate([np.zeros_like(wa), wb])
    gam = spec.gammas

    def inner(w):
        v = math.exp(w)
        weight = v ** -spec.alpha * float(spec.g(v))
        if weight == 0.0:
            return np.zeros(4 if complex_valued else 2)
        if restricted and p == 2:
            fine = weight * _restricted_inner_2d(spec, func, v, lo, hi, step, 0.0)
            crude = weight * _restricted_inner_2d(spec, func, v, lo, hi, step, 0.5)
            if complex_valued:
                return np.array([fine.real, fine.imag, crude.real, crude.imag])
            return np.array([fine, crude])
        pts = np.empty((xs.shape[0], p))
        pts[:, 0] = v
        pts[:, 1:] = xs * v ** (1.0 / gam)
        flip = pts.copy()
        flip[:, 1:] *= -1.0
        vals = 0.5 * (np.asarray(func(pts)) + np.asarray(func(flip)))
        if restricted:
            nrm = np.sqrt(np.sum(pts ** 2, axis=1))
            vals = np.where((nrm >= lo) & (nrm < hi), vals, 0.0)
        fine = weight * np.dot(vals, wfine)
        crude = weight * np.dot(vals, wcoarse)
        if complex_valued:
            return np.array([fine.real, fine.imag, crude.real, crude.imag])
        return np.array([fine, crude])

    # log v is clipped to [-700, 230] so points stay finite; outside that
    # range the measure carries O(e^{-700(1-alpha)}) resp. O(e^{-230 alpha}) mass
    a = _W_MIN if v_range[0] <= 0 else max(math.log(v_range[0]), _W_MIN)
    b = _W_MAX if not math.isfinite(v_range[1]) else min(math.log(v_range[1]), _W_MAX)
    if a >= b:
        return (0j if complex_valued else 0.0), 0.0
    pieces = [a, b]
    for edge in (lo, hi):
        if 0 < edge < math.inf and a < math.log(edge) < b:
            pieces.insert(-1, math.log(edge))
    total = np.zeros(4 if complex_valued else 2)
    err = 0.0
    for left, right in zip(pieces[:-1], pieces[1:]):
        val, e = integrate.quad_vec(inner, left, right, epsabs=epsabs, epsrel=epsrel, limit=400)
        total += val
        err += float(e)
    if complex_valued:
        ra, rb = complex(total[0], total[1]), complex(total[2], total[3])
    else:
        ra, rb = float(total[0]), float(total[1])
    return 0.5 * (ra + rb), err + abs(ra - rb)


@lru_cache(maxsize=8)
def _ooura_cos_nodes(h: float, t_lo: float = -6.0, t_hi: float = 6.0):
    """Double-exponential nodes for int_0^inf f(x) cos(w x) dx (Ooura-Mori).

    With x = M phi(t) / w, M = pi / h, the shifted trapezoid points
    t_k = (k - 1/2) h make M phi(t_k) approach the zeros of cos.
    """
    M = math.pi / h
    beta = 0.25
    alpha = beta / math.sqrt(1.0 + M * math.log1p(M) / (4.0 * math.pi))
    k = np.arange(math.floor(t_lo / h), math.ceil(t_hi / h) + 1)
    t = (k - 0.5) * h
    u = 2.0 * t + alpha * (1.0 - np.exp(-t)) + beta * np.expm1(t)
    du = 2.0 + alpha * np.exp(-t) + beta * np.exp(t)
    one_m = -np.expm1(-u)
    phi = t / one_m
    dphi = (one_m - t * np.exp(-u) * du) / one_m ** 2
    return M * phi, np.cos(M * phi) * dphi


@lru_cache(maxsize=4)
def _gl(n: int):
    return np.polynomial.legendre.leggauss(n)


def _panel_nodes(edges, n: int = 24):
    """Gauss-Legendre nodes and weights on consecutive panels."""
    z, w = _gl(n)
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1, None], edges[1:, None]
    return (0.5 * (b - a) * z + 0.5 * (a + b)).ravel(), (0.5 * (b - a) * w).ravel()


def _stable_one_minus_cos(comp: StableParams, omega: float, h: float) -> float:
    """D(omega) = int (1 - cos(omega x)) f(x) dx from the density f of ``comp``.

    omega >= 1: Ooura-Mori rule for the cosine transform. Smaller omega: the
    range [0, X], X = 2 pi / omega, is done with 2 sin^2(omega x / 2) on
    geometric Gauss-Legendre panels (no cancellation as omega -> 0); past X
    the integrand is (tail mass) - cosine transform of f(X + s), which needs
    no phase shift because omega X = 2 pi.
    """
    if omega == 0.0:
        return 0.0
    mphi, wt = _ooura_cos_nodes(h)
    if omega >= 1.0:
        phi = 2.0 * math.pi / omega * np.dot(symmetric_stable_pdf(comp, mphi / omega), wt)
        return float(1.0 - phi)
    X = 2.0 * math.pi / omega
    n_geo = max(1, math.ceil(math.log2(X)))
    edges = np.concatenate([[0.0, 0.5], np.minimum(2.0 ** np.arange(0, n_geo + 1), X)])
    edges = np.unique(edges)
    x, w = _panel_nodes(edges)
    head = np.dot(2.0 * np.sin(0.5 * omega * x) ** 2 * symmetric_stable_pdf(comp, x), w)
    xt, wt_mass = _panel_nodes(X * 2.0 ** np.arange(0, 61), 16)
    mass = np.dot(symmetric_stable_pdf(comp, xt), wt_mass)
    cos_tail = math.pi / omega * np.dot(symmetric_stable_pdf(comp, X + mphi / omega), wt)
    return float(2.0 * (head + mass - cos_tail))


def density_log_char_fn(spec: MixtureSpec, t, tol: float = 1e-6):
    """int (exp(i<t,y>) - 1) h(y) dy computed from the Levy density alone.

    Iterated integral: for fixed y1 = v the transverse Fourier integrals of
    the stable densities are done with a double-exponential Fourier rule at
    two step sizes (their gap is the inner error estimate); the v-integral
    is adaptive, Fourier-weighted past v = 1. Independent of the closed-form
    transverse characteristic function used by mixture_log_char_fn.
    Returns (value, error).
    """
    t = np.asarray(t, dtype=float)
    if t.shape != (spec.dim,):
        raise ValueError(f"t must have length {spec.dim}")
    a, g = spec.alpha, spec.g
    t1 = float(t[0])
    steps = (1.0 / 16.0, 1.0 / 32.0)

    @lru_cache(maxsize=None)
    def transverse(v: float) -> tuple:
        """1 - prod_r Phi_r at both step sizes, kept small near v = 0."""
        out = []
        for h in steps:
            log_prod = 0.0
            for r, comp in enumerate(spec.components):
                d = _stable_one_minus_cos(comp, abs(t[r + 1]) * v ** (1.0 / comp.gamma), h)
                log_prod += math.log1p(-d) if d < 1.0 else -math.inf
            out.append(-math.expm1(log_prod))
        return tuple(out)

    def head(s):
        # s = v^(1-alpha) as in mixture_log_char_fn; bracket ~ v near 0
        if s == 0.0:
            return np.zeros(4)
        v = s ** (1.0 / (1.0 - a))
        if v == 0.0:
            return np.zeros(4)
        e = complex(math.cos(t1 * v), math.sin(t1 * v))
        em1 = _cexpm1(complex(0.0, t1 * v))
        scale = float(g(v)) / v / (1.0 - a)
        res = []
        for dp in transverse(v):
            val = (em1 - e * dp) * scale
            res += [val.real, val.imag]
        return np.array(res)

    head_val, head_err = integrate.quad_vec(head, 0.0, 1.0, epsabs=tol / 100, epsrel=1e-10, limit=400)
    err = float(head_err)

    minus, e3 = integrate.quad(lambda v: v ** (-a - 1.0) * float(g(v)), 1.0, np.inf, limit=400)
    err += e3
    tails = []
    for i in range(2):
        amp = lambda v, i=i: (1.0 - transverse(float(v))[i]) * v ** (-a - 1.0) * float(g(v))
        if t1 == 0.0:
            re, e4 = integrate.quad(amp, 1.0, np.inf, limit=400)
            im, e5 = 0.0, 0.0
        else:
            re, e4 = integrate.quad(amp, 1.0, np.inf, weight="cos", wvar=abs(t1), limlst=200)
            im, e5 = integrate.quad(amp, 1.0, np.inf, weight="sin", wvar=abs(t1), limlst=200)
            im *= math.copysign(1.0, t1)
        err += e4 + e5
        tails.append(complex(re, im))
    coarse = complex(head_val[0], head_val[1]) + tails[0] - minus
    fine = complex(head_val[2], head_val[3]) + tails[1] - minus
    err += abs(fine - coarse)
    if not np.isfinite(err) or err > tol * max(1.0, abs(fine)):
        raise QuadratureFailure(f"density route error estimate {err:.2e} exceeds {tol:.1e}")
    return fine, err


# ----------------------------------------------------------------------------
# sampling
# ----------------------------------------------------------------------------

_CP_EPS = 1e-3


def v_sampler_info(spec: MixtureSpec, eps: float = _CP_EPS) -> dict:
    """Which sampler mixture_sample uses for V, with a bias bound when approximate."""
    g, a = spec.g, spec.alpha
    if isinstance(g, (ExpDecay, Constant)):
        if g.rate == 0:
            return {"method": "positive_stable", "exact": True, "bias_bound": 0.0}
        if a == 0:
            return {"method": "gamma", "exact": True, "bias_bound": 0.0}
        if a == 0.5:
            return {"method": "inverse_gaussian", "exact": True, "bias_bound": 0.0}
        k = g.level * special.gamma(1.0 - a) / a
        accept = math.exp(-k * g.rate ** a)
        if accept >= 1e-3:
            return {"method": "tempered_stable_rejection", "exact": True,
                    "bias_bound": 0.0, "acceptance": accept}
    return {"method": "compound_poisson_approx", "exact": False, "eps": eps,
            "bias_bound": eps ** (1.0 - a) * g.sup / (1.0 - a)}


def _sample_v_cp(spec: MixtureSpec, n: int, rng, eps: float) -> np.ndarray:
    """Jumps of size >= eps exactly, smaller ones replaced by their mean."""
    a, g = spec.alpha, spec.g
    heavy = g.tail_is_heavy()
    if isinstance(g, TabulatedDecreasing):
        v_max = max(g.v[-1], eps * 10)
    else:
        v_max = max(eps * 10, 40.0 / max(g.rate, 1e-300))
    w = np.linspace(math.log(eps), math.log(v_max), 4001)
    v = np.exp(w)
    dens = v ** -a * g(v)  # v^{-(a+1)} g(v) dv = v^{-a} g(v) dw
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(w))])
    body = cum[-1]
    tail = g(v_max) * v_max ** -a / a if heavy else 0.0
    rate = body + tail
    small_mean, _ = integrate.quad(lambda s: s ** -a * float(g(s)), 0.0, eps)
    counts = rng.poisson(rate, size=n)
    total = int(counts.sum())
    u = rng.uniform(0.0, rate, size=total)
    jumps = np.empty(total)
    in_body = u < body
    jumps[in_body] = np.exp(np.interp(u[in_body], cum, w))
    if heavy:
        # Pareto tail with constant g beyond v_max
        q = (u[~in_body] - body) / tail
        jumps[~in_body] = v_max * (1.0 - q) ** (-1.0 / a)
    row = np.repeat(np.arange(n), counts)
    return small_mean + np.bincount(row, weights=jumps, minlength=n)


def _sample_v(spec: MixtureSpec, n: int, rng, allow_approx: bool, eps: float) -> np.ndarray:
    info = v_sampler_info(spec, eps)
    g, a = spec.g, spec.alpha
    method = info["method"]
    if method == "positive_stable":
        # Laplace exponent level * Gamma(1-a)/a * s^a
        c = (g.level * special.gamma(1.0 - a) / a) ** (1.0 / a)
        return c * sample_positive_stable(a, n, rng)
    if method == "gamma":
        return rng.gamma(g.level, 1.0 / g.rate, size=n)
    if method == "inverse_gaussian":
        return sample_gig(GIGParams(-0.5, 2.0 * math.pi * g.level ** 2, 2.0 * g.rate), n, rng)
    if method == "tempered_stable_rejection":
        c = (g.level * special.gamma(1.0 - a) / a) ** (1.0 / a)
        out = np.empty(n)
        filled = 0
        while filled < n:
            k = max(int((n - filled) / info["acceptance"] * 1.1), 64)
            y = c * sample_positive_stable(a, k, rng)
            ok = rng.uniform(size=k) <= np.exp(-g.rate * y)
            acc = y[ok][: n - filled]
            out[filled:filled + acc.size] = acc
            filled += acc.size
        return out
    if not allow_approx:
        raise UnsupportedMixing("no exact V sampler for this g family; enable approximation")
    return _sample_v_cp(spec, n, rng, eps)


def mixture_sample(spec: MixtureSpec, n: int, seed=None, allow_approx: bool = True,
                   eps: float = _CP_EPS) -> np.ndarray:
    """n draws of Z as an (n, p) array; deterministic given ``seed``."""
    rng = as_generator(seed)
    v = _sample_v(spec, n, rng, allow_approx, eps)
    out = np.empty((n, spec.dim))
    out[:, 0] = v
    for r, comp in enumerate(spec.components):
        out[:, r + 1] = v ** (1.0 / comp.gamma) * sample_symmetric_stable(comp, n, rng)
    return out


# ----------------------------------------------------------------------------
# generalized hyperbolic
# ----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GHSpec:
    mu: np.ndarray
    beta: np.ndarray
    delta: np.ndarray
    mixing: GIGParams
    _chol: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mu = np.atleast_1d(np.asarray(self.mu, dtype=float))
        beta = np.atleast_1d(np.asarray(self.beta, dtype=float))
        delta = np.atleast_2d(np.asarray(self.delta, dtype=float))
        n = mu.size
        if beta.shape != (n,) or delta.shape != (n, n):
            raise ValueError("mu, beta, delta dimensions disagree")
        if not np.allclose(delta, delta.T, atol=1e-12):
            raise CholeskyFailure("Delta must be symmetric")
        try:
            chol = np.linalg.cholesky(delta)
        except np.linalg.LinAlgError as exc:
            raise CholeskyFailure("Delta is not positive definite") from exc
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "_chol", chol)

    @property
    def dim(self) -> int:
        return self.mu.size

    @property
    def drift_direction(self) -> np.ndarray:
        """beta Delta (row vector times matrix)."""
        return self.beta @ self.delta

    def to_dict(self) -> dict:
        return {"mu": self.mu.tolist(), "beta": self.beta.tolist(),
                "delta": self.delta.tolist(), "mixing": self.mixing.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "GHSpec":
        return cls(np.asarray(d["mu"], float), np.asarray(d["beta"], float),
                   np.asarray(d["delta"], float), GIGParams.from_dict(d["mixing"]))


def gh_sample(spec: GHSpec, n: int, seed=None) -> np.ndarray:
    rng = as_generator(seed)
    u = sample_gig(spec.mixing, n, rng)
    z = rng.standard_normal(size=(n, spec.dim)) @ spec._chol.T
    return spec.mu + u[:, None] * spec.drift_direction + np.sqrt(u)[:, None] * z


def gh_char_fn(spec: GHSpec, t) -> complex:
    """exp(i<t, mu>) E exp(U (i <t, beta Delta> - t' Delta t / 2))."""
    t = np.asarray(t, dtype=float)
    s = 1j * float(t @ spec.drift_direction) - 0.5 * float(t @ spec.delta @ t)
    return complex(np.exp(1j * float(t @ spec.mu)) * gig_mgf(spec.mixing, s))


@dataclass(frozen=True)
class GHRepresentation:
    """W = shift + linear_map @ Z with Z distributed per ``spec``."""

    spec: MixtureSpec
    shift: np.ndarray
    linear_map: np.ndarray


def gh_as_mixture_spec(spec: GHSpec) -> GHRepresentation:
    """Rewrite a diagonal-Delta GH law through the (V, V^{1/2} X_r) family.

    Representable mixings: gamma (xi = 0, alpha = 0) and inverse Gaussian
    (lambda = -1/2, alpha = 1/2), both with g(v) = level * exp(-psi v / 2).
    """
    d = spec.delta
    off = d - np.diag(np.diag(d))
    if np.any(np.abs(off) > 1e-12 * np.max(np.abs(d))):
        raise NotRepresentable("Delta must be diagonal for the independent-component form")
    mix = spec.mixing
    if mix.xi == 0:
        alpha, g = 0.0, ExpDecay(mix.psi / 2.0, mix.lambda_idx)
    elif mix.lambda_idx == -0.5:
        alpha = 0.5
        level = math.sqrt(mix.xi / (2.0 * math.pi))
        g = ExpDecay(mix.psi / 2.0, level) if mix.psi > 0 else Constant(level)
    else:
        raise NotRepresentable("only gamma and inverse Gaussian mixing have a Levy density "
                               "of the form v^-(alpha+1) level exp(-rate v)")
    comps = tuple(StableParams(2.0, float(dd) / 2.0) for dd in np.diag(d))
    mspec = MixtureSpec(alpha, g, comps)
    lin = np.hstack([spec.drift_direction[:, None], np.eye(spec.dim)])
    return GHRepresentation(mspec, spec.mu.copy(), lin)
