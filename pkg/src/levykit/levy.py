"""
Levy triplets (a, Q, nu), their measures, truncation split and ch.f.

The characteristic function uses the compensator i<u,x>/(1+|x|^2):

    phi(u) = exp{ i<a,u> - u'Qu/2 + int (e^{i<u,x>} - 1 - i<u,x>/(1+|x|^2)) dnu }.

Truncating at tau puts the jumps with |x| >= tau into a finite measure nu1
(compound Poisson part) and shifts the drift to b accordingly.

Measure variants
----------------
AtomicMeasure
    Finitely many weighted points; every integral is an exact sum.
LawMeasure
    ``rate`` times the law of (V^e_1, ..., V^e_p) for a scalar positive law
    V, optionally restricted to a norm shell. Covers the "transform of a
    scalar law" measures such as (V, 1/V) with V = |Cauchy|.
MixtureMeasure
    Levy density h of a MixtureSpec, optionally restricted to a norm shell.
TabulatedMeasure
    Density values on grid points times a cell volume (Riemann sum).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate, optimize, special as sps

from .errors import (
    NonFiniteInput,
    QuadratureFailure,
    TauNonPositive,
    UnsupportedMixing,
)
from .mixtures import (
    MixtureSpec,
    density_integral,
    mixture_log_char_fn,
)
from .special import as_generator, positive_stable_pdf, sample_positive_stable

__all__ = [
    "AbsCauchy",
    "SqrtAbsCauchy",
    "PositiveStable",
    "law_from_dict",
    "AtomicMeasure",
    "LawMeasure",
    "MixtureMeasure",
    "TabulatedMeasure",
    "measure_from_dict",
    "LevyTriplet",
    "ValidationReport",
    "TruncationSplit",
    "validate_triplet",
    "split_truncate",
    "char_fn",
    "char_fn_from_split",
    "sample_triplet",
    "box_doubling_diverges",
]

_INF = math.inf


def _levy_weight(x: np.ndarray) -> np.ndarray:
    n2 = np.sum(x * x, axis=-1)
    return n2 / (1.0 + n2)


# ----------------------------------------------------------------------------
# scalar laws on (0, inf)
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class AbsCauchy:
    """|C| with C standard Cauchy; E V^s < inf iff -1 < s < 1."""

    moment_bounds = (-1.0, 1.0)

    def pdf(self, v):
        v = np.asarray(v, dtype=float)
        with np.errstate(over="ignore"):
            return 2.0 / (math.pi * (1.0 + v * v))

    def sample(self, n, rng):
        return np.abs(rng.standard_cauchy(size=n))

    def moment(self, s: float) -> float:
        lo, hi = self.moment_bounds
        return 1.0 / math.cos(0.5 * math.pi * s) if lo < s < hi else _INF

    def to_dict(self):
        return {"law": "abs_cauchy"}


@dataclass(frozen=True)
class SqrtAbsCauchy:
    """V with V^2 = |C|; E V^s < inf iff -2 < s < 2."""

    moment_bounds = (-2.0, 2.0)

    def pdf(self, v):
        v = np.asarray(v, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            out = 4.0 * v / (math.pi * (1.0 + v ** 4))
        return np.where(np.isfinite(v), out, 0.0)

    def sample(self, n, rng):
        return np.sqrt(np.abs(rng.standard_cauchy(size=n)))

    def moment(self, s: float) -> float:
        lo, hi = self.moment_bounds
        return 1.0 / math.cos(0.25 * math.pi * s) if lo < s < hi else _INF

    def to_dict(self):
        return {"law": "sqrt_abs_cauchy"}


@dataclass(frozen=True)
class PositiveStable:
    """Positive stable V_gamma with E exp(-s V) = exp(-s^gamma); E V^s < inf iff s < gamma."""

    gamma: float

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("positive stable index must lie in (0, 1)")

    @property
    def moment_bounds(self):
        return (-_INF, self.gamma)

    def pdf(self, v):
        return positive_stable_pdf(self.gamma, v)

    def sample(self, n, rng):
        return sample_positive_stable(self.gamma, n, rng)

    def moment(self, s: float) -> float:
        if s >= self.gamma:
            return _INF
        return float(sps.gamma(1.0 - s / self.gamma) / sps.gamma(1.0 - s))

    def to_dict(self):
        return {"law": "positive_stable", "gamma": self.gamma}


def law_from_dict(d: dict):
    name = d["law"]
    if name == "abs_cauchy":
        return AbsCauchy()
    if name == "sqrt_abs_cauchy":
        return SqrtAbsCauchy()
    if name == "positive_stable":
        return PositiveStable(float(d["gamma"]))
    raise ValueError(f"unknown scalar law {name!r}")


# ----------------------------------------------------------------------------
# measures
# ----------------------------------------------------------------------------

def _check_range(lo, hi):
    if not (0.0 <= lo < hi):
        raise ValueError(f"bad norm range [{lo}, {hi})")


class _FiniteSumMixin:
    """Shared exact-sum operations for atom-like measures."""

    def _atoms(self):
        raise NotImplementedError

    @property
    def is_finite(self) -> bool:
        return True

    def mass(self):
        _, w = self._atoms()
        return float(np.sum(w)), 0.0

    def integrate(self, func, complex_valued=False):
        x, w = self._atoms()
        if w.size == 0:
            return (0j if complex_valued else 0.0), 0.0
        return np.dot(np.asarray(func(x)), w), 0.0

    def fourier(self, u, kind):
        x, w = self._atoms()
        u = np.asarray(u, dtype=float)
        if w.size == 0:
            return 0j, 0.0
        ux = x @ u
        if kind == "exp":
            f = np.exp(1j * ux)
        elif kind == "small":
            f = np.expm1(1j * ux) - 1j * ux
        elif kind == "compensated":
            f = np.expm1(1j * ux) - 1j * ux / (1.0 + np.sum(x * x, axis=1))
        else:
            raise ValueError(kind)
        return complex(np.dot(f, w)), 0.0

    def sample_jumps(self, k, rng):
        x, w = self._atoms()
        idx = rng.choice(w.size, size=k, p=w / w.sum())
        return x[idx]


@dataclass(frozen=True, eq=False)
class AtomicMeasure(_FiniteSumMixin):
    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.points, dtype=float)
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if w.size == 0:
            # keep the column count of an empty (0, p) array
            pts = raw.reshape(0, raw.shape[-1] if raw.ndim == 2 and raw.shape[-1] else 1)
        else:
            pts = np.atleast_2d(raw)
        if pts.shape[0] != w.size:
            raise ValueError("points and weights disagree in length")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @classmethod
    def empty(cls, dim: int) -> "AtomicMeasure":
        return cls(np.zeros((0, dim)), np.zeros(0))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def _atoms(self):
        return self.points, self.weights

    def restrict(self, lo=0.0, hi=_INF) -> "AtomicMeasure":
        _check_range(lo, hi)
        nrm = np.linalg.norm(self.points, axis=1)
        keep = (nrm >= lo) & (nrm < hi)
        return AtomicMeasure(self.points[keep], self.weights[keep])

    def violations(self) -> list:
        out = []
        if np.any(self.weights <= 0):
            out.append("nonpositive atom weight")
        if self.weights.size and np.any(np.linalg.norm(self.points, axis=1) <= 1e-15):
            out.append("mass at origin")
        return out

    def to_dict(self):
        return {"variant": "atomic",
                "points": [[float(v) for v in row] for row in self.points],
                "weights": [float(v) for v in self.weights]}


@dataclass(frozen=True, eq=False)
class TabulatedMeasure(_FiniteSumMixin):
    """Density values on grid points; measure of a point = density * cell_volume."""

    grid: np.ndarray
    density: np.ndarray
    cell_volume: float

    def __post_init__(self):
        grid = np.atleast_2d(np.asarray(self.grid, dtype=float))
        dens = np.atleast_1d(np.asarray(self.density, dtype=float))
        if grid.shape[0] != dens.size:
            raise ValueError("grid and density disagree in length")
        if not self.cell_volume > 0:
            raise ValueError("cell volume must be positive")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "density", dens)

    @property
    def dim(self) -> int:
        return self.grid.shape[1]

    def _atoms(self):
        keep = self.density > 0
        return self.grid[keep], self.density[keep] * self.cell_volume

    def restrict(self, lo=0.0, hi=_INF) -> "TabulatedMeasure":
        _check_range(lo, hi)
        nrm = np.linalg.norm(self.grid, axis=1)
        keep = (nrm >= lo) & (nrm < hi)
        return TabulatedMeasure(self.grid[keep], self.density[keep], self.cell_volume)

    def violations(self) -> list:
        out = []
        if np.any(self.density < 0):
            out.append("negative density value")
        if np.any((np.linalg.norm(self.grid, axis=1) <= 1e-15) & (self.density > 0)):
            out.append("mass at origin")
        return out

    def to_dict(self):
        return {"variant": "tabulated",
                "grid": [[float(v) for v in row] for row in self.grid],
                "density": [float(v) for v in self.density],
                "cell_volume": float(self.cell_volume)}


def box_doubling_diverges(measure: TabulatedMeasure, func=_levy_weight) -> bool:
    """Operational divergence rule for tabulated densities (heuristic).

    Partial integrals over the boxes max|x_r| <= R_max / 2^k, k = 2, 1, 0;
    divergence is declared when each of the two last doublings grows the
    partial integral by more than 1%.
    """
    x, w = measure._atoms()
    if w.size == 0:
        return False
    box = np.max(np.abs(x), axis=1)
    r_max = box.max()
    vals = np.asarray(func(x)) * w
    partial = [vals[box <= r_max / 2 ** k].sum() for k in (2, 1, 0)]
    grew = [partial[i] > 0 and partial[i + 1] > 1.01 * partial[i] for i in range(2)]
    return all(grew)


# ----------------------------------------------------------------------------
# LawMeasure
# ----------------------------------------------------------------------------

def _sublevel(e: np.ndarray, c: float):
    """{w : sum exp(2 e_r w) < c^2} as an interval (w_a, w_b) in log v, or None.

    N(w) = sum exp(2 e_r w) is convex, so sublevel sets are intervals.
    """
    c2 = c * c
    N = lambda w: float(np.sum(np.exp(np.clip(2.0 * e * w, -700, 700))))
    pos, neg = bool(np.any(e > 0)), bool(np.any(e < 0))
    n0 = float(np.sum(e == 0))
    if not pos and not neg:
        return (-_INF, _INF) if n0 < c2 else None
    if pos and neg:
        dN = lambda w: float(np.sum(2.0 * e * np.exp(np.clip(2.0 * e * w, -700, 700))))
        lo, hi = -1.0, 1.0
        while dN(lo) > 0:
            lo *= 2
        while dN(hi) < 0:
            hi *= 2
        inside = optimize.brentq(dN, lo, hi, xtol=1e-14)
        if N(inside) >= c2:
            return None
    else:
        # monotone N with limit n0 at one end
        if n0 >= c2:
            return None
        inside, step = 0.0, 1.0
        while N(inside) >= c2:
            inside += -step if pos else step
            step *= 2

    def edge(direction):
        if (direction < 0 and not neg) or (direction > 0 and not pos):
            return direction * _INF
        step = 1.0
        while N(inside + direction * step) < c2:
            step *= 2
        a, b = sorted((inside, inside + direction * step))
        return optimize.brentq(lambda w: N(w) - c2, a, b, xtol=1e-14)

    return edge(-1.0), edge(1.0)


def _shell_intervals(e: np.ndarray, lo: float, hi: float):
    """v-intervals where lo <= |(v^e_r)| < hi."""
    outer = (-_INF, _INF) if not math.isfinite(hi) else _sublevel(e, hi)
    if outer is None:
        return []
    inner = _sublevel(e, lo) if lo > 0 else None
    pieces = []
    if inner is None:
        pieces = [outer]
    else:
        if outer[0] < inner[0]:
            pieces.append((outer[0], inner[0]))
        if inner[1] < outer[1]:
            pieces.append((inner[1], outer[1]))
    return [(0.0 if a == -_INF else math.exp(a), _INF if b == _INF else math.exp(b))
            for a, b in pieces]


_LAW_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class LawMeasure:
    """rate * law of x(V) = (V^e_1, ..., V^e_p), restricted to lo <= |x| < hi."""

    rate: float
    law: object
    exponents: np.ndarray
    norm_range: tuple = (0.0, _INF)

    def __post_init__(self):
        e = np.atleast_1d(np.asarray(self.exponents, dtype=float))
        object.__setattr__(self, "exponents", e)
        if not self.rate > 0:
            raise ValueError("rate must be positive")
        lo, hi = self.norm_range
        _check_range(lo, hi)
        object.__setattr__(self, "norm_range", (float(lo), float(hi)))

    @property
    def dim(self) -> int:
        return self.exponents.size

    @property
    def is_finite(self) -> bool:
        return True

    @cached_property
    def intervals(self):
        return _shell_intervals(self.exponents, *self.norm_range)

    def point(self, v):
        v = np.atleast_1d(np.asarray(v, dtype=float))
        return v[:, None] ** self.exponents[None, :]

    def restrict(self, lo=0.0, hi=_INF) -> "LawMeasure":
        _check_range(lo, hi)
        a, b = self.norm_range
        lo2, hi2 = max(lo, a), min(hi, b)
        if lo2 >= hi2:
            lo2, hi2 = 0.0, 0.0 + 1e-300  # empty shell
        return LawMeasure(self.rate, self.law, self.exponents, (lo2, hi2))

    def _quad_v(self, f, a, b):
        """int_a^b f(v) pdf(v) dv in w = log v."""
        def g(w):
            dens = float(self.law.pdf(math.exp(w)))
            # a vanishing density wins over an overflowing integrand
            return 0.0 if dens == 0.0 else f(math.exp(w)) * dens * math.exp(w)
        # |e| |log v| <= 300 keeps |x|^2 finite; the law mass outside is negligible
        w_cap = 300.0 / max(1.0, float(np.max(np.abs(self.exponents))))
        wa = -w_cap if a == 0.0 else max(math.log(a), -w_cap)
        wb = w_cap if b == _INF else min(math.log(b), w_cap)
        if wa >= wb:
            return 0.0, 0.0
        val, err = integrate.quad(g, wa, wb, limit=500, epsabs=_LAW_TOL, epsrel=1e-11)
        return val, err

    def integrate(self, func, complex_valued=False):
        if complex_valued:
            re, e1 = self.integrate(lambda x: np.real(func(x)))
            im, e2 = self.integrate(lambda x: np.imag(func(x)))
            return complex(re, im), e1 + e2
        total, err = 0.0, 0.0
        for a, b in self.intervals:
            f = lambda v: float(np.asarray(func(self.point(v)))[0])
            val, e = self._quad_v(f, a, b)
            total += val
            err += e
        return self.rate * total, self.rate * err

    def mass(self):
        total, err = 0.0, 0.0
        for a, b in self.intervals:
            val, e = self._quad_v(lambda v: 1.0, a, b)
            total += val
            err += e
        return self.rate * total, self.rate * err

    def _oscillatory(self, u, a, b):
        """int_a^b exp(i<u, x(v)>) pdf(v) dv; Fourier-weighted at infinite ends."""
        e = self.exponents
        pdf = lambda v: float(self.law.pdf(v))
        phase = lambda v: float(np.dot(u, v ** e))
        total, err = 0j, 0.0

        def plain(lo_v, hi_v):
            re, e1 = self._quad_v(lambda v: math.cos(phase(v)), lo_v, hi_v)
            im, e2 = self._quad_v(lambda v: math.sin(phase(v)), lo_v, hi_v)
            return complex(re, im), e1 + e2

        def tail(lo_v, hi_v, upper):
            active = (u != 0) & ((e > 0) if upper else (e < 0))
            if not np.any(active):
                return plain(lo_v, hi_v)
            lead = e[active].max() if upper else e[active].min()
            top = active & (e == lead)
            omega = float(np.sum(u[top]))
            rest = active & ~top
            if omega == 0.0 or np.any(rest):
                raise QuadratureFailure("more than one oscillating phase at a tail")
            keep = ~top
            t0 = (lo_v if upper else hi_v) ** lead

            def amp(t, part):
                v = t ** (1.0 / lead)
                jac = v / (abs(lead) * t)
                ph = float(np.dot(u[keep], v ** e[keep]))
                c = pdf(v) * jac
                return c * (math.cos(ph) if part == 0 else math.sin(ph))

            w = abs(omega)
            sgn = math.copysign(1.0, omega)
            acc, e_acc = 0j, 0.0
            for part in (0, 1):
                cpart, ec = integrate.quad(amp, t0, _INF, args=(part,), weight="cos",
                                           wvar=w, limlst=200)
                spart, es = integrate.quad(amp, t0, _INF, args=(part,), weight="sin",
                                           wvar=w, limlst=200)
                # exp(i omega t) * (A_re + i A_im)
                if part == 0:
                    acc += complex(cpart, sgn * spart)
                else:
                    acc += complex(-sgn * spart, cpart)
                e_acc += ec + es
            return acc, e_acc

        lo_cut = min(b, 1.0) if a == 0.0 else None
        hi_cut = max(a, 1.0) if b == _INF else None
        mid_a = lo_cut if lo_cut is not None else a
        mid_b = hi_cut if hi_cut is not None else b
        if lo_cut is not None and lo_cut > 0:
            val, er = tail(0.0, lo_cut, upper=False)
            total += val
            err += er
        if mid_a < mid_b:
            val, er = plain(mid_a, mid_b)
            total += val
            err += er
        if hi_cut is not None:
            val, er = tail(hi_cut, _INF, upper=True)
            total += val
            err += er
        return total, err

    def fourier(self, u, kind):
        u = np.asarray(u, dtype=float)
        F, err = 0j, 0.0
        for a, b in self.intervals:
            val, e = self._oscillatory(u, a, b)
            F += val
            err += e
        F *= self.rate
        err *= self.rate
        if kind == "exp":
            return F, err
        m, em = self.mass()
        if kind == "small":
            lin, el = self.integrate(lambda x: x @ u)
        elif kind == "compensated":
            lin, el = self.integrate(lambda x: (x @ u) / (1.0 + np.sum(x * x, axis=1)))
        else:
            raise ValueError(kind)
        return F - m - 1j * lin, err + em + el

    def sample_jumps(self, k, rng):
        out = np.empty((0, self.dim))
        while out.shape[0] < k:
            v = self.law.sample(2 * (k - out.shape[0]) + 16, rng)
            x = self.point(v)
            nrm = np.linalg.norm(x, axis=1)
            lo, hi = self.norm_range
            out = np.vstack([out, x[(nrm >= lo) & (nrm < hi)]])
        return out[:k]

    def violations(self) -> list:
        return []

    def to_dict(self):
        lo, hi = self.norm_range
        return {"variant": "law", "rate": self.rate, "law": self.law.to_dict(),
                "exponents": self.exponents.tolist(),
                "norm_range": [lo, None if hi == _INF else hi]}


# ----------------------------------------------------------------------------
# MixtureMeasure
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class MixtureMeasure:
    """Levy density h of ``spec`` restricted to lo <= |y| < hi."""

    spec: MixtureSpec
    norm_range: tuple = (0.0, _INF)

    def __post_init__(self):
        lo, hi = self.norm_range
        _check_range(lo, hi)
        object.__setattr__(self, "norm_range", (float(lo), float(hi)))

    @property
    def dim(self) -> int:
        return self.spec.dim

    @property
    def is_finite(self) -> bool:
        return self.norm_range[0] > 0

    @property
    def is_full(self) -> bool:
        return self.norm_range == (0.0, _INF)

    def restrict(self, lo=0.0, hi=_INF) -> "MixtureMeasure":
        _check_range(lo, hi)
        a, b = self.norm_range
        return MixtureMeasure(self.spec, (max(lo, a), min(hi, b)))

    def integrate(self, func, complex_valued=False):
        return density_integral(self.spec, func, norm_range=self.norm_range,
                                complex_valued=complex_valued)

    def mass(self):
        if not self.is_finite:
            return _INF, 0.0
        return self.integrate(lambda y: np.ones(y.shape[0]))

    @cached_property
    def compensator_drift(self):
        """int y/(1+|y|^2) h dy; transverse coordinates vanish by symmetry."""
        val, err = self.integrate(lambda y: y[:, 0] / (1.0 + np.sum(y * y, axis=1)))
        out = np.zeros(self.dim)
        out[0] = val
        return out, err

    def fourier(self, u, kind):
        u = np.asarray(u, dtype=float)
        if kind == "compensated" and self.is_full:
            lv, err = mixture_log_char_fn(self.spec, u)
            a, ea = self.compensator_drift
            return lv - 1j * float(a @ u), err + ea * abs(u[0])
        if kind == "exp":
            f = lambda y: np.exp(1j * (y @ u))
        elif kind == "small":
            f = lambda y: np.expm1(1j * (y @ u)) - 1j * (y @ u)
        elif kind == "compensated":
            f = lambda y: np.expm1(1j * (y @ u)) - 1j * (y @ u) / (1.0 + np.sum(y * y, axis=1))
        else:
            raise ValueError(kind)
        return self.integrate(f, complex_valued=True)

    def sample_jumps(self, k, rng):
        raise UnsupportedMixing("jump sampling from a mixture Levy density is not provided")

    def violations(self) -> list:
        return []

    def to_dict(self):
        lo, hi = self.norm_range
        return {"variant": "mixture", "spec": self.spec.to_dict(),
                "norm_range": [lo, None if hi == _INF else hi]}


def measure_from_dict(d: dict):
    kind = d["variant"]
    if kind == "atomic":
        pts = d["points"]
        dim = d.get("dim", len(pts[0]) if pts else 1)
        arr = np.asarray(pts, dtype=float).reshape(len(pts), dim)
        return AtomicMeasure(arr, np.asarray(d["weights"], dtype=float))
    if kind == "tabulated":
        return TabulatedMeasure(np.asarray(d["grid"], float), np.asarray(d["density"], float),
                                float(d["cell_volume"]))
    rng = d.get("norm_range", [0.0, None])
    nr = (float(rng[0]), _INF if rng[1] is None else float(rng[1]))
    if kind == "law":
        return LawMeasure(float(d["rate"]), law_from_dict(d["law"]),
                          np.asarray(d["exponents"], float), nr)
    if kind == "mixture":
        return MixtureMeasure(MixtureSpec.from_dict(d["spec"]), nr)
    raise ValueError(f"unknown measure variant {kind!r}")


# ----------------------------------------------------------------------------
# triplet
# ----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LevyTriplet:
    drift: np.ndarray
    gaussian_form: np.ndarray
    measure: object

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.drift, dtype=float))
        Q = np.atleast_2d(np.asarray(self.gaussian_form, dtype=float))
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(Q))):
            raise NonFiniteInput("drift and Gaussian form must be finite")
        for arr in (getattr(self.measure, "points", None), getattr(self.measure, "weights", None),
                    getattr(self.measure, "grid", None), getattr(self.measure, "density", None)):
            if arr is not None and not np.all(np.isfinite(arr)):
                raise NonFiniteInput("measure contains non-finite numbers")
        if Q.shape != (a.size, a.size) or self.measure.dim != a.size:
            raise ValueError("drift, Gaussian form and measure dimensions disagree")
        object.__setattr__(self, "drift", a)
        object.__setattr__(self, "gaussian_form", Q)

    @property
    def dim(self) -> int:
        return self.drift.size

    @classmethod
    def compound_poisson(cls, measure, gaussian_form=None) -> "LevyTriplet":
        """Triplet whose ch.f. is exp(int (e^{i<u,x>} - 1) dnu) for a finite nu."""
        if not measure.is_finite:
            raise ValueError("compound Poisson needs a finite measure")
        a, _ = _vector_integral(
            measure, lambda x: x / (1.0 + np.sum(x * x, axis=1))[:, None], measure.dim)
        Q = np.zeros((measure.dim, measure.dim)) if gaussian_form is None else gaussian_form
        return cls(np.atleast_1d(a), Q, measure)

    @classmethod
    def from_mixture(cls, spec: MixtureSpec) -> "LevyTriplet":
        """Triplet of Z: Q = 0 and a = int y/(1+|y|^2) h dy, so phi = mixture_char_fn."""
        m = MixtureMeasure(spec)
        a, _ = m.compensator_drift
        return cls(a, np.zeros((spec.dim, spec.dim)), m)

    def to_dict(self) -> dict:
        return {"dim": self.dim, "drift": self.drift.tolist(),
                "gaussian_form": self.gaussian_form.tolist(),
                "measure": self.measure.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "LevyTriplet":
        meas = dict(d["measure"])
        meas.setdefault("dim", d["dim"])
        return cls(np.asarray(d["drift"], float), np.asarray(d["gaussian_form"], float),
                   measure_from_dict(meas))


@dataclass
class ValidationReport:
    violations: list
    integral: float
    integral_error: float = 0.0
    heuristic: bool = False

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self):
        return {"violations": list(self.violations), "integral": self.integral,
                "integral_error": self.integral_error, "heuristic": self.heuristic}


def validate_triplet(t: LevyTriplet) -> ValidationReport:
    """Structural checks plus the value of int |x|^2/(1+|x|^2) dnu."""
    out = []
    Q = t.gaussian_form
    if np.max(np.abs(Q - Q.T), initial=0.0) > 1e-12:
        out.append("gaussian form not symmetric")
    elif np.min(np.linalg.eigvalsh(0.5 * (Q + Q.T)), initial=0.0) < -1e-10:
        out.append("gaussian form not positive semidefinite")
    meas = t.measure
    out += meas.violations()
    heuristic = False
    try:
        val, err = meas.integrate(_levy_weight)
        val = float(np.real(val))
    except QuadratureFailure:
        val, err = _INF, _INF
    if isinstance(meas, TabulatedMeasure):
        heuristic = True
        if box_doubling_diverges(meas):
            out.append("levy integrability fails (box-doubling heuristic)")
    if not np.isfinite(val):
        out.append("levy integrability fails")
    return ValidationReport(out, val, float(err), heuristic)


@dataclass(frozen=True, eq=False)
class TruncationSplit:
    tau: float
    nu1: object
    nu2: object
    shifted_drift: np.ndarray
    rate: float
    rate_error: float = 0.0
    drift_error: float = 0.0

    @property
    def dim(self) -> int:
        return self.shifted_drift.size


def _vector_integral(meas, func_vec, dim):
    """Componentwise integral of a vector-valued func."""
    if isinstance(meas, (AtomicMeasure, TabulatedMeasure)):
        x, w = meas._atoms()
        if w.size == 0:
            return np.zeros(dim), 0.0
        return w @ func_vec(x), 0.0
    if isinstance(meas, MixtureMeasure):
        # transverse coordinates vanish by symmetry of h
        val, err = meas.integrate(lambda y: func_vec(y)[:, 0])
        out = np.zeros(dim)
        out[0] = val
        return out, err
    vals, errs = [], 0.0
    for r in range(dim):
        v, e = meas.integrate(lambda y, r=r: func_vec(y)[:, r])
        vals.append(v)
        errs += e
    return np.array(vals), errs


def split_truncate(t: LevyTriplet, tau: float = 1.0) -> TruncationSplit:
    """nu1 = nu on |x| >= tau, nu2 = nu on |x| < tau, and the shifted drift

    b = a + int x |x|^2/(1+|x|^2) dnu2 - int x/(1+|x|^2) dnu1.
    """
    if not tau > 0 or not math.isfinite(tau):
        raise TauNonPositive(f"tau must be a positive finite number, got {tau}")
    nu1 = t.measure.restrict(tau, _INF)
    nu2 = t.measure.restrict(0.0, tau)
    rate, rate_err = nu1.mass()
    p = t.dim
    big, e1 = _vector_integral(nu1, lambda x: x / (1.0 + np.sum(x * x, axis=1))[:, None], p)
    small, e2 = _vector_integral(
        nu2, lambda x: x * (np.sum(x * x, axis=1) / (1.0 + np.sum(x * x, axis=1)))[:, None], p)
    b = t.drift + small - big
    return TruncationSplit(float(tau), nu1, nu2, b, float(rate), float(rate_err), float(e1 + e2))


def _check_modulus(val: complex, err: float) -> complex:
    if abs(val) > 1.0 + 1e-9 + err:
        raise QuadratureFailure(f"|phi| = {abs(val)} exceeds 1")
    return val


def char_fn(t: LevyTriplet, u, tol: float = 1e-6, return_error: bool = False):
    """phi(u) from the triplet; QuadratureFailure when the error bound exceeds ``tol``."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    is_empty = isinstance(t.measure, AtomicMeasure) and t.measure.weights.size == 0
    lv, err = (0j, 0.0) if is_empty else t.measure.fourier(u, "compensated")
    if err > tol:
        raise QuadratureFailure(f"log ch.f. error estimate {err:.2e} exceeds {tol:.1e}")
    expo = 1j * float(t.drift @ u) - 0.5 * float(u @ t.gaussian_form @ u) + lv
    val = _check_modulus(complex(np.exp(expo)), err)
    return (val, err) if return_error else val


def char_fn_from_split(s: TruncationSplit, gaussian_form, u, tol: float = 1e-6,
                       return_error: bool = False):
    """Factored form: exp(i<b,u> - Q/2 + int(e^{iux}-1-iux) dnu2) * exp(-rate + int e^{iux} dnu1)."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    Q = np.atleast_2d(np.asarray(gaussian_form, dtype=float))
    small, e2 = s.nu2.fourier(u, "small")
    big, e1 = s.nu1.fourier(u, "exp")
    err = e1 + e2 + s.rate_error
    if err > tol:
        raise QuadratureFailure(f"split ch.f. error estimate {err:.2e} exceeds {tol:.1e}")
    phi2 = np.exp(1j * float(s.shifted_drift @ u) - 0.5 * float(u @ Q @ u) + small)
    phi1 = np.exp(big - s.rate)
    val = _check_modulus(complex(phi2 * phi1), err)
    return (val, err) if return_error else val


def sample_triplet(t: LevyTriplet, n: int, seed=None) -> np.ndarray:
    """Draws from a triplet with a finite measure: Gaussian + drift + compound Poisson."""
    meas = t.measure
    if not meas.is_finite:
        raise UnsupportedMixing("exact sampling needs a finite Levy measure")
    rng = as_generator(seed)
    p = t.dim
    mass, _ = meas.mass()
    comp, _ = _vector_integral(meas, lambda x: x / (1.0 + np.sum(x * x, axis=1))[:, None], p)
    out = np.tile(t.drift - comp, (n, 1))
    if np.any(t.gaussian_form != 0):
        w, vecs = np.linalg.eigh(t.gaussian_form)
        root = vecs * np.sqrt(np.clip(w, 0.0, None))
        out += rng.standard_normal((n, p)) @ root.T
    if mass > 0:
        counts = rng.poisson(mass, size=n)
        total = int(counts.sum())
        if total:
            jumps = meas.sample_jumps(total, rng)
            rows = np.repeat(np.arange(n), counts)
            for r in range(p):
                out[:, r] += np.bincount(rows, weights=jumps[:, r], minlength=n)
    return out
