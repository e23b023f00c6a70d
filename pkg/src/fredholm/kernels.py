"""Displacement kernels G(|t - s|) with exact cell integration.

Every kernel family implements three capabilities used throughout the
package: pointwise evaluation, exact integration of G(|t - s|) over
axis-aligned rectangles (the building block of the discretized energy and
of residual checks), and structural classification (nonincreasing, convex,
completely monotone, positive type).

Rectangle integrals reduce to scalar antiderivatives.  Writing
G1(u) = int_0^u G(w) dw and G2(u) = int_0^u G1(v) dv for u >= 0, a
rectangle X x Y that lies entirely on one side of the diagonal t = s
contributes an inclusion-exclusion of G2 values, while a square sitting on
the diagonal contributes 2*G2(L) (Fubini).  General rectangles are first
split at each other's endpoints so that only those two shapes occur.
Inclusion-exclusion is a second difference, so any affine part of G2
cancels; the `_nl2` hook lets a family supply only the nonlinear part of
G2 in whatever form is numerically stable (compactly supported kernels
return exact zeros for far-apart cells this way).
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate

__all__ = [
    "Kernel",
    "KernelStructure",
    "ExponentialSum",
    "CappedLinear",
    "PowerCapped",
    "Trigonometric",
    "PowerLaw",
    "Tabulated",
    "kernel_from_spec",
]


@dataclass(frozen=True)
class KernelStructure:
    """Structural flags of a kernel.

    ``tolerance`` is only set for table-based kernels, where the flags come
    from finite-difference sign tests instead of analytic facts.
    """

    nonincreasing: bool
    convex: bool
    completely_monotone: bool
    positive_type_known: bool
    tolerance: float | None = None

    def to_dict(self):
        out = {
            "nonincreasing": self.nonincreasing,
            "convex": self.convex,
            "completely_monotone": self.completely_monotone,
            "positive_type_known": self.positive_type_known,
        }
        if self.tolerance is not None:
            out["tolerance"] = self.tolerance
        return out


def _segments(lo, hi, cuts):
    """Split [lo, hi] at every cut strictly inside it."""
    pts = sorted({lo, hi, *(c for c in cuts if lo < c < hi)})
    return list(zip(pts[:-1], pts[1:]))


class Kernel:
    """Base class: generic rectangle logic on top of per-family scalar hooks."""

    def evaluate(self, t):
        """Kernel value G(t) for lag t >= 0 (scalar or ndarray)."""
        raise NotImplementedError

    def classify(self) -> KernelStructure:
        raise NotImplementedError

    def spec(self) -> dict:
        """JSON-compatible description, round-trips through kernel_from_spec."""
        raise NotImplementedError

    # --- scalar antiderivative hooks (vectorized over ndarrays) ---

    def _g1(self, u):
        """First antiderivative of G on u >= 0 with G1(0) = 0."""
        raise NotImplementedError

    def _g2(self, u):
        """Second antiderivative of G on u >= 0 with G2(0) = G2'(0) = 0."""
        raise NotImplementedError

    def _nl2(self, u):
        """Nonlinear part of G2 (affine offsets drop out of second differences)."""
        return self._g2(u)

    # --- rectangle building blocks ---

    def _one_signed(self, gap, dx, dy):
        """Integral over a rectangle with t - s = gap + [0,dx] + [0,dy], gap >= 0."""
        f = self._nl2
        return float(f(gap + dx + dy) - f(gap + dx) - f(gap + dy) + f(gap))

    def _diag_square(self, side):
        """Integral of G(|t-s|) over a square [c, c+side]^2 on the diagonal."""
        return float(2.0 * self._g2(side))

    def cell_double_integral(self, x_lo, x_hi, y_lo, y_hi):
        """Exact integral of G(|t - s|) ds dt over [x_lo,x_hi] x [y_lo,y_hi]."""
        if not (x_lo < x_hi and y_lo < y_hi):
            raise ValueError(
                "degenerate rectangle: require x_lo < x_hi and y_lo < y_hi"
            )
        total = 0.0
        for p, q in _segments(x_lo, x_hi, (y_lo, y_hi)):
            for r, s in _segments(y_lo, y_hi, (x_lo, x_hi)):
                if p == r and q == s:
                    total += self._diag_square(q - p)
                elif r >= q:
                    total += self._one_signed(r - q, q - p, s - r)
                elif p >= s:
                    total += self._one_signed(p - s, q - p, s - r)
                else:  # pragma: no cover - splitting precludes partial overlap
                    raise AssertionError("rectangle splitting failed")
        return total

    def cell_integral(self, lo, hi, t):
        """int_lo^hi G(|t - s|) ds, vectorized over t (exact antiderivative)."""
        if not lo < hi:
            raise ValueError("degenerate cell: require lo < hi")
        t_arr = np.asarray(t, dtype=float)
        out = self._g1_signed(hi - t_arr) - self._g1_signed(lo - t_arr)
        return float(out) if np.ndim(t) == 0 else out

    def _g1_signed(self, w):
        """Odd extension of G1: antiderivative of s -> G(|s|)."""
        w = np.asarray(w, dtype=float)
        return np.sign(w) * self._g1(np.abs(w))


def _check_lag(t, positive=False):
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("kernel lag must be nonnegative")
    if positive and np.any(t_arr == 0):
        raise ValueError("kernel diverges at lag 0; require t > 0")
    return t_arr


def _em1p(x):
    """exp(-x) - 1 + x, accurate for all x >= 0."""
    x = np.asarray(x, dtype=float)
    small = x < 1e-2
    xs = np.where(small, x, 0.0)
    series = 0.5 * xs * xs * (
        1.0 - xs / 3.0 * (1.0 - xs / 4.0 * (1.0 - xs / 5.0 * (1.0 - xs / 6.0)))
    )
    return np.where(small, series, np.expm1(-x) + x)


@dataclass(frozen=True)
class ExponentialSum(Kernel):
    """G(t) = sum_k a_k * exp(-sqrt(b_k) * t) with a_k > 0, b strictly increasing."""

    a: tuple
    b: tuple

    def __post_init__(self):
        a = tuple(float(v) for v in self.a)
        b = tuple(float(v) for v in self.b)
        if len(a) == 0 or len(a) != len(b):
            raise ValueError("exponential sum needs equally many positive a and b")
        if any(v <= 0 for v in a):
            raise ValueError("exponential sum weights a must be positive")
        if b[0] <= 0 or any(x >= y for x, y in zip(b[:-1], b[1:])):
            raise ValueError("exponential sum rates b must be strictly increasing and positive")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @cached_property
    def _arrays(self):
        a = np.array(self.a)
        b = np.array(self.b)
        return a, b, np.sqrt(b)

    def evaluate(self, t):
        t_arr = _check_lag(t)
        a, _, rate = self._arrays
        out = np.sum(a * np.exp(-rate * t_arr[..., None]), axis=-1)
        return float(out) if np.ndim(t) == 0 else out

    def _g1(self, u):
        a, _, rate = self._arrays
        u = np.asarray(u, dtype=float)
        return np.sum(-(a / rate) * np.expm1(-rate * u[..., None]), axis=-1)

    def _g2(self, u):
        a, b, rate = self._arrays
        u = np.asarray(u, dtype=float)
        return np.sum((a / b) * _em1p(rate * u[..., None]), axis=-1)

    def _one_signed(self, gap, dx, dy):
        # expm1 product form: no cancellation however far the cells are apart
        a, b, rate = self._arrays
        return float(
            np.sum((a / b) * np.exp(-rate * gap) * np.expm1(-rate * dx) * np.expm1(-rate * dy))
        )

    def _diag_square(self, side):
        a, b, rate = self._arrays
        return float(2.0 * np.sum((a / b) * _em1p(rate * side)))

    def classify(self):
        return KernelStructure(
            nonincreasing=True,
            convex=True,
            completely_monotone=True,
            positive_type_known=True,
        )

    def spec(self):
        return {"type": "exponential_sum", "a": list(self.a), "b": list(self.b)}


@dataclass(frozen=True)
class CappedLinear(Kernel):
    """G(t) = (cap - t)^+ ."""

    cap: float = 1.0

    def __post_init__(self):
        if not self.cap > 0:
            raise ValueError("cap must be positive")
        object.__setattr__(self, "cap", float(self.cap))

    def evaluate(self, t):
        t_arr = _check_lag(t)
        out = np.maximum(self.cap - t_arr, 0.0)
        return float(out) if np.ndim(t) == 0 else out

    def _g1(self, u):
        u = np.asarray(u, dtype=float)
        uc = np.minimum(u, self.cap)
        return self.cap * uc - 0.5 * uc * uc

    def _g2(self, u):
        u = np.asarray(u, dtype=float)
        cap = self.cap
        inside = 0.5 * cap * u * u - u**3 / 6.0
        beyond = cap**3 / 3.0 + (u - cap) * 0.5 * cap * cap
        return np.where(u <= cap, inside, beyond)

    def _nl2(self, u):
        # G2(u) = affine(u) + (cap - u)^+^3 / 6; only the cube survives differencing
        w = np.maximum(self.cap - np.asarray(u, dtype=float), 0.0)
        return w**3 / 6.0

    def classify(self):
        return KernelStructure(
            nonincreasing=True,
            convex=True,
            completely_monotone=False,
            positive_type_known=True,
        )

    def spec(self):
        return {"type": "capped_linear", "cap": self.cap}


@dataclass(frozen=True)
class PowerCapped(Kernel):
    """G(t) = ((1 - rho*t)^+)^p for a positive integer power p."""

    rho: float
    p: int

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if not (isinstance(self.p, (int, np.integer)) and self.p >= 1):
            raise ValueError("p must be a positive integer")
        object.__setattr__(self, "rho", float(self.rho))
        object.__setattr__(self, "p", int(self.p))

    def evaluate(self, t):
        t_arr = _check_lag(t)
        out = np.maximum(1.0 - self.rho * t_arr, 0.0) ** self.p
        return float(out) if np.ndim(t) == 0 else out

    def _g1(self, u):
        rho, p = self.rho, self.p
        u = np.asarray(u, dtype=float)
        w = np.maximum(1.0 - rho * u, 0.0)
        return (1.0 - w ** (p + 1)) / (rho * (p + 1))

    def _g2(self, u):
        rho, p = self.rho, self.p
        u = np.asarray(u, dtype=float)
        uc = np.minimum(u, 1.0 / rho)
        w = np.maximum(1.0 - rho * u, 0.0)
        inside = uc / (rho * (p + 1)) - (1.0 - w ** (p + 2)) / (rho**2 * (p + 1) * (p + 2))
        return inside + np.maximum(u - 1.0 / rho, 0.0) / (rho * (p + 1))

    def _nl2(self, u):
        rho, p = self.rho, self.p
        w = np.maximum(1.0 - rho * np.asarray(u, dtype=float), 0.0)
        return w ** (p + 2) / (rho**2 * (p + 1) * (p + 2))

    def classify(self):
        return KernelStructure(
            nonincreasing=True,
            convex=True,  # p >= 1: piecewise power of an affine ramp
            completely_monotone=False,
            positive_type_known=True,
        )

    def spec(self):
        return {"type": "power_capped", "rho": self.rho, "p": self.p}


@dataclass(frozen=True)
class Trigonometric(Kernel):
    """G(t) = cos(rho * t): of positive type, but neither nonincreasing nor convex."""

    rho: float

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        object.__setattr__(self, "rho", float(self.rho))

    def evaluate(self, t):
        t_arr = _check_lag(t)
        out = np.cos(self.rho * t_arr)
        return float(out) if np.ndim(t) == 0 else out

    def _g1(self, u):
        return np.sin(self.rho * np.asarray(u, dtype=float)) / self.rho

    def _g2(self, u):
        return (1.0 - np.cos(self.rho * np.asarray(u, dtype=float))) / self.rho**2

    def classify(self):
        return KernelStructure(
            nonincreasing=False,
            convex=False,
            completely_monotone=False,
            positive_type_known=True,  # Bochner: cos is positive definite
        )

    def spec(self):
        return {"type": "trigonometric", "rho": self.rho}


@dataclass(frozen=True)
class PowerLaw(Kernel):
    """G(t) = scale * t^(-alpha), 0 < alpha < 1 (integrable singularity at 0)."""

    alpha: float
    scale: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "scale", float(self.scale))

    def evaluate(self, t):
        t_arr = _check_lag(t, positive=True)
        out = self.scale * t_arr ** (-self.alpha)
        return float(out) if np.ndim(t) == 0 else out

    def _g1(self, u):
        u = np.asarray(u, dtype=float)
        return self.scale * u ** (1.0 - self.alpha) / (1.0 - self.alpha)

    def _g2(self, u):
        u = np.asarray(u, dtype=float)
        return self.scale * u ** (2.0 - self.alpha) / ((1.0 - self.alpha) * (2.0 - self.alpha))

    def classify(self):
        return KernelStructure(
            nonincreasing=True,
            convex=True,
            completely_monotone=True,
            positive_type_known=True,
        )

    def spec(self):
        return {"type": "power_law", "alpha": self.alpha, "scale": self.scale}


@dataclass(frozen=True)
class Tabulated(Kernel):
    """Kernel given by samples (abscissae t, values g).

    Interpolation is log-linear when every tabulated value is positive
    (preserving the decay shape of empirical impact kernels) and linear
    otherwise.  Outside the table the kernel extends flat.  Double
    integrals fall back to adaptive quadrature over the lag variable;
    single-cell integrals use the interpolant's exact antiderivative.
    """

    t: tuple
    g: tuple

    def __post_init__(self):
        t = tuple(float(v) for v in self.t)
        g = tuple(float(v) for v in self.g)
        if len(t) < 2 or len(t) != len(g):
            raise ValueError("tabulated kernel needs >= 2 matching samples")
        if t[0] < 0 or any(x >= y for x, y in zip(t[:-1], t[1:])):
            raise ValueError("tabulated abscissae must be strictly increasing and nonnegative")
        if any(v < 0 for v in g):
            raise ValueError("tabulated values must be nonnegative")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "g", g)

    @cached_property
    def _arrays(self):
        return np.array(self.t), np.array(self.g)

    @cached_property
    def log_interpolated(self):
        return all(v > 0 for v in self.g)

    def evaluate(self, t):
        t_arr = _check_lag(t)
        xs, ys = self._arrays
        if self.log_interpolated:
            out = np.exp(np.interp(t_arr, xs, np.log(ys)))
        else:
            out = np.interp(t_arr, xs, ys)
        return float(out) if np.ndim(t) == 0 else out

    @cached_property
    def _segment_integrals(self):
        """Integral of the interpolant over each table segment, plus a prefix sum."""
        xs, ys = self._arrays
        widths = np.diff(xs)
        if self.log_interpolated:
            logs = np.log(ys)
            slopes = np.diff(logs) / widths
            flat = np.abs(slopes) < 1e-14
            with np.errstate(divide="ignore", invalid="ignore"):
                seg = np.where(flat, ys[:-1] * widths, (ys[1:] - ys[:-1]) / slopes)
        else:
            seg = 0.5 * (ys[:-1] + ys[1:]) * widths
        prefix = np.concatenate([[0.0], np.cumsum(seg)])
        return seg, prefix

    def _g1(self, u):
        xs, ys = self._arrays
        _, prefix = self._segment_integrals
        u_in = np.asarray(u, dtype=float)
        u = np.atleast_1d(u_in)
        out = np.empty_like(u)
        below = u <= xs[0]
        out[below] = ys[0] * u[below]
        above = u >= xs[-1]
        out[above] = ys[0] * xs[0] + prefix[-1] + (u[above] - xs[-1]) * ys[-1]
        mid = ~(below | above)
        if np.any(mid):
            um = u[mid]
            idx = np.searchsorted(xs, um, side="right") - 1
            partial = np.empty_like(um)
            if self.log_interpolated:
                logs = np.log(ys)
                widths = np.diff(xs)
                slopes = np.diff(logs) / widths
                s = slopes[idx]
                y0 = ys[idx]
                dt = um - xs[idx]
                flat = np.abs(s) < 1e-14
                with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                    grown = y0 * np.expm1(np.where(flat, 0.0, s) * dt) / np.where(flat, 1.0, s)
                partial = np.where(flat, y0 * dt, grown)
            else:
                widths = np.diff(xs)
                slopes = np.diff(ys) / widths
                dt = um - xs[idx]
                partial = ys[idx] * dt + 0.5 * slopes[idx] * dt * dt
            out[mid] = ys[0] * xs[0] + prefix[idx] + partial
        return out.reshape(u_in.shape)

    def cell_double_integral(self, x_lo, x_hi, y_lo, y_hi):
        # reduce to the lag variable u = t - s: the rectangle contributes
        # int G(|u|) * overlap(u) du with a trapezoid-shaped overlap length
        if not (x_lo < x_hi and y_lo < y_hi):
            raise ValueError("degenerate rectangle: require x_lo < x_hi and y_lo < y_hi")
        u_min, u_max = x_lo - y_hi, x_hi - y_lo

        def integrand(u):
            overlap = np.minimum(x_hi, y_hi + u) - np.maximum(x_lo, y_lo + u)
            return self.evaluate(abs(u)) * max(overlap, 0.0)

        kinks = {x_lo - y_lo, x_hi - y_hi, 0.0}
        kinks.update(v for v in self.t)
        kinks.update(-v for v in self.t)
        pts = sorted(p for p in kinks if u_min < p < u_max)
        val, _ = integrate.quad(
            integrand, u_min, u_max, points=pts or None, limit=200,
            epsabs=1e-13, epsrel=1e-11,
        )
        return val

    def classify(self):
        xs, ys = self._arrays
        tol = 1e-9 * max(1.0, float(np.max(np.abs(ys))))
        slopes = np.diff(ys) / np.diff(xs)
        nonincreasing = bool(np.all(np.diff(ys) <= tol))
        convex = bool(np.all(np.diff(slopes) >= -tol))
        return KernelStructure(
            nonincreasing=nonincreasing,
            convex=convex,
            completely_monotone=False,  # not decidable from samples
            positive_type_known=nonincreasing and convex,
            tolerance=tol,
        )

    def spec(self):
        return {"type": "tabulated", "t": list(self.t), "g": list(self.g)}


_VARIANTS = {
    "exponential_sum": (ExponentialSum, ("a", "b"), ()),
    "capped_linear": (CappedLinear, (), ("cap",)),
    "power_capped": (PowerCapped, ("rho", "p"), ()),
    "trigonometric": (Trigonometric, ("rho",), ()),
    "power_law": (PowerLaw, ("alpha",), ("scale",)),
    "tabulated": (Tabulated, ("t", "g"), ()),
}


def kernel_from_spec(obj):
    """Build a kernel from its JSON object form, e.g. {"type": "trigonometric", "rho": 0.5}."""
    if not isinstance(obj, dict):
        raise ValueError("kernel spec must be a JSON object")
    spec = dict(obj)
    kind = spec.pop("type", None)
    if kind not in _VARIANTS:
        known = ", ".join(sorted(_VARIANTS))
        raise ValueError(f"unknown kernel type {kind!r}; expected one of: {known}")
    cls, required, optional = _VARIANTS[kind]
    missing = [f for f in required if f not in spec]
    if missing:
        raise ValueError(f"kernel type {kind!r} missing fields: {', '.join(missing)}")
    extra = [f for f in spec if f not in required and f not in optional]
    if extra:
        raise ValueError(f"kernel type {kind!r} has unknown fields: {', '.join(extra)}")
    kwargs = {
        f: tuple(v) if isinstance(v, (list, tuple)) else v for f, v in spec.items()
    }
    return cls(**kwargs)
