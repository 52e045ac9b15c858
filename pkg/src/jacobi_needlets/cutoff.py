"""Admissible cutoff functions on [0, inf)^d.

A cutoff is stored as a vectorized callable together with the metadata that
downstream code relies on: the kind (first / second / univariate), the type
tag (a / b / c), an optional derivative-gauge class, and, when available, a
separable representation ``sum_w w * prod_i f_i(scale * t_i)`` that lets
kernels factorize into univariate sums.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator
from scipy.special import zeta

__all__ = [
    "AdmissibilityReport",
    "CheckResult",
    "CoveringError",
    "CutoffFunction",
    "CutoffTypeError",
    "DerivativeGauge",
    "GaugeClass",
    "GridResolutionError",
    "gauge_derivatives",
    "make_dual_cutoff",
    "make_multivariate",
    "make_radial_impostor",
    "make_small_derivative_univariate",
    "make_univariate",
    "quasi_norm",
    "smooth_step",
    "verify_admissibility",
]

KINDS = ("first", "second", "univariate")
TYPES = ("a", "b", "c", "none")

# Points per axis of the dense verification grid, by dimension.
DENSE_GRID = {1: 2 ** 12, 2: 2 ** 7, 3: 2 ** 5}

_GRID_BUDGET = 2 ** 24


class CutoffTypeError(ValueError):
    """Base cutoff functions do not have the type a construction requires."""


class CoveringError(ValueError):
    """The dyadic covering denominator is too small for a dual cutoff."""


class GridResolutionError(MemoryError):
    """The box-filter grid would exceed the memory budget."""


def smooth_step(u):
    """C-infinity step: 0 for u <= 0, 1 for u >= 1, flat to all orders at both ends."""
    u = np.asarray(u, dtype=float)
    out = np.where(u >= 1.0, 1.0, 0.0)
    inner = (u > 0.0) & (u < 1.0)
    if np.any(inner):
        v = u[inner]
        with np.errstate(over="ignore"):
            out[inner] = 1.0 / (1.0 + np.exp(1.0 / v - 1.0 / (1.0 - v)))
    return out


@dataclass(frozen=True)
class DerivativeGauge:
    """Growth gauge ``L`` with its integral constant ``M = 1 + int dt/((t+1)L(t))``."""

    gauge_fn: Callable
    mass_M: float
    family_tag: str

    @classmethod
    def power(cls, eps):
        if eps <= 0:
            raise ValueError("power gauge needs eps > 0")
        return cls(lambda t: (1.0 + np.asarray(t, dtype=float)) ** eps,
                   1.0 + 1.0 / eps, f"power({eps})")

    @classmethod
    def iterated_log(cls, ell, eps):
        if not (1 <= ell <= 3) or not (0 < eps <= 1):
            raise ValueError("iterated_log gauge needs ell in 1..3 and 0 < eps <= 1")

        def fn(t):
            t = np.asarray(t, dtype=float)
            out = np.ones_like(t)
            base = 1.0
            for level in range(1, ell + 1):
                base = math.exp(base)
                val = base + t
                for _ in range(level):
                    val = np.log(val)
                out = out * (val ** (1.0 + eps) if level == ell else val)
            return out

        return cls(fn, _mass_from_gauge(fn), f"iterated_log({ell},{eps})")

    @classmethod
    def custom(cls, fn):
        return cls(fn, _mass_from_gauge(fn), "custom")

    def __call__(self, t):
        return self.gauge_fn(t)

    def deltas(self, m):
        """Box half-widths ``1/((j+1)L(j))`` for ``j = 0..m``."""
        j = np.arange(m + 1, dtype=float)
        return 1.0 / ((j + 1.0) * self.gauge_fn(j))

    def tail(self, m):
        """Truncation tail ``sum_{j>m} delta_j``."""
        if self.family_tag.startswith("power("):
            eps = float(self.family_tag[6:-1])
            return float(zeta(1.0 + eps, m + 2))
        cut = 10 ** 6
        j = np.arange(m + 1, cut, dtype=float)
        head = float(np.sum(1.0 / ((j + 1.0) * self.gauge_fn(j))))
        return head + _log_integral(self.gauge_fn, cut - 1.0)


def _log_integral(fn, t0):
    """``int_{t0}^inf dt / ((t+1) L(t))`` in the variable ``u = log(1+t)``."""
    val, _ = quad(lambda u: 1.0 / float(fn(math.expm1(u))) if u < 700 else 0.0,
                  math.log1p(t0), np.inf, limit=1000)
    return val


def _mass_from_gauge(fn):
    return 1.0 + _log_integral(fn, 0.0)


@dataclass(frozen=True)
class GaugeClass:
    """Claimed membership in the small-derivative class ``S(d, L; gamma, gamma_tilde)``."""

    gauge: DerivativeGauge
    gamma: float
    gamma_tilde: float

    def envelope(self, k):
        """Bound ``gamma * (gamma_tilde * L(k-1))^k`` on ``||D^k A|| / k!``."""
        return self.gamma * (self.gamma_tilde * float(self.gauge(k - 1))) ** k


@dataclass(frozen=True, eq=False)
class CutoffFunction:
    """Evaluable cutoff ``A: [0, inf)^d -> R`` with admissibility metadata.

    Univariate cutoffs act elementwise on arrays of any shape. For ``dim >= 2``
    the last axis of the argument holds the coordinates.
    """

    dim: int
    func: Callable
    kind: str
    type_tag: str
    name: str = ""
    support_bound: float = 2.0
    gauge: Optional[GaugeClass] = None
    separable: Optional[tuple] = None
    flat_radius: float = 0.0
    transition: Optional[Callable] = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise CutoffTypeError(f"unknown kind {self.kind!r}")
        if self.type_tag not in TYPES:
            raise CutoffTypeError(f"unknown type {self.type_tag!r}")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.dim > 1 and (t.ndim == 0 or t.shape[-1] != self.dim):
            raise ValueError(f"expected trailing axis of length {self.dim}")
        return self.func(t)

    def at_points(self, t):
        """Evaluate on points with shape ``(..., dim)`` for any dimension."""
        t = np.asarray(t, dtype=float)
        return self.func(t[..., 0]) if self.dim == 1 else self.func(t)

    @property
    def is_separable(self):
        return self.separable is not None


def _univariate(func, type_tag, name, **kw):
    return CutoffFunction(1, func, "univariate", type_tag, name=name, **kw)


def make_univariate(type_tag):
    """Closed-form univariate cutoff of type (a), (b) or (c), built from ``smooth_step``."""
    def type_a(t):
        return smooth_step(np.clip(2.0 - np.asarray(t, dtype=float), 0.0, 1.0))

    if type_tag == "a":
        return _univariate(type_a, "a", "exp-a", flat_radius=1.0)
    if type_tag == "b":
        a = _univariate(type_a, "a", "exp-a", flat_radius=1.0)

        def type_b(t):
            t = np.asarray(t, dtype=float)
            return type_a(t) - type_a(2.0 * t)

        return _univariate(type_b, "b", "exp-b", flat_radius=0.5,
                           separable=((1.0, 1.0, (a,)), (-1.0, 2.0, (a,))))
    if type_tag == "c":
        return _univariate(_splice(type_a, 1), "c", "exp-c", flat_radius=0.5)
    raise CutoffTypeError(f"univariate type must be a, b or c, got {type_tag!r}")


def _splice(prod_a, dim):
    """Sin/cos splice of a type-(a) function on the dyadic sup-norm annuli."""
    def func(t):
        t = np.asarray(t, dtype=float)
        r = np.abs(t) if dim == 1 else np.max(t, axis=-1)
        out = np.zeros(r.shape)
        inner = (r > 0.5) & (r <= 1.0)
        outer = (r > 1.0) & (r <= 2.0)
        if np.any(inner):
            out[inner] = np.cos(0.5 * np.pi * prod_a(2.0 * t[inner]))
        if np.any(outer):
            out[outer] = np.sin(0.5 * np.pi * prod_a(t[outer]))
        return out
    return func


def _box_filtered_cdf(deltas):
    """CDF of the convolution of boxes of half-widths ``deltas`` on a uniform grid.

    Each pass replaces F by its moving average over ``[x - delta, x + delta]``,
    computed exactly for the piecewise-linear F via its quadratic antiderivative.
    """
    h = deltas[-1] / 8.0
    reach = float(np.sum(deltas)) + 4.0 * h
    half = int(math.ceil(reach / h))
    if 2 * half + 1 > _GRID_BUDGET:
        raise GridResolutionError(
            f"box-filter grid needs {2 * half + 1} points, budget is {_GRID_BUDGET}")
    x = h * np.arange(-half, half + 1, dtype=float)
    F = np.clip((x + deltas[0]) / (2.0 * deltas[0]), 0.0, 1.0)
    for delta in deltas[1:]:
        G = np.concatenate(([0.0], np.cumsum(0.5 * h * (F[1:] + F[:-1]))))

        def antider(s):
            pos = np.clip((s - x[0]) / h, 0.0, len(x) - 1.0)
            i = np.minimum(np.floor(pos).astype(int), len(x) - 2)
            u = (pos - i) * h
            val = G[i] + F[i] * u + (F[i + 1] - F[i]) * u * u / (2.0 * h)
            return val + np.maximum(s - x[-1], 0.0)

        F = (antider(x + delta) - antider(x - delta)) / (2.0 * delta)
        # left of the grid F is 0; right of it F is 1 and integrates linearly
        F = 0.5 * (F + 1.0 - F[::-1])
    F = np.clip(F, 0.0, 1.0)
    return x, F


def make_small_derivative_univariate(gauge, type_tag, truncation_m=32):
    """Univariate cutoff with derivative growth controlled by ``gauge``.

    The smooth bump is the truncated infinite convolution of boxes with
    half-widths ``1/((j+1)L(j))``, j = 0..m, realized on a grid and then
    interpolated monotonically. ``g(t) = (pi/2) * CDF(2 M t)`` is the
    transition; it rises from 0 to pi/2 on [-1/2, 1/2].
    """
    if not 8 <= truncation_m <= 64:
        raise ValueError("truncation_m must lie in [8, 64]")
    M = gauge.mass_M
    x, F = _box_filtered_cdf(gauge.deltas(truncation_m))
    right = x >= 0
    interp = PchipInterpolator(x[right], F[right], extrapolate=False)
    edge = x[-1]

    def cdf(u):
        u = np.asarray(u, dtype=float)
        v = np.abs(u)
        val = np.where(v >= edge, 1.0, 0.0)
        inside = v < edge
        if np.any(inside):
            val[inside] = interp(v[inside])
        val = np.clip(val, 0.0, 1.0)
        # exact antisymmetry F(-u) = 1 - F(u)
        return np.where(u >= 0, val, 1.0 - val)

    def g(t):
        return 0.5 * np.pi * cdf(2.0 * M * np.asarray(t, dtype=float))

    def type_a(t):
        return cdf(2.0 * M * (1.5 - np.asarray(t, dtype=float)))

    info = {"truncation_m": truncation_m, "tail": gauge.tail(truncation_m),
            "grid_pitch": float(x[1] - x[0])}
    tag = f"small-{gauge.family_tag}"
    if type_tag == "a":
        return _univariate(type_a, "a", tag + "-a", gauge=GaugeClass(gauge, 1.0, 2 * M),
                           flat_radius=1.0, transition=g, info=info)
    if type_tag == "b":
        a = _univariate(type_a, "a", tag + "-a", gauge=GaugeClass(gauge, 1.0, 2 * M),
                        flat_radius=1.0, transition=g, info=info)

        def type_b(t):
            t = np.asarray(t, dtype=float)
            return type_a(t) - type_a(2.0 * t)

        return _univariate(type_b, "b", tag + "-b", gauge=GaugeClass(gauge, 2.0, 4 * M),
                           flat_radius=0.5, transition=g, info=info,
                           separable=((1.0, 1.0, (a,)), (-1.0, 2.0, (a,))))
    if type_tag == "c":
        def phi(u):
            return np.sin(g(u))

        def type_c(t):
            t = np.asarray(t, dtype=float)
            out = np.zeros(t.shape)
            lo = (t >= 0.5) & (t <= 1.0)
            hi = (t > 1.0) & (t <= 2.0)
            out[lo] = phi(2.0 * t[lo] - 1.5)
            out[hi] = phi(1.5 - t[hi])
            return out

        return _univariate(type_c, "c", tag + "-c", gauge=GaugeClass(gauge, 8.0, 8 * M),
                           flat_radius=0.5, transition=g, info=info)
    raise CutoffTypeError(f"univariate type must be a, b or c, got {type_tag!r}")


def quasi_norm(t, c_hat):
    """Quasi-norm ``N(t) = sum_m |t_m| prod_j c(t_j / t_m)`` with ``c(tau/0) = 0``.

    ``t`` has its coordinates on the last axis; ``c_hat`` is a univariate
    type-(a) cutoff, applied to absolute values (it is taken to be even).
    """
    t = np.abs(np.asarray(t, dtype=float))
    tm = t[..., :, None]
    zero = tm == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(zero, 0.0, t[..., None, :] / np.where(zero, 1.0, tm))
    factors = np.prod(c_hat(ratio), axis=-1)
    factors = np.where(zero[..., 0], 0.0, factors)
    return np.sum(t * factors, axis=-1)


def _as_factor_list(base, d):
    if base is None:
        base = make_univariate("a")
    bases = list(base) if isinstance(base, (list, tuple)) else [base] * d
    if len(bases) != d:
        raise CutoffTypeError(f"need {d} univariate factors, got {len(bases)}")
    for b in bases:
        if b.dim != 1 or b.type_tag != "a":
            raise CutoffTypeError("product construction needs univariate type-(a) factors")
    return bases


def _product(bases):
    d = len(bases)

    def func(t):
        t = np.asarray(t, dtype=float)
        out = bases[0](t[..., 0])
        for i in range(1, d):
            out = out * bases[i](t[..., i])
        return out
    return func


def _shared_gauge(bases):
    gauges = [b.gauge for b in bases]
    if any(g is None for g in gauges):
        return None
    first = gauges[0]
    if any(g.gauge is not first.gauge or g.gamma != first.gamma
           or g.gamma_tilde != first.gamma_tilde for g in gauges):
        return None
    return first


def make_multivariate(construction, d, type_tag=None, base=None, base2=None, c_hat=None):
    """Second-kind d-dimensional cutoff from univariate building blocks.

    construction:
      ``product``    prod_i a_i(t_i) with type-(a) factors; type (a).
      ``difference`` A1(t) - A2(2t) for type-(a) cutoffs A1, A2 (multivariate
                     of dimension d, or univariate factors turned into
                     products); type (b).
      ``quasi_norm`` a(N(t)) with ``a`` univariate of any type and ``N`` the
                     quasi-norm built from ``c_hat``; inherits the type of a.
      ``sin_splice`` cos((pi/2) A(2t)) on the annulus 1/2 < |t|_inf <= 1 and
                     sin((pi/2) A(t)) on 1 < |t|_inf <= 2, where A is the
                     product of type-(a) factors; type (c).
    """
    if construction == "product":
        bases = _as_factor_list(base, d)
        if type_tag not in (None, "a"):
            raise CutoffTypeError("a product of type-(a) factors has type (a)")
        if d == 1:
            return bases[0]
        return CutoffFunction(
            d, _product(bases), "second", "a", name="product-a",
            gauge=_shared_gauge(bases), flat_radius=min(b.flat_radius for b in bases),
            separable=((1.0, 1.0, tuple(bases)),))

    if construction == "difference":
        if type_tag not in (None, "b"):
            raise CutoffTypeError("a difference of type-(a) cutoffs has type (b)")
        first = base if isinstance(base, CutoffFunction) and base.dim == d else \
            make_multivariate("product", d, base=base)
        second = first if base2 is None else (
            base2 if isinstance(base2, CutoffFunction) and base2.dim == d else
            make_multivariate("product", d, base=base2))
        for A in (first, second):
            if A.type_tag != "a":
                raise CutoffTypeError("difference construction needs type-(a) cutoffs")

        def func(t):
            t = np.asarray(t, dtype=float)
            return first(t) - second(2.0 * t)

        separable = None
        if first.separable is not None and second.separable is not None:
            separable = tuple(first.separable) + tuple(
                (-w, 2.0 * s, fs) for w, s, fs in second.separable)
        gauge = None
        if first.gauge is not None and first is second:
            gauge = GaugeClass(first.gauge.gauge, 2 * first.gauge.gamma,
                               2 * first.gauge.gamma_tilde)
        kind = "univariate" if d == 1 else "second"
        return CutoffFunction(d, func, kind, "b", name="difference-b", gauge=gauge,
                              flat_radius=0.5 * min(first.flat_radius, second.flat_radius),
                              separable=separable)

    if construction == "quasi_norm":
        if base is None or base.dim != 1 or base.type_tag not in ("a", "b", "c"):
            raise CutoffTypeError("quasi_norm construction needs a univariate a/b/c cutoff")
        if type_tag not in (None, base.type_tag):
            raise CutoffTypeError("quasi_norm construction keeps the type of its base")
        c_hat = make_univariate("a") if c_hat is None else c_hat
        if c_hat.dim != 1 or c_hat.type_tag != "a":
            raise CutoffTypeError("c_hat must be a univariate type-(a) cutoff")

        def func(t):
            return base(quasi_norm(t, c_hat))

        gauge = None
        if base.gauge is not None and c_hat.gauge is not None \
                and base.gauge.gauge is c_hat.gauge.gauge:
            M = base.gauge.gauge.mass_M
            gauge = GaugeClass(base.gauge.gauge, 8.0,
                               10 * d * (2 * d - 1) * M * (8 * (d + 2) * M + 1))
        return CutoffFunction(d, func, "second", base.type_tag,
                              name=f"quasinorm-{base.type_tag}", gauge=gauge,
                              flat_radius=base.flat_radius / d)

    if construction == "sin_splice":
        if type_tag not in (None, "c"):
            raise CutoffTypeError("sin_splice produces type (c)")
        bases = _as_factor_list(base, d)
        prod_a = bases[0] if d == 1 else _product(bases)
        shared = _shared_gauge(bases)
        gauge = None
        if shared is not None:
            gauge = GaugeClass(shared.gauge, 1.0,
                               (math.pi * shared.gamma + 2.0) * shared.gamma_tilde)
        kind = "univariate" if d == 1 else "second"
        return CutoffFunction(d, _splice(prod_a, d), kind, "c", name="sin-splice-c",
                              gauge=gauge, flat_radius=0.5)

    raise CutoffTypeError(f"unknown construction {construction!r}")


def make_radial_impostor(d, base=None):
    """``A(t) = a(|t|_1)`` with a univariate type-(b) ``a``.

    It claims second kind but is not flat at the coordinate planes; used as a
    negative control for localization and admissibility checks.
    """
    base = make_univariate("b") if base is None else base

    def func(t):
        return base(np.sum(np.abs(np.asarray(t, dtype=float)), axis=-1))

    return CutoffFunction(d, func, "second", base.type_tag, name="radial-impostor",
                          flat_radius=base.flat_radius / d)


def _dyadic_span(d):
    return 2 + int(math.ceil(math.log2(d))) if d > 1 else 2


def make_dual_cutoff(A, covering_floor=1e-10, n_samples=4096, seed=0):
    """Dual cutoff ``B = A / sum_{j in Z} |A(2^{-j} t)|^2``.

    Only the dilates that can meet supp A are summed. The denominator is
    dilation invariant, so sampling ``|t|_inf in [1, 2]`` checks it everywhere.
    """
    if A.type_tag not in ("b", "c"):
        raise CutoffTypeError("dual cutoff needs a type-(b) or (c) cutoff")
    d = A.dim
    span = _dyadic_span(d)
    scales = 2.0 ** np.arange(-span, span + 1)

    def denom(t):
        t = np.asarray(t, dtype=float)
        total = np.zeros(t.shape if d == 1 else t.shape[:-1])
        for s in scales:
            total += np.abs(A(s * t)) ** 2
        return total

    sample = _sup_sphere_sample(d, n_samples, np.random.default_rng(seed))
    sample = sample * np.linspace(1.0, 2.0, len(sample))[:, None]
    den = denom(sample[:, 0] if d == 1 else sample)
    if np.min(den) < covering_floor:
        k = int(np.argmin(den))
        raise CoveringError(
            f"covering denominator {den[k]:.3e} below {covering_floor:g} at t={sample[k]}")

    def func(t):
        t = np.asarray(t, dtype=float)
        num = A(t)
        out = np.zeros(num.shape, dtype=num.dtype)
        live = num != 0
        if np.any(live):
            out[live] = num[live] / denom(t[live])
        return out

    kind = A.kind
    return CutoffFunction(d, func, kind, "b", name=f"dual({A.name})",
                          flat_radius=A.flat_radius, info={"primal": A})


def _sup_sphere_sample(d, n, rng):
    """Points with ``|t|_inf = 1``: random interior plus axes and the diagonal."""
    if d == 1:
        return np.ones((max(n, 1), 1))
    pts = rng.uniform(0.0, 1.0, size=(n, d))
    pts[np.arange(n), rng.integers(0, d, size=n)] = 1.0
    special = [np.ones(d)] + [np.eye(d)[i] for i in range(d)]
    return np.vstack([np.array(special), pts])


@dataclass(frozen=True)
class CheckResult:
    name: str
    required: bool
    passed: bool
    worst_value: float
    worst_location: tuple = ()
    detail: str = ""


@dataclass(frozen=True)
class AdmissibilityReport:
    cutoff_name: str
    checks: tuple
    covering_gamma: Optional[tuple] = None

    @property
    def passed(self):
        return all(c.passed for c in self.checks if c.required)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self):
        return [c.name for c in self.checks if c.required and not c.passed]


def _dense_grid(d, hi):
    n = DENSE_GRID.get(d, 2 ** 4)
    axis = np.linspace(0.0, hi, n)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack(mesh, axis=-1).reshape(-1, d)


def _worst(values, points):
    k = int(np.argmax(values)) if len(values) else 0
    worst = float(values[k]) if len(values) else 0.0
    loc = tuple(float(v) for v in points[k]) if len(values) else ()
    return worst, loc


def verify_admissibility(A, partition_tol=1e-12, n_random=2000, seed=0,
                         covering_floor=1e-3):
    """Numeric admissibility report; failures are recorded, never raised."""
    rng = np.random.default_rng(seed)
    d = A.dim
    checks = []
    grid = _dense_grid(d, 1.5 * A.support_bound)
    vals = A.at_points(grid)

    outside = np.max(grid, axis=1) > A.support_bound * (1 + 1e-9)
    w, loc = _worst(np.abs(vals[outside]), grid[outside])
    checks.append(CheckResult("support", True, w < 1e-14, w, loc))

    l1 = np.sum(grid, axis=1)
    if A.type_tag == "a":
        inside = l1 <= 1.0
        w, loc = _worst(np.abs(vals[inside] - 1.0), grid[inside])
        checks.append(CheckResult("type_a_plateau", True, w <= 1e-12, w, loc))
    if A.type_tag in ("b", "c"):
        inside = l1 <= 0.5
        w, loc = _worst(np.abs(vals[inside]), grid[inside])
        checks.append(CheckResult("type_b_hole", True, w <= 1e-14, w, loc))
    if A.type_tag == "c":
        pts = _sup_sphere_sample(d, n_random, rng)
        pts = pts * (2.0 ** rng.uniform(0.0, 3.0, size=(len(pts), 1)))
        total = np.zeros(len(pts))
        for j in range(6):
            total += np.abs(A.at_points(pts / 2.0 ** j)) ** 2
        err = np.abs(total - 1.0)
        w, loc = _worst(err, pts)
        checks.append(CheckResult("type_c_partition", True, w <= partition_tol, w, loc))

    if d >= 2:
        t = rng.uniform(0.0, 1.25 * A.support_bound, size=(n_random, d))
        k = rng.integers(0, d, size=n_random)
        # shrink t_k below half the largest other coordinate
        others = np.max(np.where(np.eye(d, dtype=bool)[k], 0.0, t), axis=1)
        t[np.arange(n_random), k] = rng.uniform(0.0, 0.5, n_random) * others
        proj = t.copy()
        proj[np.arange(n_random), k] = 0.0
        err = np.abs(A.at_points(t) - A.at_points(proj))
        w, loc = _worst(err, t)
        checks.append(CheckResult("second_kind_projection", A.kind == "second",
                                  w <= 1e-12, w, loc))

    checks.append(_first_kind_check(A, rng, n_random // 4))

    if A.type_tag in ("b", "c"):
        check, gamma_range = _covering_check(A, rng, covering_floor)
        checks.append(check)
    else:
        gamma_range = None
    return AdmissibilityReport(A.name, tuple(checks), gamma_range)


def _first_kind_check(A, rng, n_points, h=2.0 ** -7):
    """One-sided differences of orders 1..4 off the coordinate planes.

    A flat function gives differences that are zero to round-off, or at least
    shrink like h^(r+4) when h is halved; anything slower fails.
    """
    d = A.dim
    if d == 1:
        base = np.zeros((1, 1))
        axes = np.zeros(1, dtype=int)
    else:
        base = rng.uniform(0.0, 1.1 * A.support_bound, size=(n_points, d))
        axes = rng.integers(0, d, size=n_points)
        base[np.arange(n_points), axes] = 0.0
    unit = np.eye(d)[axes]
    worst, worst_loc, ok = 0.0, (), True
    for r in range(1, 5):
        diffs = []
        for step in (h, h / 2):
            acc = np.zeros(len(base))
            for i in range(r + 1):
                coef = (-1) ** (r - i) * math.comb(r, i)
                acc += coef * A.at_points(base + i * step * unit)
            diffs.append(np.abs(acc))
        coarse, fine = diffs
        floor = 1e-13 * 2 ** r
        bad = (coarse > floor) & (fine > coarse * 2.0 ** -(r + 4) * 1.5 + floor)
        scaled = coarse / h ** r
        k = int(np.argmax(scaled))
        if scaled[k] > worst:
            worst, worst_loc = float(scaled[k]), tuple(float(v) for v in base[k])
        if np.any(bad):
            ok = False
            k = int(np.argmax(np.where(bad, scaled, -1)))
            worst_loc = tuple(float(v) for v in base[k])
    required = A.kind in ("first", "second", "univariate")
    return CheckResult("first_kind_boundary", required, ok, worst, worst_loc)


def _covering_check(A, rng, floor):
    d = A.dim
    pts = _sup_sphere_sample(d, 256 if d > 1 else 1, rng)
    gammas = np.geomspace(1.0 / 64.0, 1.0, 97)
    lam = np.linspace(1.0, 2.0, 33)
    best = np.full(len(pts), -np.inf)
    best_gamma = np.zeros(len(pts))
    for g in gammas:
        scaled = pts[:, None, :] * (g * lam)[None, :, None]
        low = np.min(np.abs(A.at_points(scaled)), axis=1)
        better = low > best
        best[better] = low[better]
        best_gamma[better] = g
    k = int(np.argmin(best))
    ok = bool(best[k] >= floor)
    gamma_range = (float(np.min(best_gamma)), float(np.max(best_gamma)))
    return (CheckResult("dyadic_covering", True, ok, float(best[k]),
                        tuple(float(v) for v in pts[k]),
                        f"gamma in [{gamma_range[0]:.3f}, {gamma_range[1]:.3f}]"),
            gamma_range)


def gauge_derivatives(A, k_max=4, n_points=None, step=None, seed=0):
    """Finite-difference estimates of ``max_j ||D_j^k A||_inf / k!`` for ``k = 1..k_max``.

    Returns a list of ``(k, estimate, envelope_or_None)``. Diagnostic only:
    central differences on a grid cannot certify smoothness.
    """
    if not 1 <= k_max <= 6:
        raise ValueError("k_max must lie in 1..6")
    d = A.dim
    rng = np.random.default_rng(seed)
    if step is None:
        pitch = A.info.get("grid_pitch", 0.0) if A.info else 0.0
        step = max(2e-3, 16 * pitch)
    if d == 1:
        n_points = n_points or 4096
        base = np.linspace(0.0, A.support_bound + 0.1, n_points)[:, None]
    else:
        n_points = n_points or 4096
        base = rng.uniform(0.0, A.support_bound + 0.1, size=(n_points, d))
    out = []
    for k in range(1, k_max + 1):
        best = 0.0
        for j in range(d):
            unit = np.eye(d)[j]
            acc = np.zeros(len(base))
            for i in range(k + 1):
                coef = (-1) ** i * math.comb(k, i)
                acc += coef * A.at_points(base + (0.5 * k - i) * step * unit)
            best = max(best, float(np.max(np.abs(acc))) / step ** k / math.factorial(k))
        env = A.gauge.envelope(k) if A.gauge is not None else None
        out.append((k, best, env))
    return out
