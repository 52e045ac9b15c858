"""Localized tensor-product Jacobi kernels and their diagnostics.

``Lambda_n(x, y) = sum_nu A(nu / n) P~_nu(x) P~_nu(y)`` with ``supp A`` inside
``[0, 2]^d``, so only modes ``nu`` in ``[0, 2n)^d`` contribute. Kernels are
evaluated either densely over that mode box or, for separable cutoffs, as
sums of products of univariate kernel sums.
"""
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .cubature import build_level, oversampled_level
from .tensor import (
    JacobiExpansion,
    TensorJacobiParams,
    mode_apply,
    mode_grid,
    rho,
    univariate_table,
    weight_W,
)

__all__ = [
    "DENSE_MODE_CAP",
    "DecayProfile",
    "JacobiExpansion",
    "KernelSpec",
    "LipProfile",
    "NikolskiReport",
    "TensorJacobiParams",
    "decay_profile",
    "eval_kernel",
    "kernel_l2_row",
    "kernel_l2_row_cubature",
    "kernel_row_expansion",
    "lip_profile",
    "lip_triples",
    "nikolski_check",
    "reproduction_error",
    "rho",
    "spectral_convolve",
    "stratified_pairs",
    "subexp_constant_search",
    "subexp_profile",
    "w_comparability",
    "weight_W",
]

DENSE_MODE_CAP = 2 ** 24
# pairs with |Lambda| below this multiple of n^d are skipped in normalized profiles
ZERO_FLOOR = 1e-13


@dataclass(frozen=True, eq=False)
class KernelSpec:
    params: TensorJacobiParams
    cutoff: object
    scale_n: int

    def __post_init__(self):
        if self.cutoff.dim != self.params.d:
            raise ValueError(f"cutoff dimension {self.cutoff.dim} != d = {self.params.d}")
        if int(self.scale_n) < 1:
            raise ValueError("scale_n must be a positive integer")

    @property
    def d(self):
        return self.params.d

    @property
    def modes(self):
        """Number of modes per axis, ``2n``."""
        return 2 * int(self.scale_n)

    @property
    def dense_allowed(self):
        return self.modes ** self.d <= DENSE_MODE_CAP

    @cached_property
    def mode_values(self):
        """``A(nu / n)`` on the mode box ``[0, 2n)^d``."""
        if not self.dense_allowed:
            raise MemoryError(
                f"(2n)^d = {self.modes ** self.d} exceeds the dense cap {DENSE_MODE_CAP}; "
                "use a separable cutoff")
        pts = mode_grid((self.modes,) * self.d, 1.0 / self.scale_n)
        vals = self.cutoff.at_points(pts)
        vals.setflags(write=False)
        return vals

    @cached_property
    def factor_values(self):
        """Separable form as a list of ``(weight, [vector per axis])`` over ``k < 2n``."""
        sep = self.cutoff.separable
        if sep is None:
            return None
        k = np.arange(self.modes, dtype=float) / self.scale_n
        return [(w, [f(s * k) for f in fs]) for w, s, fs in sep]

    def tables(self, x):
        """Per-axis tables ``P~_k(x_i)``, ``k < 2n``, for points ``x`` of shape ``(N, d)``."""
        return [univariate_table(p, self.modes - 1, x[:, i])
                for i, p in enumerate(self.params.pairs)]


def _contract_dense(A, U):
    """``sum_nu A[nu] prod_i U_i[nu_i, :]`` for per-axis arrays ``U_i`` of shape ``(K, N)``."""
    res = np.tensordot(A, U[-1], axes=([A.ndim - 1], [0]))
    for i in range(len(U) - 2, -1, -1):
        res = np.einsum("k...n,kn->...n", np.moveaxis(res, i, 0), U[i])
    return res


def _contract_separable(terms, U):
    out = 0.0
    for w, vecs in terms:
        prod = w
        for v, u in zip(vecs, U):
            prod = prod * (v @ u)
        out = out + prod
    return out


def _pick_method(spec, method):
    if method == "auto":
        return "factorized" if spec.factor_values is not None else "dense"
    if method == "factorized" and spec.factor_values is None:
        raise ValueError("cutoff has no separable representation")
    if method not in ("dense", "factorized"):
        raise ValueError(f"unknown method {method!r}")
    return method


def _pairs_flat(spec, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    lead = x.shape[:-1]
    return x.reshape(-1, spec.d), y.reshape(-1, spec.d), lead


def eval_kernel(spec, x, y, method="auto", chunk=4096):
    """``Lambda_n(x, y)`` for paired points (coordinates on the last axis, broadcast)."""
    X, Y, lead = _pairs_flat(spec, x, y)
    method = _pick_method(spec, method)
    out = np.empty(len(X), dtype=complex if np.iscomplexobj(spec.cutoff.at_points(
        np.zeros(spec.d))) else float)
    for s in range(0, len(X), chunk):
        sl = slice(s, s + chunk)
        U = [tx * ty for tx, ty in zip(spec.tables(X[sl]), spec.tables(Y[sl]))]
        if method == "dense":
            out[sl] = _contract_dense(spec.mode_values, U)
        else:
            out[sl] = _contract_separable(spec.factor_values, U)
    return out.reshape(lead)


def kernel_row_expansion(spec, y):
    """Coefficients of ``Lambda_n(., y)``: ``A(nu/n) P~_nu(y)`` on the mode box."""
    y = np.asarray(y, dtype=float).reshape(1, spec.d)
    T = [t[:, 0] for t in spec.tables(y)]
    outer = T[0]
    for t in T[1:]:
        outer = np.multiply.outer(outer, t)
    return JacobiExpansion(spec.params, spec.mode_values * outer)


def reproduction_error(spec, points, max_l1=None):
    """Largest ``|int Lambda_n(x, y) P~_nu(y) w(y) dy - A(nu/n) P~_nu(x)|``.

    The integral is taken with the tensor Gauss rule of ``2n`` nodes per axis,
    exact for the integrand's degree; the comparison runs over all ``nu`` in
    the mode box, or over ``|nu|_1 <= max_l1`` when given (where a type-(a)
    cutoff equals 1, so the identity is plain reproduction).
    """
    from .cubature import univariate_rule

    n_nodes = spec.modes
    rules = [univariate_rule(n_nodes, p) for p in spec.params.pairs]
    analysis = [univariate_table(p, spec.modes - 1, r.nodes) * r.weights
                for p, r in zip(spec.params.pairs, rules)]
    synth = [univariate_table(p, spec.modes - 1, r.nodes).T
             for p, r in zip(spec.params.pairs, rules)]
    points = np.atleast_2d(np.asarray(points, dtype=float))
    mask = None
    if max_l1 is not None:
        grids = np.meshgrid(*[np.arange(spec.modes)] * spec.d, indexing="ij")
        mask = np.sum(grids, axis=0) <= max_l1
    worst = 0.0
    for x in points:
        row = kernel_row_expansion(spec, x)
        values = mode_apply(row.coeffs, synth)
        recovered = mode_apply(values, analysis)
        T = [t[:, 0] for t in spec.tables(x.reshape(1, -1))]
        target = T[0]
        for t in T[1:]:
            target = np.multiply.outer(target, t)
        if mask is not None:
            err = np.abs(recovered - target)[mask]
        else:
            err = np.abs(recovered - spec.mode_values * target)
        worst = max(worst, float(np.max(err)))
    return worst


def _square_terms(terms):
    out = []
    for wa, va in terms:
        for wb, vb in terms:
            out.append((wa * np.conj(wb), [a * np.conj(b) for a, b in zip(va, vb)]))
    return out


def kernel_l2_row(spec, x, method="auto"):
    """``int |Lambda_n(x, y)|^2 w(y) dy = sum_nu |A(nu/n)|^2 P~_nu(x)^2`` (Parseval form)."""
    x = np.asarray(x, dtype=float)
    lead = x.shape[:-1]
    X = x.reshape(-1, spec.d)
    U = [t * t for t in spec.tables(X)]
    method = _pick_method(spec, method)
    if method == "dense":
        out = _contract_dense(np.abs(spec.mode_values) ** 2, U)
    else:
        out = np.real(_contract_separable(_square_terms(spec.factor_values), U))
    return np.asarray(out).reshape(lead)


def kernel_l2_row_cubature(spec, x):
    """The same integral by the tensor Gauss rule with ``2n`` nodes per axis."""
    from .cubature import univariate_rule

    rules = [univariate_rule(spec.modes, p) for p in spec.params.pairs]
    synth = [univariate_table(p, spec.modes - 1, r.nodes).T
             for p, r in zip(spec.params.pairs, rules)]
    w = rules[0].weights
    for r in rules[1:]:
        w = np.multiply.outer(w, r.weights)
    row = kernel_row_expansion(spec, x)
    vals = mode_apply(row.coeffs, synth)
    return float(np.sum(w * np.abs(vals) ** 2))


def spectral_convolve(cutoff, j, f):
    """Coefficients of ``Phi_j * f``: ``A(nu / 2^(j-1)) f_nu`` for ``j >= 1``, ``f_0`` only for ``j = 0``."""
    if j < 0:
        raise ValueError("level must be nonnegative")
    out = np.zeros_like(f.coeffs)
    if j == 0:
        out[(0,) * f.params.d] = f.coeffs[(0,) * f.params.d]
        return JacobiExpansion(f.params, out)
    pts = mode_grid(f.shape, 1.0 / 2.0 ** (j - 1))
    return JacobiExpansion(f.params, cutoff.at_points(pts) * f.coeffs)


def stratified_pairs(d, n, rng, per_stratum=64, endpoint_prob=0.25):
    """Point pairs with ``rho`` spread over dyadic strata ``[2^-(j+1) pi, 2^-j pi]``.

    Strata run over ``j = 0..ceil(log2 n)``. In each pair one coordinate
    realizes the distance; with probability ``endpoint_prob`` the other
    coordinates of both points are put on a common endpoint (+-1), where
    kernels built from non-flat cutoffs fail to localize.
    """
    strata = int(math.ceil(math.log2(max(n, 2)))) + 1
    xs, ys = [], []
    for j in range(strata):
        m = per_stratum
        r = math.pi * 2.0 ** -j * rng.uniform(0.5, 1.0, m)
        tx = rng.uniform(0.0, math.pi, (m, d))
        off = rng.uniform(-1.0, 1.0, (m, d)) * r[:, None]
        ty = np.clip(tx + off, 0.0, math.pi)
        k = rng.integers(0, d, m)
        start = rng.uniform(0.0, 1.0, m) * (math.pi - r)
        tx[np.arange(m), k] = start
        ty[np.arange(m), k] = start + r
        snap = rng.uniform(size=(m, d)) < endpoint_prob
        snap[np.arange(m), k] = False
        ends = np.where(rng.uniform(size=(m, d)) < 0.5, 0.0, math.pi)
        tx = np.where(snap, ends, tx)
        ty = np.where(snap, ends, ty)
        swap = rng.uniform(size=m) < 0.5
        tx[swap], ty[swap] = ty[swap].copy(), tx[swap].copy()
        xs.append(np.cos(tx))
        ys.append(np.cos(ty))
    return np.vstack(xs), np.vstack(ys)


@dataclass(frozen=True)
class DecayProfile:
    n: int
    sigma: float
    C_emp: float
    argmax_x: tuple
    argmax_y: tuple
    rho_at_max: float
    rho: np.ndarray = field(repr=False)
    normalized: np.ndarray = field(repr=False)
    excluded: int = 0


def _normalized_abs(spec, X, Y, method):
    n = spec.scale_n
    lam = eval_kernel(spec, X, Y, method=method)
    mag = np.abs(lam)
    keep = mag >= ZERO_FLOOR * n ** spec.d
    base = mag * np.sqrt(weight_W(n, X, spec.params) * weight_W(n, Y, spec.params)) / n ** spec.d
    return base, keep, rho(X, Y)


def _profile(spec, X, Y, factor, sigma, method):
    base, keep, r = _normalized_abs(spec, X, Y, method)
    vals = np.where(keep, base * factor(r), 0.0)
    k = int(np.argmax(vals))
    return DecayProfile(spec.scale_n, sigma, float(vals[k]),
                        tuple(float(v) for v in X[k]), tuple(float(v) for v in Y[k]),
                        float(r[k]), r, vals, int(np.sum(~keep)))


def decay_profile(spec, sigma, sample, method="auto"):
    """``C_emp = max |Lambda_n| sqrt(W(n;x) W(n;y)) (1 + n rho)^sigma / n^d`` over a sample."""
    X, Y = (np.asarray(s, dtype=float) for s in sample)
    n = spec.scale_n
    return _profile(spec, X, Y, lambda r: (1.0 + n * r) ** sigma, sigma, method)


def subexp_profile(spec, gauge, c_tilde, sample, method="auto"):
    """Like ``decay_profile`` with the factor ``exp(c_tilde n rho / L(n rho))``."""
    X, Y = (np.asarray(s, dtype=float) for s in sample)
    n = spec.scale_n

    def factor(r):
        u = n * r
        return np.exp(c_tilde * u / gauge(u))

    return _profile(spec, X, Y, factor, float("nan"), method)


def subexp_constant_search(specs, gauge, samples, band=4.0, c_max=64.0, iters=40,
                           method="auto"):
    """Largest ``c_tilde`` in ``[0, c_max]`` keeping the exp-normalized profile in a band.

    "In the band" means ``C(n) / C(n_0)`` lies in ``[1/band, band]`` for every
    scale, with ``n_0`` the first. The profile at a given ``c_tilde`` reuses
    the kernel values, so the bisection costs one kernel pass per scale.
    Returns ``(c_tilde, constants_at_c_tilde)``; ``c_tilde = 0`` with the
    band violated means no admissible constant was found.
    """
    cached = []
    for spec, sample in zip(specs, samples):
        X, Y = (np.asarray(s, dtype=float) for s in sample)
        base, keep, r = _normalized_abs(spec, X, Y, method)
        u = spec.scale_n * r
        cached.append((np.where(keep, base, 0.0), u / gauge(u)))

    def constants(c):
        return np.array([float(np.max(b * np.exp(c * e))) for b, e in cached])

    def ok(c):
        C = constants(c)
        q = C / C[0]
        return bool(np.all(q <= band) and np.all(q >= 1.0 / band))

    if not ok(0.0):
        return 0.0, constants(0.0)
    if ok(c_max):
        return c_max, constants(c_max)
    lo, hi = 0.0, c_max
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo, constants(lo)


@dataclass(frozen=True)
class LipProfile:
    n: int
    sigma: float
    C_emp: float
    differences: np.ndarray = field(repr=False)
    rho_x_xi: np.ndarray = field(repr=False)
    normalized: np.ndarray = field(repr=False)


def lip_triples(d, n, rng, per_stratum=32, c_star=0.5, endpoint_prob=0.25):
    """``(x, xi, y)`` with ``rho(x, xi) <= c_star / n`` and ``(x, y)`` stratified in rho."""
    X, Y = stratified_pairs(d, n, rng, per_stratum, endpoint_prob)
    tx = np.arccos(X)
    dt = rng.uniform(-1.0, 1.0, X.shape) * (c_star / n)
    txi = np.clip(tx + dt, 0.0, math.pi)
    return X, np.cos(txi), Y


def lip_profile(spec, sigma, triples, method="auto"):
    """``max |Lambda(x,y) - Lambda(xi,y)| sqrt(W(x)W(y)) (1+n rho(x,y))^sigma / (n^(d+1) rho(x,xi))``."""
    X, XI, Y = (np.asarray(s, dtype=float) for s in triples)
    n = spec.scale_n
    diff = np.abs(eval_kernel(spec, X, Y, method=method) - eval_kernel(spec, XI, Y, method=method))
    rxx = rho(X, XI)
    ww = np.sqrt(weight_W(n, X, spec.params) * weight_W(n, Y, spec.params))
    with np.errstate(divide="ignore", invalid="ignore"):
        norm = np.where(rxx > 0, diff * ww * (1.0 + n * rho(X, Y)) ** sigma
                        / (n ** (spec.d + 1) * rxx), 0.0)
    return LipProfile(n, sigma, float(np.max(norm)), diff, rxx, norm)


def w_comparability(n, X, Y, params):
    """Largest ``W(n;x) / (W(n;y) (1 + n rho)^(d + 2 sum max(alpha_i, beta_i)))`` over pairs."""
    e = params.d + 2 * sum(max(p.alpha, p.beta) for p in params.pairs)
    q = weight_W(n, X, params) / (weight_W(n, Y, params) * (1.0 + n * rho(X, Y)) ** e)
    return float(np.max(q))


@dataclass(frozen=True)
class NikolskiReport:
    ratio: float
    exponent: float
    norm_p: float
    norm_q: float
    n: int


def _weighted_norm(g, p, n, power):
    """``|| W(n; .)^power g ||_p`` on the oversampled cubature of g."""
    if power == 0:
        from .cubature import lp_norm
        return lp_norm(g, p)
    cub = build_level(oversampled_level(max(g.max_degree(), 0)), g.params)
    if p == math.inf:
        axes = [np.concatenate(([1.0], a, [-1.0])) for a in cub.axis_nodes]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        vals = np.abs(g.evaluate_grid(axes)) * weight_W(n, mesh, g.params) ** power
        return float(np.max(vals))
    mesh = cub.nodes.reshape(cub.grid_shape + (g.params.d,))
    vals = np.abs(g.evaluate_grid(cub.axis_nodes)) * weight_W(n, mesh, g.params) ** power
    w = cub.weights.reshape(cub.grid_shape)
    return float(np.sum(w * vals ** p) ** (1.0 / p))


def nikolski_check(g, p, q, n=None, s=None):
    """Ratio of ``||g||_p`` to ``n^e ||g||_q`` for ``g`` of degree ``n``.

    Unweighted: ``e = (2d + 2 sum_i min(0, max(alpha_i, beta_i))) (1/q - 1/p)``.
    With ``s`` given, the weighted form
    ``||W^s g||_p / (n^(d(1/q-1/p)) ||W^(s+1/p-1/q) g||_q)`` is reported instead.
    """
    if not (0 < q <= p):
        raise ValueError("need 0 < q <= p")
    params = g.params
    n = max(1, g.total_degree()) if n is None else int(n)
    inv = (1.0 / q) - (0.0 if p == math.inf else 1.0 / p)
    if s is None:
        e = (2 * params.d + 2 * sum(min(0.0, max(pr.alpha, pr.beta))
                                    for pr in params.pairs)) * inv
        num = _weighted_norm(g, p, n, 0.0)
        den = _weighted_norm(g, q, n, 0.0)
    else:
        e = params.d * inv
        inv_p = 0.0 if p == math.inf else 1.0 / p
        num = _weighted_norm(g, p, n, s)
        den = _weighted_norm(g, q, n, s + inv_p - 1.0 / q)
    return NikolskiReport(num / (n ** e * den), e, num, den, n)
