"""Multiscale tensor Gauss-Jacobi cubature, tiles, weighted measures and L^p norms."""
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .jacobi_poly import JacobiPair, gauss_jacobi
from .tensor import TensorJacobiParams, weight_W

__all__ = [
    "BudgetExceededError",
    "CubatureLevel",
    "ball_measure",
    "build_level",
    "interval_measure",
    "lp_norm",
    "maximal_indicator",
    "oversampled_level",
    "spectrum_level",
    "tile_measure",
]

NODE_BUDGET = 2 ** 22
OVERSAMPLING = 2
_SUB_NODES = 32


class BudgetExceededError(ValueError):
    """A cubature level would exceed the node budget."""


@lru_cache(maxsize=256)
def _rule(n, alpha, beta):
    r = gauss_jacobi(n, JacobiPair(alpha, beta))
    r.nodes.setflags(write=False)
    r.weights.setflags(write=False)
    return r


def univariate_rule(n, pair):
    return _rule(int(n), float(pair.alpha), float(pair.beta))


@dataclass(frozen=True, eq=False)
class CubatureLevel:
    """Tensor Gauss-Jacobi rule with ``2^(j+1)`` nodes per axis and its tiles.

    Nodes are flattened in C order of the per-axis indices; on each axis the
    nodes decrease, so the arccos coordinates increase.
    """

    level_j: int
    params: TensorJacobiParams
    axis_nodes: tuple
    axis_weights: tuple
    axis_breaks: tuple

    @property
    def per_axis(self):
        return 2 ** (self.level_j + 1)

    @property
    def node_count(self):
        return self.per_axis ** self.params.d

    @property
    def grid_shape(self):
        return (self.per_axis,) * self.params.d

    @cached_property
    def nodes(self):
        mesh = np.meshgrid(*self.axis_nodes, indexing="ij")
        return np.stack(mesh, axis=-1).reshape(-1, self.params.d)

    @cached_property
    def weights(self):
        return _outer(self.axis_weights).reshape(-1)

    @cached_property
    def tiles(self):
        """``(lo, hi)`` corner arrays of shape ``(N, d)`` for every tile."""
        lo_axes = [b[1:] for b in self.axis_breaks]
        hi_axes = [b[:-1] for b in self.axis_breaks]
        lo = np.stack(np.meshgrid(*lo_axes, indexing="ij"), axis=-1).reshape(-1, self.params.d)
        hi = np.stack(np.meshgrid(*hi_axes, indexing="ij"), axis=-1).reshape(-1, self.params.d)
        return lo, hi

    @cached_property
    def axis_tile_measures(self):
        return tuple(interval_measure(b[1:], b[:-1], p)
                     for b, p in zip(self.axis_breaks, self.params.pairs))

    @cached_property
    def tile_measures(self):
        return _outer(self.axis_tile_measures).reshape(-1)

    def W(self, n=None):
        """``W(n; xi)`` at all nodes, default ``n = 2^j``."""
        n = 2 ** self.level_j if n is None else n
        return weight_W(n, self.nodes, self.params)

    def integrate(self, values):
        """Cubature sum of values given on the node grid (flat or grid-shaped)."""
        return np.sum(self.weights * np.asarray(values).reshape(-1))


def _outer(factors):
    out = np.asarray(factors[0], dtype=float)
    for f in factors[1:]:
        out = np.multiply.outer(out, f)
    return out


@lru_cache(maxsize=64)
def _cached_level(j, params, budget):
    d = params.d
    n = 2 ** (j + 1)
    if n ** d > budget:
        raise BudgetExceededError(
            f"level {j} in dimension {d} has {n ** d} nodes, budget is {budget}")
    nodes, weights, breaks = [], [], []
    for pair in params.pairs:
        rule = univariate_rule(n, pair)
        nodes.append(rule.nodes)
        weights.append(rule.weights)
        mids = 0.5 * (rule.nodes[1:] + rule.nodes[:-1])
        b = np.concatenate(([1.0], mids, [-1.0]))
        b.setflags(write=False)
        breaks.append(b)
    return CubatureLevel(j, params, tuple(nodes), tuple(weights), tuple(breaks))


def build_level(j, params, budget=NODE_BUDGET):
    """Level-j cubature: exact for tensor polynomials of degree ``2^(j+2) - 1`` per axis."""
    if j < 0:
        raise ValueError("level must be nonnegative")
    return _cached_level(int(j), params, int(budget))


@lru_cache(maxsize=32)
def _legendre(n):
    r = gauss_jacobi(n, JacobiPair(0.0, 0.0))
    return r.nodes, r.weights


@lru_cache(maxsize=32)
def _endpoint_rule(a, b):
    r = gauss_jacobi(_SUB_NODES, JacobiPair(a, b))
    return r.nodes, r.weights


def _direct(a, b, pair):
    u, w = _legendre(_SUB_NODES)
    half = 0.5 * (b - a)
    t = 0.5 * (a + b)[..., None] + half[..., None] * u
    f = (1.0 - t) ** pair.alpha * (1.0 + t) ** pair.beta
    return half * np.sum(w * f, axis=-1)


def _upper_tail(x, pair):
    """``mu([x, 1])`` for ``x`` in [0, 1]; the singular factor goes into the rule."""
    u, w = _endpoint_rule(pair.alpha, 0.0)
    s = 0.5 * (1.0 - x)
    t = 1.0 - s[..., None] * (1.0 - u)
    return s ** (pair.alpha + 1.0) * np.sum(w * (1.0 + t) ** pair.beta, axis=-1)


def _lower_tail(x, pair):
    """``mu([-1, x])`` for ``x`` in [-1, 0]."""
    u, w = _endpoint_rule(0.0, pair.beta)
    s = 0.5 * (1.0 + x)
    t = -1.0 + s[..., None] * (1.0 + u)
    return s ** (pair.beta + 1.0) * np.sum(w * (1.0 - t) ** pair.alpha, axis=-1)


def _half_piece(a, b, pair, upper):
    """Measure of ``[a, b]`` inside [0, 1] (upper) or [-1, 0] (lower)."""
    length = b - a
    dist = (1.0 - b) if upper else (1.0 + a)
    near = dist < length
    out = np.zeros(a.shape)
    far = ~near & (length > 0)
    if np.any(far):
        out[far] = _direct(a[far], b[far], pair)
    if np.any(near):
        if upper:
            out[near] = _upper_tail(a[near], pair) - _upper_tail(b[near], pair)
        else:
            out[near] = _lower_tail(b[near], pair) - _lower_tail(a[near], pair)
    return out


def interval_measure(a, b, pair):
    """``int_a^b (1-t)^alpha (1+t)^beta dt`` for arrays of intervals in [-1, 1].

    Pieces far from the endpoints (relative to their length) use a 32-node
    Gauss-Legendre rule; pieces near an endpoint use a 32-node Gauss-Jacobi
    rule carrying the singular factor, differenced from the endpoint.
    """
    a = np.clip(np.asarray(a, dtype=float), -1.0, 1.0)
    b = np.clip(np.asarray(b, dtype=float), -1.0, 1.0)
    a, b = np.broadcast_arrays(np.minimum(a, b), np.maximum(a, b))
    lo_b = np.minimum(b, 0.0)
    hi_a = np.maximum(a, 0.0)
    out = np.zeros(a.shape)
    neg = a < 0.0
    if np.any(neg):
        out[neg] += _half_piece(a[neg], lo_b[neg], pair, upper=False)
    pos = b > 0.0
    if np.any(pos):
        out[pos] += _half_piece(hi_a[pos], b[pos], pair, upper=True)
    return out


def tile_measure(lo, hi, params):
    """``mu`` of axis-aligned boxes ``[lo, hi]`` (coordinates on the last axis)."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    out = np.ones(np.broadcast_shapes(lo.shape, hi.shape)[:-1])
    for i, pair in enumerate(params.pairs):
        out = out * interval_measure(lo[..., i], hi[..., i], pair)
    return out


def _gamma_exponents(y, params):
    y = np.asarray(y, dtype=float)
    return np.array([p.alpha if yi >= 0 else p.beta for yi, p in zip(y, params.pairs)])


def ball_measure(y, delta, params, method="bruteforce"):
    """``mu(B(y, delta))`` for the rho-ball, or the closed-form comparand.

    ``bruteforce`` integrates the weight over the arccos box;
    ``closed_form_comparand`` returns ``delta^d prod (sqrt(1-y_i^2) + delta)^(2 gamma_i + 1)``.
    """
    y = np.asarray(y, dtype=float)
    if not 0.0 < delta <= math.pi:
        raise ValueError("delta must lie in (0, pi]")
    if method == "closed_form_comparand":
        g = _gamma_exponents(y, params)
        return float(delta ** params.d * np.prod(
            (np.sqrt(1.0 - y ** 2) + delta) ** (2 * g + 1)))
    if method != "bruteforce":
        raise ValueError(f"unknown method {method!r}")
    phi = np.arccos(np.clip(y, -1.0, 1.0))
    lo = np.cos(np.minimum(phi + delta, math.pi))
    hi = np.cos(np.maximum(phi - delta, 0.0))
    return float(np.prod([interval_measure(lo[i], hi[i], p)
                          for i, p in enumerate(params.pairs)]))


def _theta_measures(thetas, pair):
    """Cumulative measure ``Phi(theta) = mu({arccos x <= theta})`` at sorted thetas."""
    x = np.cos(thetas)
    pieces = interval_measure(x[1:], x[:-1], pair)
    first = interval_measure(np.array([x[0]]), np.array([1.0]), pair)
    return np.concatenate((first, first[0] + np.cumsum(pieces)))


def _maximal_1d(theta_x, theta_y, r, pair, grid_level):
    lo_b = max(theta_y - r, 0.0)
    hi_b = min(theta_y + r, math.pi)
    grid = np.linspace(0.0, math.pi, 2 ** grid_level + 1)
    cand = np.unique(np.concatenate((grid, [lo_b, hi_b, theta_x])))
    phi = _theta_measures(cand, pair)
    lows = cand[cand <= theta_x]
    highs = cand[cand >= theta_x]
    P = dict(zip(cand.tolist(), phi.tolist()))
    plo = np.array([P[v] for v in lows.tolist()])
    phi_hi = np.array([P[v] for v in highs.tolist()])
    num_lo = np.maximum(lows, lo_b)
    num_hi = np.minimum(highs, hi_b)
    pnl = np.array([P[v] for v in num_lo.tolist()])
    pnh = np.array([P[v] for v in num_hi.tolist()])
    inter = np.maximum(pnh[None, :] - pnl[:, None], 0.0)
    inter = np.where(num_hi[None, :] > num_lo[:, None], inter, 0.0)
    total = phi_hi[None, :] - plo[:, None]
    valid = highs[None, :] > lows[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(valid & (total > 0), inter / total, 0.0)
    return float(min(np.max(ratio), 1.0))


def maximal_indicator(y, r, t, x, params, grid_level=10):
    """Maximal function of the indicator of ``B(y, r)`` at ``x``, by box search.

    Both the box and the rho-ball are products of intervals, so the supremum
    factorizes into univariate searches over intervals whose arccos endpoints
    lie on the grid ``k pi / 2^grid_level`` or at the ball edges or at x.

    Returns ``(search_value, comparand)``. The comparand uses, per coordinate,
    the distance from ``y_j`` to the endpoint whose exponent ``gamma_j`` is in
    force (``+1`` when ``y_j >= 0``, ``-1`` otherwise).
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if t <= 0:
        raise ValueError("t must be positive")
    if not 0.0 < r <= math.pi:
        raise ValueError("r must lie in (0, pi]")
    ty = np.arccos(np.clip(y, -1.0, 1.0))
    tx = np.arccos(np.clip(x, -1.0, 1.0))
    value = 1.0
    comparand = 1.0
    g = _gamma_exponents(y, params)
    for i, pair in enumerate(params.pairs):
        value *= _maximal_1d(tx[i], ty[i], r, pair, grid_level)
        dist = abs(tx[i] - ty[i])
        to_end = ty[i] if y[i] >= 0 else math.pi - ty[i]
        comparand *= (1.0 + dist / r) ** -1.0 * (1.0 + dist / (r + to_end)) ** -(2 * g[i] + 1)
    return value ** (1.0 / t), comparand ** (1.0 / t)


def spectrum_level(degree):
    """Smallest ``j >= 0`` with ``2^j > degree``."""
    j = 0
    while 2 ** j <= degree:
        j += 1
    return j


def oversampled_level(degree):
    """Cubature level used for non-Parseval L^p norms of degree-``degree`` expansions."""
    return spectrum_level(degree) + OVERSAMPLING


def lp_norm(f, p, level=None, budget=NODE_BUDGET):
    """Weighted ``||f||_p`` of a finite expansion.

    ``p = 2`` is exact (Parseval). Other finite ``p`` use the tensor cubature
    at ``oversampled_level``; ``p = inf`` takes the largest value on that node
    grid with the endpoints +-1 added on every axis.
    """
    if not (p == math.inf or p > 0):
        raise ValueError("p must be positive")
    if p == 2 and level is None:
        return f.l2_norm()
    if not np.any(f.coeffs):
        return 0.0
    j = oversampled_level(max(f.max_degree(), 0)) if level is None else level
    cub = build_level(j, f.params, budget=budget)
    if p == math.inf:
        axes = [np.concatenate(([1.0], a, [-1.0])) for a in cub.axis_nodes]
        return float(np.max(np.abs(f.evaluate_grid(axes))))
    vals = np.abs(f.evaluate_grid(cub.axis_nodes))
    w = _outer(cub.axis_weights)
    return float(np.sum(w * vals ** p) ** (1.0 / p))
