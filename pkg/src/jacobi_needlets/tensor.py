"""Tensor-product Jacobi setting on [-1, 1]^d: parameters, expansions, W and rho."""
import threading
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from .jacobi_poly import JacobiPair, jacobi_norm, jacobi_weight, orthonormal_table

__all__ = [
    "JacobiExpansion",
    "TensorJacobiParams",
    "mode_apply",
    "rho",
    "univariate_table",
    "weight_W",
]


@dataclass(frozen=True)
class TensorJacobiParams:
    """One Jacobi exponent pair per coordinate."""

    pairs: tuple

    def __post_init__(self):
        pairs = tuple(p if isinstance(p, JacobiPair) else JacobiPair(*p) for p in self.pairs)
        if not pairs:
            raise ValueError("need at least one coordinate")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def uniform(cls, d, alpha=0.0, beta=0.0):
        return cls(tuple(JacobiPair(alpha, beta) for _ in range(d)))

    @classmethod
    def from_lists(cls, alphas, betas):
        if len(alphas) != len(betas):
            raise ValueError("alpha and beta lists differ in length")
        return cls(tuple(JacobiPair(a, b) for a, b in zip(alphas, betas)))

    @property
    def d(self):
        return len(self.pairs)

    def total_mass(self):
        """``mu([-1, 1]^d) = prod_i h_0``."""
        return float(np.prod([jacobi_norm(0, p) for p in self.pairs]))

    def weight(self, x):
        """Product weight ``w_{alpha,beta}(x)`` for points with coordinates on the last axis."""
        x = np.asarray(x, dtype=float)
        out = np.ones(x.shape[:-1])
        for i, p in enumerate(self.pairs):
            out = out * jacobi_weight(p, x[..., i])
        return out


def weight_W(n, x, params):
    """``W(n; x) = prod_i (1 - x_i + n^-2)^(alpha_i + 1/2) (1 + x_i + n^-2)^(beta_i + 1/2)``.

    ``W(0; x) = 1`` by convention. Coordinates sit on the last axis of ``x``.
    """
    x = np.asarray(x, dtype=float)
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return np.ones(x.shape[:-1]) if x.ndim else 1.0
    eps = 1.0 / float(n) ** 2
    out = np.ones(x.shape[:-1])
    for i, p in enumerate(params.pairs):
        xi = x[..., i]
        out = out * (1.0 - xi + eps) ** (p.alpha + 0.5) * (1.0 + xi + eps) ** (p.beta + 0.5)
    return out


def rho(x, y):
    """Distance ``max_j |arccos x_j - arccos y_j|``."""
    x = np.clip(np.asarray(x, dtype=float), -1.0, 1.0)
    y = np.clip(np.asarray(y, dtype=float), -1.0, 1.0)
    return np.max(np.abs(np.arccos(x) - np.arccos(y)), axis=-1)


class _TableCache:
    """Byte-budgeted LRU for univariate tables keyed by (pair, degree, points)."""

    def __init__(self, budget_bytes=256 * 2 ** 20):
        self.budget = budget_bytes
        self.used = 0
        self.entries = OrderedDict()
        self.lock = threading.Lock()

    def get(self, pair, n_max, x):
        key = (pair.alpha, pair.beta, int(n_max), x.shape, x.tobytes())
        with self.lock:
            hit = self.entries.get(key)
            if hit is not None:
                self.entries.move_to_end(key)
                return hit
        table = orthonormal_table(n_max, pair, x)
        table.setflags(write=False)
        if table.nbytes <= self.budget // 4:
            with self.lock:
                if key not in self.entries:
                    self.entries[key] = table
                    self.used += table.nbytes
                while self.used > self.budget and self.entries:
                    _, old = self.entries.popitem(last=False)
                    self.used -= old.nbytes
        return table

    def clear(self):
        with self.lock:
            self.entries.clear()
            self.used = 0


_CACHE = _TableCache()


def univariate_table(pair, n_max, x):
    """Cached ``P~_k(x)`` for ``k = 0..n_max``; shape ``(n_max + 1,) + x.shape``. Read-only."""
    x = np.ascontiguousarray(np.asarray(x, dtype=float))
    return _CACHE.get(pair, n_max, x)


def mode_apply(C, mats):
    """Apply ``mats[i]`` (shape ``(m_i, k_i)``) along axis ``i`` of ``C``; ``None`` skips an axis."""
    out = C
    for i, M in enumerate(mats):
        if M is None:
            continue
        out = np.moveaxis(np.tensordot(M, out, axes=([1], [i])), 0, i)
    return out


class JacobiExpansion:
    """Finite expansion ``f = sum_nu f_nu P~_nu`` stored as a dense coefficient array.

    ``coeffs[nu]`` is the coefficient of the tensor polynomial with
    multi-index ``nu``; the array shape bounds the degree per coordinate.
    """

    __slots__ = ("params", "coeffs")

    def __init__(self, params, coeffs):
        coeffs = np.asarray(coeffs)
        if coeffs.ndim != params.d:
            raise ValueError(f"coefficient array must have {params.d} axes, got {coeffs.ndim}")
        if not np.issubdtype(coeffs.dtype, np.complexfloating):
            coeffs = coeffs.astype(float)
        self.params = params
        self.coeffs = coeffs

    @classmethod
    def zeros(cls, params, shape, dtype=float):
        return cls(params, np.zeros(tuple(shape), dtype=dtype))

    @classmethod
    def from_dict(cls, params, mapping, shape=None):
        keys = list(mapping)
        if shape is None:
            shape = tuple(max([k[i] for k in keys], default=0) + 1 for i in range(params.d))
        dtype = complex if any(np.iscomplexobj(v) for v in mapping.values()) else float
        out = np.zeros(shape, dtype=dtype)
        for k, v in mapping.items():
            out[tuple(k)] = v
        return cls(params, out)

    @classmethod
    def random(cls, params, degree, rng, total_degree=None, decay=0.0):
        """Gaussian coefficients up to ``degree`` per coordinate.

        With ``total_degree`` the support is cut to ``|nu|_1 <= total_degree``;
        ``decay`` scales coefficient nu by ``(1 + |nu|_1)^-decay``.
        """
        shape = (degree + 1,) * params.d
        c = rng.standard_normal(shape)
        l1 = _l1_grid(shape)
        if total_degree is not None:
            c = np.where(l1 <= total_degree, c, 0.0)
        if decay:
            c = c * (1.0 + l1) ** (-decay)
        return cls(params, c)

    @property
    def shape(self):
        return self.coeffs.shape

    @property
    def degrees(self):
        """Per-coordinate maximal index with a nonzero coefficient."""
        nz = np.nonzero(self.coeffs)
        return tuple(int(a.max()) if a.size else 0 for a in nz)

    def total_degree(self):
        """Largest ``|nu|_1`` with a nonzero coefficient (0 for the zero expansion)."""
        nz = np.nonzero(self.coeffs)
        if not nz[0].size:
            return 0
        return int(np.max(np.sum(np.stack(nz), axis=0)))

    def max_degree(self):
        return max(self.degrees)

    def to_dict(self):
        return {tuple(int(i) for i in idx): self.coeffs[idx]
                for idx in zip(*np.nonzero(self.coeffs))}

    def padded(self, shape):
        """Copy with coefficient array enlarged (or cropped) to ``shape``."""
        out = np.zeros(tuple(shape), dtype=self.coeffs.dtype)
        sl = tuple(slice(0, min(a, b)) for a, b in zip(shape, self.coeffs.shape))
        out[sl] = self.coeffs[sl]
        return JacobiExpansion(self.params, out)

    def trimmed(self):
        shape = tuple(k + 1 for k in self.degrees)
        return self.padded(shape)

    def l2_norm(self):
        """``||f||_2`` by Parseval."""
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def evaluate(self, x):
        """Values at points with coordinates on the last axis."""
        x = np.asarray(x, dtype=float)
        lead = x.shape[:-1]
        pts = x.reshape(-1, self.params.d)
        tables = [univariate_table(p, k - 1, pts[:, i])
                  for i, (p, k) in enumerate(zip(self.params.pairs, self.shape))]
        res = self.coeffs
        # contract the last axis first, keeping the point axis at the end
        res = np.tensordot(res, tables[-1], axes=([res.ndim - 1], [0]))
        for i in range(self.params.d - 2, -1, -1):
            res = np.einsum("k...n,kn->...n", np.moveaxis(res, i, 0), tables[i])
        return res.reshape(lead)

    def evaluate_grid(self, axes):
        """Values on the tensor grid ``axes[0] x ... x axes[d-1]``."""
        mats = [univariate_table(p, k - 1, np.asarray(a, dtype=float)).T
                for p, k, a in zip(self.params.pairs, self.shape, axes)]
        return mode_apply(self.coeffs, mats)

    def _check(self, other):
        if not isinstance(other, JacobiExpansion) or other.params != self.params:
            raise ValueError("expansions live on different parameter sets")

    def _aligned(self, other):
        shape = tuple(max(a, b) for a, b in zip(self.shape, other.shape))
        return self.padded(shape).coeffs, other.padded(shape).coeffs

    def __add__(self, other):
        self._check(other)
        a, b = self._aligned(other)
        return JacobiExpansion(self.params, a + b)

    def __sub__(self, other):
        self._check(other)
        a, b = self._aligned(other)
        return JacobiExpansion(self.params, a - b)

    def __mul__(self, scalar):
        return JacobiExpansion(self.params, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return JacobiExpansion(self.params, -self.coeffs)

    def __repr__(self):
        return f"JacobiExpansion(d={self.params.d}, shape={self.shape})"


def _l1_grid(shape):
    grids = np.meshgrid(*[np.arange(k) for k in shape], indexing="ij")
    return np.sum(grids, axis=0) if grids else np.zeros(())


def l1_index_grid(shape):
    """``|nu|_1`` for every multi-index of an array of the given shape."""
    return _l1_grid(shape)


def mode_grid(shape, scale=1.0):
    """Points ``nu * scale`` for all ``nu`` in the index box, coordinates last."""
    grids = np.meshgrid(*[np.arange(k, dtype=float) for k in shape], indexing="ij")
    return np.stack(grids, axis=-1) * scale
