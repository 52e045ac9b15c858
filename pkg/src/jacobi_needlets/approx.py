"""Greedy n-term needlet approximation and the Jackson-rate table."""
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .cubature import lp_norm
from .frame import NeedletCoefficients, analyze, level_needlet_norms, synthesize
from .jacobi_poly import JacobiPair, gauss_jacobi, jacobi_norm, orthonormal_table
from .tensor import JacobiExpansion

__all__ = [
    "ApproxRun",
    "abs_power_target",
    "bs_tau_norm",
    "greedy_nterm",
    "jackson_table",
    "term_norms",
]


def _abs_power_coeffs(pair, degree, shift, gamma, n_nodes):
    """``int |x - a|^gamma P~_k(x) w(x) dx`` for ``k <= degree``.

    Each side of ``a`` is mapped to [-1, 1] so that the rule's Jacobi
    weight carries both the singular factor at ``a`` and the endpoint factor.
    """
    out = np.zeros(degree + 1)
    a = shift
    if a < 1.0:  # [a, 1]: x = a + (1 - a)(1 + t)/2
        h = 0.5 * (1.0 - a)
        r = gauss_jacobi(n_nodes, JacobiPair(pair.alpha, gamma))
        x = a + h * (1.0 + r.nodes)
        scale = h ** (gamma + pair.alpha + 1.0)
        w = r.weights * scale * (1.0 + x) ** pair.beta
        out += orthonormal_table(degree, pair, x) @ w
    if a > -1.0:  # [-1, a]: x = a - (1 + a)(1 - t)/2
        h = 0.5 * (1.0 + a)
        r = gauss_jacobi(n_nodes, JacobiPair(gamma, pair.beta))
        x = a - h * (1.0 - r.nodes)
        scale = h ** (gamma + pair.beta + 1.0)
        w = r.weights * scale * (1.0 - x) ** pair.alpha
        out += orthonormal_table(degree, pair, x) @ w
    return out


def abs_power_target(params, degree, shift=0.0, gamma=0.5, axis=0):
    """Truncated expansion of ``x -> |x_axis - shift|^gamma`` to degree ``degree``.

    The function is constant in the other coordinates, whose coefficient is
    ``h_0^(1/2)`` each. Coefficients come from Gauss-Jacobi rules that absorb
    the singularity, with enough nodes to integrate the polynomial part exactly.
    """
    if not -1.0 <= shift <= 1.0:
        raise ValueError("shift must lie in [-1, 1]")
    pairs = params.pairs
    n_nodes = degree // 2 + 64
    c1 = _abs_power_coeffs(pairs[axis], degree, shift, gamma, n_nodes)
    shape = tuple(degree + 1 if i == axis else 1 for i in range(params.d))
    coeffs = c1.reshape(shape)
    for i, p in enumerate(pairs):
        if i != axis:
            coeffs = coeffs * math.sqrt(jacobi_norm(0, p))
    return JacobiExpansion(params, coeffs)


def term_norms(frame, coeffs, p):
    """``||<f, psi_xi> psi_xi||_p`` for all stored coefficients, level by level."""
    out = {}
    for j, h in coeffs.values.items():
        norms, _ = level_needlet_norms(frame, j, p)
        out[j] = np.abs(h) * norms
    return out


@dataclass(eq=False)
class ApproxRun:
    """Greedy approximation of ``f`` by needlet terms ranked by their ``L^p`` size."""

    frame: object
    f: object
    p: float = 2.0
    n_list: tuple = ()
    ranking: str = "by_term_lp_norm"
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.frame.tight:
            raise ValueError("greedy approximation needs a tight frame")
        if self.frame.is_complex:
            raise ValueError("greedy approximation needs real needlets")
        if self.ranking != "by_term_lp_norm":
            raise ValueError(f"unknown ranking {self.ranking!r}")

    @cached_property
    def coeffs(self):
        return analyze(self.frame, self.f)

    @cached_property
    def norms(self):
        return term_norms(self.frame, self.coeffs, self.p)

    @cached_property
    def order(self):
        """``(levels, flat indices)`` sorted by decreasing term norm.

        Ties go to the lower level, then to the smaller flat index.
        """
        js, idx, vals = [], [], []
        for j in sorted(self.norms):
            flat = self.norms[j].reshape(-1)
            nz = np.flatnonzero(self.coeffs.values[j].reshape(-1))
            js.append(np.full(len(nz), j))
            idx.append(nz)
            vals.append(flat[nz])
        if not js:
            return np.zeros(0, dtype=int), np.zeros(0, dtype=int)
        js, idx, vals = (np.concatenate(a) for a in (js, idx, vals))
        perm = np.lexsort((idx, js, -vals))
        return js[perm], idx[perm]

    @property
    def nnz(self):
        return len(self.order[0])

    def kept(self, n):
        """Coefficients of the ``n`` largest terms."""
        js, idx = self.order
        values = {}
        for j in np.unique(js[:n]):
            sel = idx[:n][js[:n] == j]
            src = self.coeffs.values[int(j)].reshape(-1)
            arr = np.zeros_like(src)
            arr[sel] = src[sel]
            values[int(j)] = arr.reshape(self.coeffs.values[int(j)].shape)
        return NeedletCoefficients(self.frame, values)


def greedy_nterm(run, n):
    """Approximant from the ``n`` largest terms and its ``L^p`` error."""
    if n < 1:
        raise ValueError("n must be at least 1")
    g = synthesize(run.frame, run.kept(n))
    return g, lp_norm(run.f - g, run.p)


def bs_tau_norm(f, s, p, frame, tau=None):
    """``(sum_xi ||<f, psi_xi> psi_xi||_p^tau)^(1/tau)`` with ``1/tau = s/d + 1/p``."""
    expected = 1.0 / (s / frame.d + 1.0 / p)
    if tau is not None and not math.isclose(tau, expected, rel_tol=1e-12):
        raise ValueError(f"tau must satisfy 1/tau = s/d + 1/p, i.e. tau = {expected}")
    tau = expected
    norms = term_norms(frame, analyze(frame, f), p)
    total = sum(float(np.sum(v ** tau)) for v in norms.values())
    return total ** (1.0 / tau)


def jackson_table(run, s, n_list=None):
    """Rows ``(n, error, error n^(s/d) / ||f||_{B^s_tau})`` over the budgets."""
    n_list = run.n_list if n_list is None else n_list
    bnorm = bs_tau_norm(run.f, s, run.p, run.frame)
    rows = []
    for n in n_list:
        _, err = greedy_nterm(run, int(n))
        rows.append((int(n), err, err * n ** (s / run.frame.d) / bnorm))
    return rows
