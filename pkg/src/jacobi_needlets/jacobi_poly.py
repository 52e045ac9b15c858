"""Orthonormal Jacobi polynomials and Gauss-Jacobi quadrature on [-1, 1].

Everything here is univariate. Polynomials are evaluated with the classical
three-term recurrence for ``P_n^{(alpha, beta)}`` and rescaled by
``h_n^{-1/2}`` so that they are orthonormal for the weight
``(1 - t)^alpha (1 + t)^beta``.
"""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln

__all__ = [
    "ConvergenceError",
    "DomainError",
    "JacobiPair",
    "QuadratureRule",
    "eval_orthonormal",
    "eval_orthonormal_deriv",
    "gauss_jacobi",
    "jacobi_norm",
    "jacobi_weight",
    "orthonormal_deriv_table",
    "orthonormal_table",
]

# t is accepted this far outside [-1, 1] to tolerate round-off in callers
_T_SLACK = 1e-12


class DomainError(ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class ConvergenceError(RuntimeError):
    """An iterative node computation did not reach its residual target."""


@dataclass(frozen=True)
class JacobiPair:
    """Exponent pair of the weight ``(1 - t)^alpha (1 + t)^beta``."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha >= -0.5 and self.beta >= -0.5):
            raise DomainError(
                f"Jacobi exponents must be >= -1/2, got ({self.alpha}, {self.beta})")

    def shifted(self, k=1):
        return JacobiPair(self.alpha + k, self.beta + k)


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss rule: ``sum(weights * f(nodes))`` integrates ``f w_{alpha,beta}``.

    Nodes are strictly decreasing, matching the ordering by increasing
    ``arccos`` of the nodes.
    """

    degree_n: int
    pair: JacobiPair
    nodes: np.ndarray
    weights: np.ndarray


def jacobi_weight(pair, t):
    t = np.asarray(t, dtype=float)
    return (1.0 - t) ** pair.alpha * (1.0 + t) ** pair.beta


def _log_norm(n, a, b):
    n = np.asarray(n, dtype=float)
    # n = 0 separately: the general formula is 0/0 when a + b + 1 = 0
    log_h0 = ((a + b + 1) * np.log(2.0) + gammaln(a + 1) + gammaln(b + 1)
              - gammaln(a + b + 2))
    safe = np.where(n > 0, n, 1.0)
    log_hn = ((a + b + 1) * np.log(2.0) - np.log(2 * safe + a + b + 1)
              + gammaln(safe + a + 1) + gammaln(safe + b + 1)
              - gammaln(safe + 1) - gammaln(safe + a + b + 1))
    return np.where(n > 0, log_hn, log_h0)


def jacobi_norm(n, pair):
    """Squared L2 norm ``h_n`` of the classical Jacobi polynomial ``P_n``.

    Gamma ratios are formed in log space, so degrees up to ``2**16`` (and
    beyond) do not overflow. ``n`` may be an integer array.
    """
    n_arr = np.asarray(n)
    if np.any(n_arr < 0):
        raise DomainError("degree must be nonnegative")
    out = np.exp(_log_norm(n_arr, pair.alpha, pair.beta))
    return float(out) if out.ndim == 0 else out


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0 + _T_SLACK) or np.any(np.isnan(t)):
        raise DomainError("Jacobi polynomials are evaluated on [-1, 1] only")
    return np.clip(t, -1.0, 1.0)


def _classical_rows(n_max, a, b, t):
    """Yield ``P_0 .. P_{n_max}`` of the classical polynomials at points ``t``."""
    prev = np.ones_like(t)
    yield prev
    if n_max == 0:
        return
    cur = 0.5 * ((a + b + 2) * t + (a - b))
    yield cur
    for n in range(2, n_max + 1):
        s = 2 * n + a + b
        c1 = 2 * n * (n + a + b) * (s - 2)
        c2 = (s - 1) * (s * (s - 2) * t + (a * a - b * b))
        c3 = 2 * (n + a - 1) * (n + b - 1) * s
        prev, cur = cur, (c2 * cur - c3 * prev) / c1
        yield cur


def _classical_table(n_max, a, b, t):
    out = np.empty((n_max + 1,) + t.shape)
    for n, row in enumerate(_classical_rows(n_max, a, b, t)):
        out[n] = row
    return out


def _classical_last(n, a, b, t):
    row = None
    for row in _classical_rows(n, a, b, t):
        pass
    return row


def _inv_sqrt_norm(n, pair):
    return np.exp(-0.5 * _log_norm(n, pair.alpha, pair.beta))


def orthonormal_table(n_max, pair, t):
    """Values ``P~_k(t)`` for ``k = 0..n_max`` with shape ``(n_max + 1,) + t.shape``."""
    t = _check_t(t)
    table = _classical_table(int(n_max), pair.alpha, pair.beta, t)
    scale = np.exp(-0.5 * _log_norm(np.arange(n_max + 1), pair.alpha, pair.beta))
    return table * scale.reshape((-1,) + (1,) * t.ndim)


def eval_orthonormal(n, pair, t):
    """Orthonormal Jacobi polynomial ``h_n^{-1/2} P_n^{(alpha, beta)}(t)``."""
    if n < 0:
        raise DomainError("degree must be nonnegative")
    t = _check_t(t)
    out = _classical_last(int(n), pair.alpha, pair.beta, t) * _inv_sqrt_norm(n, pair)
    return float(out) if out.ndim == 0 else out


def orthonormal_deriv_table(n_max, pair, t):
    """Derivatives of ``P~_k`` for ``k = 0..n_max`` at ``t``.

    Uses ``d/dt P_m^{(a,b)} = (m + a + b + 1)/2 * P_{m-1}^{(a+1,b+1)}``.
    """
    t = _check_t(t)
    a, b = pair.alpha, pair.beta
    out = np.zeros((n_max + 1,) + t.shape)
    if n_max == 0:
        return out
    shifted = _classical_table(n_max - 1, a + 1, b + 1, t)
    m = np.arange(1, n_max + 1)
    scale = 0.5 * (m + a + b + 1) * np.exp(-0.5 * _log_norm(m, a, b))
    out[1:] = shifted * scale.reshape((-1,) + (1,) * t.ndim)
    return out


def eval_orthonormal_deriv(n, pair, t):
    """Derivative of ``P~_n`` at ``t``."""
    if n < 0:
        raise DomainError("degree must be nonnegative")
    t = _check_t(t)
    if n == 0:
        out = np.zeros_like(t)
    else:
        out = (0.5 * (n + pair.alpha + pair.beta + 1) * _inv_sqrt_norm(n, pair)
               * _classical_last(int(n) - 1, pair.alpha + 1, pair.beta + 1, t))
    return float(out) if out.ndim == 0 else out


def _recurrence(n, a, b):
    """Diagonal and off-diagonal of the symmetric Jacobi matrix of size n."""
    k = np.arange(n, dtype=float)
    s = 2 * k + a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        diag = (b * b - a * a) / (s * (s + 2))
    diag[0] = (b - a) / (a + b + 2)
    if n == 1:
        return diag, np.zeros(0)
    k = np.arange(1, n, dtype=float)
    s = 2 * k + a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        off2 = 4 * k * (k + a) * (k + b) * (k + a + b) / (s * s * (s + 1) * (s - 1))
    off2[0] = 4 * (1 + a) * (1 + b) / ((2 + a + b) ** 2 * (3 + a + b))
    return diag, np.sqrt(off2)


def gauss_jacobi(n, pair, tol=1e-13, max_newton=4):
    """Gauss-Jacobi rule with ``n`` nodes, exact for degree ``2n - 1``.

    Nodes come from the eigenvalues of the Jacobi matrix (Golub-Welsch) and
    are polished by Newton steps on ``P~_n``; weights are the Christoffel
    numbers ``1 / sum_{m<n} P~_m(x)^2``, which are positive by construction.
    """
    n = int(n)
    if n < 1:
        raise DomainError("a Gauss rule needs at least one node")
    diag, off = _recurrence(n, pair.alpha, pair.beta)
    if n == 1:
        x = diag.copy()
    else:
        x = eigh_tridiagonal(diag, off, eigvals_only=True)
    x = np.clip(np.sort(x)[::-1], -1.0, 1.0)

    step = np.inf
    for _ in range(max_newton):
        delta = eval_orthonormal(n, pair, x) / eval_orthonormal_deriv(n, pair, x)
        x = np.clip(x - delta, -1.0, 1.0)
        step = np.max(np.abs(delta))
        if step <= tol:
            break
    if not step <= tol:
        raise ConvergenceError(
            f"Gauss-Jacobi nodes for n={n}, {pair} stalled at residual {step:.3e}")
    if np.any(np.diff(x) >= 0):
        raise ConvergenceError("Gauss-Jacobi nodes are not strictly decreasing")

    scale = _inv_sqrt_norm(np.arange(n), pair)
    total = np.zeros_like(x)
    for m, row in enumerate(_classical_rows(n - 1, pair.alpha, pair.beta, x)):
        total += (scale[m] * row) ** 2
    weights = 1.0 / total
    return QuadratureRule(n, pair, x, weights)
