"""Needlet frames on the weighted cube: analysis, synthesis and needlet norms.

Level ``j`` uses the tensor Gauss-Jacobi rule with ``2^(j+1)`` nodes per axis.
Its needlets are

    phi_xi = c_xi^(1/2) sum_nu A(nu / 2^(j-1)) P~_nu(xi) P~_nu,
    psi_xi = c_xi^(1/2) sum_nu B(nu / 2^(j-1)) P~_nu(xi) P~_nu,

and at ``j = 0`` both reduce to ``c_xi^(1/2) P~_0(xi) P~_0``. Since the
cutoffs vanish once a coordinate of their argument reaches 2, level ``j``
only involves modes ``nu < 2^j`` per axis. All transforms therefore run in
coefficient space on per-axis tables.
"""
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .cubature import NODE_BUDGET, build_level, lp_norm
from .cutoff import (
    CoveringError,
    CutoffFunction,
    CutoffTypeError,
    make_dual_cutoff,
    make_multivariate,
    verify_admissibility,
)
from .tensor import JacobiExpansion, mode_apply, mode_grid, univariate_table, weight_W

__all__ = [
    "CoverageError",
    "FrameLevel",
    "NeedletCoefficients",
    "NeedletFrame",
    "NeedletNorm",
    "analyze",
    "build_frame",
    "frame_bound_ratio",
    "level_needlet_norms",
    "needlet_expansion",
    "needlet_norms",
    "needlet_values",
    "synthesize",
]


class CoverageError(ValueError):
    """The input spectrum reaches levels above ``J_max``."""


@dataclass(frozen=True, eq=False)
class FrameLevel:
    """Per-level data: cubature, cutoff masks on the mode box and node tables."""

    j: int
    cubature: object
    mask_A: np.ndarray
    mask_B: np.ndarray
    tables: tuple  # per axis, shape (modes, nodes)
    sqrt_c: np.ndarray  # grid-shaped

    @property
    def modes(self):
        return self.mask_A.shape[0]

    @property
    def grid_shape(self):
        return self.cubature.grid_shape

    @property
    def size(self):
        return self.cubature.node_count


@dataclass(frozen=True, eq=False)
class NeedletFrame:
    params: object
    analysis_cutoff: CutoffFunction
    synthesis_cutoff: CutoffFunction
    levels: tuple
    J_max: int
    tight: bool = False

    @property
    def d(self):
        return self.params.d

    @property
    def top_modes(self):
        """Per-axis mode count of the highest level, ``2^J_max``."""
        return 2 ** self.J_max

    def level(self, j):
        if not 0 <= j <= self.J_max:
            raise IndexError(f"level {j} outside 0..{self.J_max}")
        return self.levels[j]

    @cached_property
    def is_complex(self):
        return any(np.iscomplexobj(L.mask_A) or np.iscomplexobj(L.mask_B)
                   for L in self.levels)

    def unravel(self, j, xi):
        """Multi-index of node ``xi`` (flat index or tuple) at level ``j``."""
        if np.ndim(xi) == 0:
            return np.unravel_index(int(xi), self.level(j).grid_shape)
        return tuple(int(i) for i in xi)

    def node(self, j, xi):
        idx = self.unravel(j, xi)
        return np.array([a[i] for a, i in zip(self.level(j).cubature.axis_nodes, idx)])


def _level_masks(j, A, B, d):
    modes = 2 ** j
    if j == 0:
        one = np.ones((1,) * d)
        return one, one
    pts = mode_grid((modes,) * d, 1.0 / 2.0 ** (j - 1))
    return A.at_points(pts), B.at_points(pts)


def _build_level(j, params, A, B, budget):
    cub = build_level(j, params, budget=budget)
    mA, mB = _level_masks(j, A, B, params.d)
    for m in (mA, mB):
        m.setflags(write=False)
    tables = tuple(univariate_table(p, 2 ** j - 1, nodes)
                   for p, nodes in zip(params.pairs, cub.axis_nodes))
    sqrt_c = np.sqrt(cub.weights).reshape(cub.grid_shape)
    sqrt_c.setflags(write=False)
    return FrameLevel(j, cub, mA, mB, tables, sqrt_c)


def _config_cutoffs(cutoff_config, d):
    """Resolve a configuration into ``(A, B, tight)``."""
    if isinstance(cutoff_config, str):
        if cutoff_config == "tight":
            A = make_multivariate("sin_splice", d)
            return A, A, True
        if cutoff_config == "dual":
            A = make_multivariate("difference", d)
            return A, make_dual_cutoff(A), False
        raise ValueError(f"unknown cutoff configuration {cutoff_config!r}")
    if isinstance(cutoff_config, CutoffFunction):
        A = cutoff_config
        if A.type_tag == "c" and not np.iscomplexobj(A.at_points(np.ones(d))):
            return A, A, True
        return A, make_dual_cutoff(A), False
    A, B = cutoff_config
    return A, B, A is B and A.type_tag == "c"


def build_frame(params, cutoff_config="tight", J_max=4, budget=NODE_BUDGET, check=True):
    """Needlet frame for levels ``0..J_max``.

    ``cutoff_config`` is ``"tight"`` (sin-spliced product cutoff, ``B = A``),
    ``"dual"`` (product type-(b) cutoff with its covering dual), a single
    cutoff (dualized unless it is a real type-(c) one) or an explicit pair
    ``(A, B)``. With ``check`` the analysis cutoff must pass the admissibility
    report including the dyadic covering check.
    """
    if int(J_max) < 0:
        raise ValueError("J_max must be nonnegative")
    J_max = int(J_max)
    d = params.d
    A, B, tight = _config_cutoffs(cutoff_config, d)
    if A.dim != d or B.dim != d:
        raise ValueError("cutoff dimension does not match params")
    if A.type_tag not in ("b", "c"):
        raise CutoffTypeError("analysis cutoff must be of type (b) or (c)")
    if check:
        report = verify_admissibility(A)
        if not report.passed:
            failed = report.failures()
            if "dyadic_covering" in failed:
                raise CoveringError(f"cutoff {A.name!r} fails the dyadic covering check")
            raise CutoffTypeError(f"cutoff {A.name!r} is not admissible: {failed}")
    build_level(J_max, params, budget=budget)  # fails early when over budget
    levels = tuple(_build_level(j, params, A, B, budget) for j in range(J_max + 1))
    return NeedletFrame(params, A, B, levels, J_max, tight)


@dataclass(eq=False)
class NeedletCoefficients:
    """Needlet coefficients by level; absent levels are zero.

    ``values[j]`` is an array of the level-``j`` node grid shape, so the
    flat node index follows the cubature's C ordering.
    """

    frame: NeedletFrame
    values: dict = field(default_factory=dict)

    def level(self, j):
        L = self.frame.level(j)
        v = self.values.get(j)
        return np.zeros(L.grid_shape) if v is None else v

    def __getitem__(self, key):
        j, xi = key
        return self.level(j)[self.frame.unravel(j, xi)]

    def items(self):
        """``((j, flat_index), value)`` for every nonzero coefficient, in level order."""
        for j in sorted(self.values):
            flat = self.values[j].reshape(-1)
            for k in np.flatnonzero(flat):
                yield (j, int(k)), flat[k]

    def nnz(self):
        return sum(int(np.count_nonzero(v)) for v in self.values.values())

    def to_flat(self):
        """All coefficients, levels 0..J_max concatenated."""
        parts = [self.level(j).reshape(-1) for j in range(self.frame.J_max + 1)]
        return np.concatenate(parts)

    @classmethod
    def from_flat(cls, frame, flat):
        flat = np.asarray(flat)
        values, start = {}, 0
        for L in frame.levels:
            part = flat[start:start + L.size]
            start += L.size
            if np.any(part):
                values[L.j] = part.reshape(L.grid_shape).copy()
        if start != len(flat):
            raise ValueError(f"expected {start} coefficients, got {len(flat)}")
        return cls(frame, values)

    @classmethod
    def single(cls, frame, j, xi, value=1.0):
        arr = np.zeros(frame.level(j).grid_shape, dtype=np.result_type(value, float))
        arr[frame.unravel(j, xi)] = value
        return cls(frame, {j: arr})

    def energy(self):
        """``sum |h_xi|^2``."""
        return float(sum(np.sum(np.abs(v) ** 2) for v in self.values.values()))

    def _combine(self, other, op):
        if other.frame is not self.frame:
            raise ValueError("coefficients belong to different frames")
        out = {}
        for j in set(self.values) | set(other.values):
            out[j] = op(self.level(j), other.level(j))
        return NeedletCoefficients(self.frame, out)

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, scalar):
        return NeedletCoefficients(self.frame, {j: v * scalar for j, v in self.values.items()})

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0


def _crop(coeffs, modes):
    """Coefficient array restricted (or zero-padded) to the box ``[0, modes)^d``."""
    shape = (modes,) * coeffs.ndim
    if coeffs.shape == shape:
        return coeffs
    out = np.zeros(shape, dtype=coeffs.dtype)
    sl = tuple(slice(0, min(a, modes)) for a in coeffs.shape)
    out[sl] = coeffs[sl]
    return out


def _check_coverage(frame, f):
    """Raise when a level above ``J_max`` would carry part of the spectrum of f."""
    if not np.any(f.coeffs):
        return
    total = f.total_degree()
    nz = f.coeffs != 0
    A = frame.analysis_cutoff
    j = frame.J_max + 1
    # A(nu / 2^(j-1)) vanishes once |nu|_1 < 2^(j-2)
    while 2 ** (j - 2) <= total:
        pts = mode_grid(f.shape, 1.0 / 2.0 ** (j - 1))[nz]
        vals = np.abs(A.at_points(pts))
        if np.any(vals > 0):
            k = int(np.argmax(vals))
            nu = tuple(int(round(v * 2.0 ** (j - 1))) for v in pts[k])
            raise CoverageError(
                f"mode {nu} reaches level {j} > J_max = {frame.J_max}")
        j += 1


def analyze(frame, f):
    """``<f, phi_xi>`` for all nodes of all levels, computed in coefficient space."""
    if f.params != frame.params:
        raise ValueError("expansion and frame use different parameters")
    _check_coverage(frame, f)
    values = {}
    for L in frame.levels:
        G = np.conj(L.mask_A) * _crop(f.coeffs, L.modes)
        if not np.any(G):
            continue
        vals = mode_apply(G, [t.T for t in L.tables]) * L.sqrt_c
        values[L.j] = vals
    return NeedletCoefficients(frame, values)


def synthesize(frame, coeffs, modes=None):
    """``sum h_xi psi_xi`` as an expansion on the mode box ``[0, 2^J_max)^d``."""
    if coeffs.frame is not frame:
        raise ValueError("coefficients belong to a different frame")
    modes = frame.top_modes if modes is None else int(modes)
    dtype = complex if (frame.is_complex or any(
        np.iscomplexobj(v) for v in coeffs.values.values())) else float
    out = np.zeros((modes,) * frame.d, dtype=dtype)
    for j, vals in coeffs.values.items():
        L = frame.level(j)
        G = mode_apply(vals * L.sqrt_c, list(L.tables)) * L.mask_B
        k = min(L.modes, modes)
        out[(slice(0, k),) * frame.d] += G[(slice(0, k),) * frame.d]
    return JacobiExpansion(frame.params, out)


def _node_table_column(L, idx):
    return [t[:, i] for t, i in zip(L.tables, idx)]


def needlet_expansion(frame, j, xi, which="psi"):
    """Coefficients of ``psi_xi`` (or ``phi_xi`` with ``which="phi"``)."""
    L = frame.level(j)
    idx = frame.unravel(j, xi)
    mask = L.mask_B if which == "psi" else L.mask_A
    if which not in ("psi", "phi"):
        raise ValueError("which must be 'psi' or 'phi'")
    cols = _node_table_column(L, idx)
    outer = cols[0]
    for c in cols[1:]:
        outer = np.multiply.outer(outer, c)
    return JacobiExpansion(frame.params, L.sqrt_c[idx] * mask * outer)


def needlet_values(frame, j, xi, x, which="psi"):
    """Point values of a needlet; points carry coordinates on the last axis."""
    return needlet_expansion(frame, j, xi, which).evaluate(x)


@dataclass(frozen=True)
class NeedletNorm:
    norm: float
    comparand: float

    @property
    def ratio(self):
        return self.norm / self.comparand


def _comparand(j, W, d, p):
    inv_p = 0.0 if p == math.inf else 1.0 / p
    return (2.0 ** (d * j) / W) ** (0.5 - inv_p)


def needlet_norms(frame, j, xi, p, which="psi"):
    """``||psi_xi||_p`` and the comparand ``(2^(dj) / W(2^j; xi))^(1/2 - 1/p)``."""
    g = needlet_expansion(frame, j, xi, which)
    W = float(weight_W(2 ** j, frame.node(j, xi), frame.params))
    return NeedletNorm(lp_norm(g, p), _comparand(j, W, frame.d, p))


def level_needlet_norms(frame, j, p, which="psi"):
    """Norms and comparands of every needlet of level ``j``, grid-shaped.

    ``p = 2`` uses Parseval for all nodes at once,
    ``||psi_xi||_2^2 = c_xi sum_nu |B(nu/2^(j-1))|^2 P~_nu(xi)^2``.
    """
    L = frame.level(j)
    mask = L.mask_B if which == "psi" else L.mask_A
    W = L.cubature.W().reshape(L.grid_shape)
    comp = _comparand(j, W, frame.d, p)
    if p == 2:
        sq = mode_apply(np.abs(mask) ** 2, [(t ** 2).T for t in L.tables])
        return L.sqrt_c * np.sqrt(np.maximum(sq, 0.0)), comp
    norms = np.empty(L.grid_shape)
    for idx in np.ndindex(*L.grid_shape):
        norms[idx] = lp_norm(needlet_expansion(frame, j, idx, which), p)
    return norms, comp


def frame_bound_ratio(frame, rng, trials=100, degree=None):
    """Spread ``max / min`` of ``sum |<f, phi_xi>|^2 / ||f||_2^2`` over random f.

    Also returns the extreme ratios. Inputs have per-coordinate degree
    ``2^(J_max - 1)`` (constants when ``J_max = 0``).
    """
    degree = (2 ** (frame.J_max - 1) if frame.J_max > 0 else 0) if degree is None else degree
    ratios = []
    for _ in range(trials):
        f = JacobiExpansion.random(frame.params, degree, rng)
        ratios.append(analyze(frame, f).energy() / f.l2_norm() ** 2)
    ratios = np.array(ratios)
    return float(ratios.max() / ratios.min()), float(ratios.min()), float(ratios.max())
