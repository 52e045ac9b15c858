import math
from functools import lru_cache

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from jacobi_needlets.cubature import interval_measure, lp_norm
from jacobi_needlets.frame import analyze, build_frame, synthesize
from jacobi_needlets.jacobi_poly import JacobiPair, gauss_jacobi, orthonormal_table
from jacobi_needlets.spaces import SpaceParams, b_norm_kernel, f_norm_kernel, seq_norm
from jacobi_needlets.tensor import JacobiExpansion, TensorJacobiParams

exponents = st.floats(-0.5, 3.0)
seeds = st.integers(0, 2 ** 32 - 1)
SETTINGS = settings(max_examples=25, deadline=None)


@lru_cache(maxsize=None)
def frame_for(alpha, beta, config="tight"):
    params = TensorJacobiParams.from_lists([alpha, 0.5], [beta, -0.5])
    return build_frame(params, config, J_max=4)


def random_f(frame, seed, degree=6):
    return JacobiExpansion.random(frame.params, degree, np.random.default_rng(seed))


frames = st.tuples(st.sampled_from([-0.5, 0.0, 1.5]), st.sampled_from([-0.5, 0.25, 2.0]),
                   st.sampled_from(["tight", "dual"]))


@SETTINGS
@given(exponents, exponents, st.integers(1, 40))
def test_gauss_table_orthonormal(alpha, beta, n):
    pair = JacobiPair(alpha, beta)
    rule = gauss_jacobi(n + 1, pair)
    T = orthonormal_table(n, pair, rule.nodes)
    gram = (T * rule.weights) @ T.T
    assert np.max(np.abs(gram - np.eye(n + 1))) < 1e-11


@SETTINGS
@given(frames, seeds)
def test_round_trip(cfg, seed):
    frame = frame_for(*cfg)
    f = random_f(frame, seed)
    assert (synthesize(frame, analyze(frame, f)) - f).l2_norm() <= 1e-11 * f.l2_norm()


@SETTINGS
@given(st.sampled_from([-0.5, 0.0, 1.5]), st.sampled_from([-0.5, 0.25, 2.0]), seeds)
def test_tight_parseval(alpha, beta, seed):
    frame = frame_for(alpha, beta)
    f = random_f(frame, seed)
    assert math.isclose(analyze(frame, f).energy(), f.l2_norm() ** 2, rel_tol=1e-11)


@SETTINGS
@given(frames, seeds, seeds, st.floats(-3, 3), st.floats(-3, 3))
def test_analysis_linear(cfg, s1, s2, a, b):
    frame = frame_for(*cfg)
    f, g = random_f(frame, s1), random_f(frame, s2)
    lhs = analyze(frame, f * a + g * b).to_flat()
    rhs = (analyze(frame, f) * a + analyze(frame, g) * b).to_flat()
    scale = abs(a) * f.l2_norm() + abs(b) * g.l2_norm() + 1.0
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale


space_params = st.builds(
    SpaceParams,
    s=st.floats(-1.0, 2.0),
    rho_weight=st.floats(0.0, 2.0),
    p=st.sampled_from([1.0, 1.5, 2.0, 3.0]),
    q=st.sampled_from([0.75, 1.0, 2.0, math.inf]),
    family=st.sampled_from(["F", "B"]),
)


@SETTINGS
@given(space_params, seeds, st.floats(-5, 5).filter(lambda c: abs(c) > 1e-3))
def test_norms_homogeneous(sp, seed, c):
    frame = frame_for(0.0, 0.25)
    f = random_f(frame, seed)
    cut = frame.analysis_cutoff
    kern = f_norm_kernel if sp.family == "F" else b_norm_kernel
    assert math.isclose(kern(f * c, sp, cut), abs(c) * kern(f, sp, cut), rel_tol=1e-11)
    h = analyze(frame, f)
    assert math.isclose(seq_norm(h * c, sp), abs(c) * seq_norm(h, sp), rel_tol=1e-11)


@SETTINGS
@given(space_params, seeds)
def test_norms_monotone_in_q(sp, seed):
    frame = frame_for(1.5, -0.5)
    f = random_f(frame, seed)
    cut = frame.analysis_cutoff
    kern = f_norm_kernel if sp.family == "F" else b_norm_kernel
    h = analyze(frame, f)
    wider = SpaceParams(sp.s, sp.rho_weight, sp.p, sp.q * 2, sp.family)
    assert kern(f, wider, cut) <= kern(f, sp, cut) * (1 + 1e-12)
    assert seq_norm(h, wider) <= seq_norm(h, sp) * (1 + 1e-12)


@SETTINGS
@given(exponents, exponents, st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
def test_interval_measure_additive(alpha, beta, a, b, c):
    a, b, c = sorted((a, b, c))
    pair = JacobiPair(alpha, beta)
    whole = interval_measure(a, c, pair)
    parts = interval_measure(a, b, pair) + interval_measure(b, c, pair)
    assert abs(whole - parts) <= 1e-12 * max(whole, 1.0)


@SETTINGS
@given(seeds, st.floats(1.0, 4.0), st.floats(1.0, 4.0))
def test_lp_norm_monotone_in_p(seed, p1, p2):
    # normalized by the total mass, L^p norms increase with p
    params = TensorJacobiParams.from_lists([0.5, 1.0], [0.0, -0.5])
    f = JacobiExpansion.random(params, 5, np.random.default_rng(seed))
    lo, hi = sorted((p1, p2))
    m = params.total_mass()
    assert lp_norm(f, lo) * m ** (-1 / lo) <= lp_norm(f, hi) * m ** (-1 / hi) * (1 + 1e-12)
