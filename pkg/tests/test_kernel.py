import math

import numpy as np
import pytest

from jacobi_needlets.cutoff import make_multivariate
from jacobi_needlets.jacobi_poly import eval_orthonormal
from jacobi_needlets.kernel import (
    KernelSpec,
    decay_profile,
    eval_kernel,
    kernel_l2_row,
    kernel_l2_row_cubature,
    kernel_row_expansion,
    nikolski_check,
    reproduction_error,
    spectral_convolve,
    stratified_pairs,
    w_comparability,
)
from jacobi_needlets.tensor import JacobiExpansion, TensorJacobiParams, rho

PARAMS = TensorJacobiParams.from_lists([0.5, 1.5], [-0.5, 0.25])


def _naive_kernel(spec, x, y):
    total = 0.0
    for k0 in range(spec.modes):
        for k1 in range(spec.modes):
            a = spec.cutoff(np.array([k0, k1]) / spec.scale_n)
            if a == 0:
                continue
            p0, p1 = spec.params.pairs
            total += a * (eval_orthonormal(k0, p0, x[0]) * eval_orthonormal(k0, p0, y[0])
                          * eval_orthonormal(k1, p1, x[1]) * eval_orthonormal(k1, p1, y[1]))
    return total


def test_kernel_matches_naive_double_sum():
    spec = KernelSpec(PARAMS, make_multivariate("difference", 2), 3)
    x, y = np.array([0.3, -0.8]), np.array([-0.1, 0.95])
    assert eval_kernel(spec, x, y) == pytest.approx(_naive_kernel(spec, x, y), rel=1e-12)


def test_dense_and_factorized_agree():
    spec = KernelSpec(PARAMS, make_multivariate("difference", 2), 8)
    X, Y = stratified_pairs(2, 8, np.random.default_rng(0), per_stratum=8)
    dense = eval_kernel(spec, X, Y, method="dense")
    fact = eval_kernel(spec, X, Y, method="factorized")
    assert np.max(np.abs(dense - fact)) < 1e-11 * np.max(np.abs(dense))


def test_symmetry():
    spec = KernelSpec(PARAMS, make_multivariate("product", 2), 5)
    X, Y = stratified_pairs(2, 5, np.random.default_rng(1), per_stratum=4)
    np.testing.assert_allclose(eval_kernel(spec, X, Y), eval_kernel(spec, Y, X), atol=1e-11)


@pytest.mark.parametrize("n", [1, 4, 16])
def test_reproduction(n):
    pts = np.array([[0.2, -0.4], [1.0, -1.0], [-0.99, 0.5]])
    # a type (a) product equals 1 on [0, 1]^2, which contains |nu|_1 <= n after scaling
    flat = KernelSpec(PARAMS, make_multivariate("product", 2), n)
    assert reproduction_error(flat, pts, max_l1=n) < 1e-11
    # the general identity holds for any cutoff
    spec = KernelSpec(PARAMS, make_multivariate("difference", 2), n)
    assert reproduction_error(spec, pts) < 1e-11


def test_l2_row_routes_agree():
    spec = KernelSpec(PARAMS, make_multivariate("difference", 2), 6)
    x = np.array([0.4, -0.6])
    parseval = kernel_l2_row(spec, x)
    assert kernel_l2_row(spec, x, method="factorized") == pytest.approx(parseval, rel=1e-12)
    assert kernel_l2_row_cubature(spec, x) == pytest.approx(parseval, rel=1e-11)
    assert kernel_row_expansion(spec, x).l2_norm() ** 2 == pytest.approx(parseval, rel=1e-12)


def test_spectral_convolve():
    A = make_multivariate("product", 2)
    f = JacobiExpansion.random(PARAMS, 6, np.random.default_rng(2))
    zero = spectral_convolve(A, 0, f)
    expected = np.zeros_like(f.coeffs)
    expected[0, 0] = f.coeffs[0, 0]
    np.testing.assert_array_equal(zero.coeffs, expected)
    # A = 1 on [0, 1]^2 for a type (a) product, so level 4 (scale 8) leaves degree 6 alone
    np.testing.assert_allclose(spectral_convolve(A, 4, f).coeffs, f.coeffs)
    with pytest.raises(ValueError):
        spectral_convolve(A, -1, f)


def test_stratified_pairs_cover_distances():
    X, Y = stratified_pairs(3, 16, np.random.default_rng(3), per_stratum=16)
    r = rho(X, Y)
    assert X.shape == Y.shape == (16 * 5, 3)
    assert r.max() > math.pi / 2 and r.min() < math.pi / 16
    assert np.all(np.abs(X) <= 1) and np.all(np.abs(Y) <= 1)


def test_decay_profile_is_finite():
    spec = KernelSpec(PARAMS, make_multivariate("difference", 2), 8)
    sample = stratified_pairs(2, 8, np.random.default_rng(4), per_stratum=16)
    prof = decay_profile(spec, 4.0, sample)
    assert np.isfinite(prof.C_emp) and prof.C_emp > 0


def test_w_comparability_bounded():
    X, Y = stratified_pairs(2, 32, np.random.default_rng(5), per_stratum=32)
    assert w_comparability(32, X, Y, PARAMS) <= 8.0


def test_nikolski_identity_at_equal_exponents():
    g = JacobiExpansion.random(PARAMS, 4, np.random.default_rng(6))
    rep = nikolski_check(g, 2.0, 2.0)
    assert rep.exponent == 0.0
    assert rep.ratio == pytest.approx(1.0)
    with pytest.raises(ValueError):
        nikolski_check(g, 1.0, 2.0)


def test_spec_validation():
    with pytest.raises(ValueError):
        KernelSpec(PARAMS, make_multivariate("product", 3), 2)
    with pytest.raises(ValueError):
        KernelSpec(PARAMS, make_multivariate("product", 2), 0)


@pytest.mark.parametrize("s", [None, -0.5])
def test_nikolski_ratio_does_not_grow(s):
    # g = P~_nu with |nu|_1 = n, p = inf, q = 2, Legendre weights
    params = TensorJacobiParams.uniform(2)
    ratios = []
    for n in (4, 8, 16, 32, 64):
        g = JacobiExpansion.from_dict(params, {(n // 2, n - n // 2): 1.0})
        ratios.append(nikolski_check(g, math.inf, 2, s=s).ratio)
    assert max(ratios[1:]) <= ratios[0]
