import math

import numpy as np
import pytest

from jacobi_needlets.cutoff import (
    CoveringError,
    CutoffTypeError,
    DerivativeGauge,
    gauge_derivatives,
    make_dual_cutoff,
    make_multivariate,
    make_radial_impostor,
    make_small_derivative_univariate,
    make_univariate,
    quasi_norm,
    smooth_step,
    verify_admissibility,
)


def test_smooth_step_values():
    assert smooth_step(0.0) == 0.0
    assert smooth_step(1.0) == 1.0
    assert smooth_step(0.5) == pytest.approx(0.5)
    # 1 / (1 + e^(8/3)), mpmath at 30 digits
    assert smooth_step(0.25) == pytest.approx(0.064969169128664062128, rel=1e-14)
    u = np.linspace(0, 1, 101)
    np.testing.assert_allclose(smooth_step(u) + smooth_step(1 - u), 1.0, atol=1e-15)


def test_univariate_types():
    a, b, c = (make_univariate(t) for t in "abc")
    assert a(0.7) == 1.0 and a(2.0) == 0.0
    assert a(1.5) == pytest.approx(0.5)
    assert b(0.75) == pytest.approx(0.5)
    assert b(0.4) == 0.0
    t = np.linspace(1.0, 2.0, 33)
    np.testing.assert_allclose(c(t) ** 2 + c(t / 2) ** 2, 1.0, atol=1e-15)


def test_unknown_type_rejected():
    with pytest.raises(CutoffTypeError):
        make_univariate("d")
    with pytest.raises(CutoffTypeError):
        make_multivariate("nope", 2)


@pytest.mark.parametrize("construction", ["product", "difference", "sin_splice"])
def test_builtin_constructions_are_admissible(construction):
    A = make_multivariate(construction, 2)
    report = verify_admissibility(A)
    assert report.passed, report.failures()


def test_quasi_norm_construction_is_admissible():
    A = make_multivariate("quasi_norm", 2, base=make_univariate("b"))
    assert verify_admissibility(A).passed


def test_radial_impostor_fails_second_kind():
    report = verify_admissibility(make_radial_impostor(2))
    assert not report.passed
    assert "second_kind_projection" in report.failures()


def test_splice_partition_of_unity_multivariate():
    C = make_multivariate("sin_splice", 2)
    rng = np.random.default_rng(0)
    t = rng.uniform(0, 8, (500, 2))
    t = t[np.max(t, axis=1) >= 1]
    total = sum(C(t / 2.0 ** j) ** 2 for j in range(8))
    np.testing.assert_allclose(total, 1.0, atol=1e-14)


def test_dual_cutoff_identity():
    A = make_multivariate("difference", 2)
    B = make_dual_cutoff(A)
    rng = np.random.default_rng(1)
    t = rng.uniform(0, 10, (400, 2))
    t = t[np.max(t, axis=1) >= 1]
    total = sum(A(t / 2.0 ** j) * B(t / 2.0 ** j) for j in range(10))
    np.testing.assert_allclose(total, 1.0, atol=1e-12)


def test_dual_cutoff_covering_failure():
    # a cutoff vanishing on |t|_inf in [1, 2] leaves a gap in the dyadic cover
    base = make_multivariate("difference", 2)
    hole = type(base)(2, lambda t: np.where(np.max(t, axis=-1) > 1.9, base(t), 0.0) * 0.0,
                      "second", "b", name="empty")
    with pytest.raises(CoveringError):
        make_dual_cutoff(hole)


def test_quasi_norm_axes():
    c_hat = make_univariate("a")
    # on an axis only one term survives, giving |t_m|
    assert quasi_norm(np.array([0.0, 1.3]), c_hat) == pytest.approx(1.3)


def test_gauge_masses():
    # M = 1 + int_0^inf (1 + t)^(-1 - eps) dt = 1 + 1/eps
    assert DerivativeGauge.power(1.0).mass_M == pytest.approx(2.0, rel=1e-10)
    assert DerivativeGauge.power(0.5).mass_M == pytest.approx(3.0, rel=1e-8)


def test_small_derivative_estimates_below_envelope():
    g = DerivativeGauge.power(1.0)
    a = make_small_derivative_univariate(g, "a")
    rows = gauge_derivatives(a, k_max=4)
    for k, est, env in rows:
        assert env is not None and est <= env


def test_small_derivative_type_c_partition():
    g = DerivativeGauge.power(1.0)
    c = make_small_derivative_univariate(g, "c")
    t = np.linspace(1.0, 2.0, 257)
    np.testing.assert_allclose(c(t) ** 2 + c(t / 2) ** 2, 1.0, atol=1e-14)


def test_truncation_range():
    with pytest.raises(ValueError):
        make_small_derivative_univariate(DerivativeGauge.power(1.0), "a", truncation_m=4)


def test_second_kind_projection_exact():
    A = make_multivariate("difference", 3)
    t = np.array([[0.9, 0.1, 1.4], [1.7, 0.6, 0.2]])
    proj = t.copy()
    proj[0, 1] = 0.0
    proj[1, 2] = 0.0
    np.testing.assert_array_equal(A(t), A(proj))


def test_separable_terms_reproduce_function():
    A = make_multivariate("difference", 2)
    rng = np.random.default_rng(3)
    t = rng.uniform(0, 2.2, (200, 2))
    total = np.zeros(len(t))
    for w, s, fs in A.separable:
        prod = w * np.ones(len(t))
        for i, f in enumerate(fs):
            prod = prod * f(s * t[:, i])
        total += prod
    np.testing.assert_allclose(total, A(t), atol=1e-15)


def test_dimension_check():
    A = make_multivariate("product", 2)
    with pytest.raises(ValueError):
        A(np.zeros(3))
    assert math.isclose(A(np.zeros(2)), 1.0)
