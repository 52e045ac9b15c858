import math

import numpy as np
import pytest

from jacobi_needlets.approx import (
    ApproxRun,
    abs_power_target,
    bs_tau_norm,
    greedy_nterm,
    jackson_table,
    term_norms,
)
from jacobi_needlets.frame import (
    NeedletCoefficients,
    analyze,
    build_frame,
    needlet_norms,
    synthesize,
)
from jacobi_needlets.jacobi_poly import jacobi_norm
from jacobi_needlets.tensor import JacobiExpansion, TensorJacobiParams

PARAMS = TensorJacobiParams.from_lists([0.5, 1.5], [-0.5, 0.25])

# int |x - 0.3|^(1/2) P~_k(x) w(x) dx for (alpha, beta) = (1/2, -1/2), mpmath quad at 30 digits
ABS_POWER_ORACLE = [
    (0, 1.5678883710114004654),
    (3, 0.13867092657354411448),
    (10, -0.018029215365808166157),
]


@pytest.fixture(scope="module")
def tight():
    return build_frame(PARAMS, "tight", J_max=4)


@pytest.fixture(scope="module")
def run(tight):
    f = JacobiExpansion.random(PARAMS, 8, np.random.default_rng(0))
    return ApproxRun(tight, f, p=2.0)


@pytest.mark.parametrize("k,expected", ABS_POWER_ORACLE)
def test_abs_power_coefficients(k, expected):
    g = abs_power_target(PARAMS, 12, shift=0.3, gamma=0.5)
    scale = math.sqrt(jacobi_norm(0, PARAMS.pairs[1]))
    assert g.coeffs[k, 0] == pytest.approx(expected * scale, rel=1e-12)
    assert np.all(g.coeffs[:, 1:] == 0)


def test_abs_power_shift_range():
    with pytest.raises(ValueError):
        abs_power_target(PARAMS, 4, shift=1.5)
    # endpoint shifts integrate over one side only
    g = abs_power_target(PARAMS, 4, shift=1.0)
    assert np.all(np.isfinite(g.coeffs))


def test_full_budget_reconstructs(run):
    g, err = greedy_nterm(run, run.nnz)
    assert err < 1e-12 * run.f.l2_norm()
    g2, err2 = greedy_nterm(run, run.nnz + 10)
    assert err2 == pytest.approx(err, abs=1e-14)


def test_one_term_is_top_needlet(run, tight):
    js, idx = run.order
    j, xi = int(js[0]), int(idx[0])
    g, _ = greedy_nterm(run, 1)
    single = NeedletCoefficients.single(tight, j, xi, run.coeffs[j, xi])
    np.testing.assert_allclose(g.coeffs, synthesize(tight, single).coeffs, atol=1e-15)


def test_order_is_decreasing(run):
    js, idx = run.order
    vals = np.array([run.norms[int(j)].reshape(-1)[int(i)] for j, i in zip(js, idx)])
    assert np.all(np.diff(vals) <= 0)
    assert run.nnz == analyze(run.frame, run.f).nnz()


def test_term_norms_p2(run, tight):
    norms = term_norms(tight, run.coeffs, 2)
    j, xi = 3, 7
    expected = abs(run.coeffs[j, xi]) * needlet_norms(tight, j, xi, 2).norm
    assert norms[j].reshape(-1)[xi] == pytest.approx(expected, rel=1e-12)


def test_validation(tight):
    f = JacobiExpansion.random(PARAMS, 4, np.random.default_rng(1))
    with pytest.raises(ValueError):
        ApproxRun(build_frame(PARAMS, "dual", J_max=3), f)
    with pytest.raises(ValueError):
        ApproxRun(tight, f, ranking="by_coefficient")
    with pytest.raises(ValueError):
        greedy_nterm(ApproxRun(tight, f), 0)
    with pytest.raises(ValueError):
        bs_tau_norm(f, 1.0, 2.0, tight, tau=0.5)


def test_bs_tau_norm_exponent(run, tight):
    # s = 0 gives tau = p = 2, so the sum is over squared term norms
    tau_norm = bs_tau_norm(run.f, 0.0, 2.0, tight)
    expected = math.sqrt(sum(float(np.sum(v ** 2)) for v in run.norms.values()))
    assert tau_norm == pytest.approx(expected, rel=1e-12)
    assert bs_tau_norm(run.f, 1.0, 2.0, tight, tau=1.0) > 0


def test_jackson_table_rows(run):
    rows = jackson_table(run, 1.0, n_list=(1, 4, 16))
    assert [r[0] for r in rows] == [1, 4, 16]
    bnorm = bs_tau_norm(run.f, 1.0, 2.0, run.frame)
    for n, err, normalized in rows:
        assert err == pytest.approx(greedy_nterm(run, n)[1])
        assert normalized == pytest.approx(err * n ** 0.5 / bnorm)
