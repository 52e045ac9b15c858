import math

import numpy as np
import pytest

from jacobi_needlets.cubature import lp_norm
from jacobi_needlets.cutoff import make_multivariate
from jacobi_needlets.frame import analyze, build_frame
from jacobi_needlets.kernel import spectral_convolve
from jacobi_needlets.spaces import (
    InvalidSpaceParams,
    Multiplier,
    SpaceParams,
    apply_multiplier,
    b_norm_kernel,
    equivalence_report,
    f_norm_kernel,
    kernel_levels,
    multiplier_decay_check,
    seq_norm,
)
from jacobi_needlets.tensor import JacobiExpansion, TensorJacobiParams

PARAMS = TensorJacobiParams.from_lists([0.5, 1.5], [-0.5, 0.25])


@pytest.fixture(scope="module")
def tight():
    return build_frame(PARAMS, "tight", J_max=5)


@pytest.fixture(scope="module")
def f():
    return JacobiExpansion.random(PARAMS, 12, np.random.default_rng(0))


def test_param_validation():
    with pytest.raises(InvalidSpaceParams):
        SpaceParams(1, 0, math.inf, 2, "F")
    with pytest.raises(InvalidSpaceParams):
        SpaceParams(1, 0, 2, 0, "B")
    with pytest.raises(InvalidSpaceParams):
        SpaceParams(1, 0, 2, 2, "X")
    SpaceParams(1, 0, math.inf, 2, "B")


def test_kernel_levels():
    cut = make_multivariate("sin_splice", 2)
    g = JacobiExpansion.from_dict(PARAMS, {(3, 2): 1.0})
    # total degree 5: pieces up to the first j with 2^(j-2) > 5
    assert list(kernel_levels(g, cut)) == [0, 1, 2, 3, 4]


def test_zero_order_l2_identities(f, tight):
    # with s = rho = 0 and p = q = 2 every norm reduces to ||f||_2 for a tight partition
    cut = tight.analysis_cutoff
    l2 = f.l2_norm()
    h = analyze(tight, f)
    assert f_norm_kernel(f, SpaceParams(0, 0, 2, 2, "F"), cut) == pytest.approx(l2, rel=1e-12)
    assert b_norm_kernel(f, SpaceParams(0, 0, 2, 2, "B"), cut) == pytest.approx(l2, rel=1e-12)
    assert seq_norm(h, SpaceParams(0, 0, 2, 2, "B")) == pytest.approx(l2, rel=1e-12)
    assert seq_norm(h, SpaceParams(0, 0, 2, 2, "F")) == pytest.approx(l2, rel=1e-12)


def test_b_kernel_parseval_matches_grid(f, tight):
    cut = tight.analysis_cutoff
    sp = SpaceParams(1.0, 0, 2, 3, "B")
    terms = [2.0 ** j * lp_norm(spectral_convolve(cut, j, f), 2, level=7)
             for j in kernel_levels(f, cut)]
    expected = sum(t ** 3 for t in terms) ** (1 / 3)
    assert b_norm_kernel(f, sp, cut) == pytest.approx(expected, rel=1e-12)


def test_b_inf_uses_max(f, tight):
    cut = tight.analysis_cutoff
    big = b_norm_kernel(f, SpaceParams(0.5, 0, 2, 1, "B"), cut)
    small = b_norm_kernel(f, SpaceParams(0.5, 0, 2, math.inf, "B"), cut)
    assert small <= big


def test_family_mismatch(f, tight):
    with pytest.raises(InvalidSpaceParams):
        f_norm_kernel(f, SpaceParams(0, 0, 2, 2, "B"), tight.analysis_cutoff)
    with pytest.raises(InvalidSpaceParams):
        b_norm_kernel(f, SpaceParams(0, 0, 2, 2, "F"), tight.analysis_cutoff)


def test_zero_function(tight):
    z = JacobiExpansion.zeros(PARAMS, (3, 3))
    cut = tight.analysis_cutoff
    assert f_norm_kernel(z, SpaceParams(1, 1, 2, 2, "F"), cut) == 0.0
    assert b_norm_kernel(z, SpaceParams(1, 1, 3, 2, "B"), cut) == 0.0
    assert seq_norm(analyze(tight, z), SpaceParams(1, 1, 2, 2, "F")) == 0.0


def test_multipliers(f):
    one = Multiplier.constant(2, 3.0)
    np.testing.assert_allclose(apply_multiplier(one, f).coeffs, 3.0 * f.coeffs)
    cut = make_multivariate("product", 2)
    low = apply_multiplier(Multiplier.from_cutoff(cut, 16), f)
    np.testing.assert_allclose(low.coeffs, f.coeffs)
    with pytest.raises(ValueError):
        apply_multiplier(Multiplier.constant(3), f)


def test_alternating_squares_bounded_with_decay():
    m = Multiplier.alternating_squares(make_multivariate("sin_splice", 2))
    t = np.random.default_rng(1).uniform(0, 200, (2000, 2))
    assert np.max(np.abs(m(t))) <= 1.0 + 1e-12
    rows = multiplier_decay_check(m, max_order=2, n_points=100)
    # bounded means the normalized derivatives do not grow with the scale
    for k, vals in rows.items():
        assert len(vals) == 4
        assert max(vals[1:]) <= vals[0]


def test_equivalence_report_rows(f, tight):
    sps = [SpaceParams(0.5, 0, 2, 2, "F"), SpaceParams(0.5, 0, 2, 2, "B")]
    rows = equivalence_report([f], sps, tight.analysis_cutoff, tight)
    assert len(rows) == 2
    for r in rows:
        assert r["ratio"] == pytest.approx(r["kernel_norm"] / r["seq_norm"])
        assert 1 / 3 <= r["ratio"] <= 3
        assert r["lp_norm"] == pytest.approx(f.l2_norm())
