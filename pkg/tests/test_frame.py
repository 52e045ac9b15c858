import numpy as np
import pytest

from jacobi_needlets.cutoff import CutoffTypeError, make_radial_impostor
from jacobi_needlets.frame import (
    CoverageError,
    NeedletCoefficients,
    analyze,
    build_frame,
    frame_bound_ratio,
    level_needlet_norms,
    needlet_expansion,
    needlet_norms,
    needlet_values,
    synthesize,
)
from jacobi_needlets.cubature import BudgetExceededError, lp_norm
from jacobi_needlets.kernel import spectral_convolve
from jacobi_needlets.tensor import JacobiExpansion, TensorJacobiParams

PARAMS = TensorJacobiParams.from_lists([0.5, 1.5], [-0.5, 0.25])


@pytest.fixture(scope="module")
def tight():
    return build_frame(PARAMS, "tight", J_max=4)


@pytest.fixture(scope="module")
def dual():
    return build_frame(PARAMS, "dual", J_max=4)


def _input(rng, degree=8):
    return JacobiExpansion.random(PARAMS, degree, rng)


def test_level_shapes(tight):
    assert tight.tight and not tight.is_complex
    for j in range(5):
        L = tight.level(j)
        assert L.modes == 2 ** j
        assert L.grid_shape == (2 ** (j + 1),) * 2
        np.testing.assert_allclose(L.sqrt_c.reshape(-1) ** 2, L.cubature.weights, rtol=1e-14)
    with pytest.raises(IndexError):
        tight.level(5)


@pytest.mark.parametrize("config", ["tight", "dual"])
def test_round_trip(config, request):
    frame = request.getfixturevalue(config)
    f = _input(np.random.default_rng(0))
    g = synthesize(frame, analyze(frame, f))
    assert (g - f).l2_norm() < 1e-12 * f.l2_norm()


def test_tight_parseval(tight):
    f = _input(np.random.default_rng(1))
    assert analyze(tight, f).energy() == pytest.approx(f.l2_norm() ** 2, rel=1e-12)
    spread, lo, hi = frame_bound_ratio(tight, np.random.default_rng(2), trials=10)
    assert spread == pytest.approx(1.0, abs=1e-12)


def test_analysis_matches_pointwise_convolution(tight):
    # <f, phi_xi> = c_xi^(1/2) (Phi_j * f)(xi), evaluated at the node directly
    f = _input(np.random.default_rng(3))
    h = analyze(tight, f)
    for j in (0, 2, 4):
        conv = spectral_convolve(tight.analysis_cutoff, j, f)
        L = tight.level(j)
        for xi in (0, L.size // 3, L.size - 1):
            idx = tight.unravel(j, xi)
            expected = L.sqrt_c[idx] * conv.evaluate(tight.node(j, xi))
            assert h[j, xi] == pytest.approx(expected, abs=1e-13)


def test_single_needlet_synthesis(tight):
    h = NeedletCoefficients.single(tight, 3, 17, 2.5)
    g = synthesize(tight, h)
    psi = needlet_expansion(tight, 3, 17)
    np.testing.assert_allclose(g.coeffs[:8, :8], 2.5 * psi.coeffs, atol=1e-15)
    x = np.array([0.1, -0.3])
    assert needlet_values(tight, 3, 17, x) == pytest.approx(psi.evaluate(x))
    with pytest.raises(ValueError):
        needlet_expansion(tight, 3, 17, which="both")


def test_coverage_error(tight):
    f = JacobiExpansion.from_dict(PARAMS, {(20, 0): 1.0})
    with pytest.raises(CoverageError):
        analyze(tight, f)


def test_config_errors():
    with pytest.raises(ValueError):
        build_frame(PARAMS, "nope", J_max=2)
    # a cutoff without the second-kind projection property is refused
    with pytest.raises(CutoffTypeError):
        build_frame(PARAMS, make_radial_impostor(2), J_max=2)
    with pytest.raises(BudgetExceededError):
        build_frame(PARAMS, "tight", J_max=6, budget=1000)


def test_dual_frame_masks_differ(dual):
    L = dual.level(3)
    assert not np.allclose(L.mask_A, L.mask_B)


def test_coefficient_containers(tight):
    f = _input(np.random.default_rng(4))
    h = analyze(tight, f)
    flat = h.to_flat()
    assert len(flat) == sum(L.size for L in tight.levels)
    back = NeedletCoefficients.from_flat(tight, flat)
    np.testing.assert_array_equal(back.to_flat(), flat)
    with pytest.raises(ValueError):
        NeedletCoefficients.from_flat(tight, flat[:-1])
    assert (h - h).nnz() == 0
    assert (2.0 * h).energy() == pytest.approx(4 * h.energy())
    assert (-h + h).energy() == 0.0
    assert sum(1 for _ in h.items()) == h.nnz()


def test_parseval_norms_match_cubature(tight):
    norms, comp = level_needlet_norms(tight, 2, 2)
    for xi in (0, 9, 63):
        idx = tight.unravel(2, xi)
        nn = needlet_norms(tight, 2, xi, 2)
        assert norms[idx] == pytest.approx(nn.norm, rel=1e-12)
        assert comp[idx] == pytest.approx(nn.comparand)
        g = needlet_expansion(tight, 2, xi)
        assert lp_norm(g, 2, level=6) == pytest.approx(nn.norm, rel=1e-11)


def test_comparand_is_one_at_p2(tight):
    nn = needlet_norms(tight, 3, 11, 2)
    assert nn.comparand == 1.0
    assert 0 < nn.ratio <= 1.0 + 1e-12
