import math

import numpy as np
import pytest

from errors import ComputeError, DomainError, UsageError
from farfield import (
    EigenMode,
    assemble_gram,
    farfield_kernel,
    farfield_singular_values,
    kernel_at_zero,
    symmetric_eigenvalues,
)
from quadrature import GridSpec
from regions import detect_knee, fit_loglog, summarize_regions
from spectrum import OperatorTag


def test_kernel_zero_limits():
    assert kernel_at_zero(2, 3.0) == pytest.approx(4 * math.pi ** 2 * 3.0, rel=1e-14)
    assert kernel_at_zero(3, 3.0) == pytest.approx(16 * math.pi ** 2 * 9.0, rel=1e-14)
    for n in (2, 3):
        assert farfield_kernel(n, 3.0, 0.0) == kernel_at_zero(n, 3.0)
        assert farfield_kernel(n, 3.0, 1e-7) == pytest.approx(kernel_at_zero(n, 3.0), rel=1e-10)


def test_kernel_values():
    # n=3: (2π)³ κ² (κd)^{-1} J_{1/2}(κd)² = 16π² sin²(κd)/d²
    d = np.array([0.1, 0.5, 2.0])
    expected = 16 * math.pi ** 2 * np.sin(2.0 * d) ** 2 / d ** 2
    np.testing.assert_allclose(farfield_kernel(3, 2.0, d), expected, rtol=1e-12)
    with pytest.raises(DomainError):
        farfield_kernel(2, 1.0, -0.1)
    with pytest.raises(DomainError):
        farfield_kernel(4, 1.0, 0.1)


@pytest.mark.parametrize("dim_n, expected", [(2, 2 * math.pi), (3, 4 * math.pi)])
def test_single_cell(dim_n, expected):
    record = farfield_singular_values(dim_n, 1.0, GridSpec(dim_n, 1))
    assert len(record) == 1
    assert record.sigma[0] == pytest.approx(expected, rel=1e-14)
    assert record.operator_tag is OperatorTag.FARFIELD_F


def test_gram_is_symmetric_and_psd():
    gram = assemble_gram(2, 5.0, GridSpec(2, 10))
    assert np.array_equal(gram.data, gram.data.T)
    values = np.linalg.eigvalsh(gram.data)
    assert values.min() >= -1e-10 * values.max()


def test_gram_3d_symmetric():
    gram = assemble_gram(3, 2.0, GridSpec(3, 4))
    assert gram.size == 64
    assert np.array_equal(gram.data, gram.data.T)
    assert np.all(np.diag(gram.data) == kernel_at_zero(3, 2.0) / 64)


def test_gram_thread_independent():
    grid = GridSpec(2, 30)
    single = assemble_gram(2, 4.0, grid, threads=1)
    multi = assemble_gram(2, 4.0, grid, threads=4)
    assert np.array_equal(single.data, multi.data)


def test_gram_rejects_mismatch_and_cap():
    with pytest.raises(UsageError):
        assemble_gram(3, 1.0, GridSpec(2, 4))
    with pytest.raises(ComputeError):
        assemble_gram(2, 1.0, GridSpec(2, 20), memory_cap=100)


def test_native_matches_lapack():
    gram = assemble_gram(2, 6.0, GridSpec(2, 12))
    native = symmetric_eigenvalues(gram, backend="native")
    lapack = symmetric_eigenvalues(gram, backend="lapack")
    np.testing.assert_allclose(native, lapack, atol=1e-10 * lapack[0])
    assert np.all(np.diff(native) <= 0)


def test_top_k_matches_full():
    gram = assemble_gram(2, 6.0, GridSpec(2, 16))
    full = symmetric_eigenvalues(gram)
    top = symmetric_eigenvalues(gram, EigenMode("top_k", 8), tol=1e-12)
    np.testing.assert_allclose(top, full[:8], rtol=1e-9)


def test_eigen_limits():
    gram = assemble_gram(2, 1.0, GridSpec(2, 5))
    with pytest.raises(ComputeError):
        symmetric_eigenvalues(gram, full_max=10)
    with pytest.raises(UsageError):
        symmetric_eigenvalues(gram, EigenMode("top_k", 26))


def test_eigen_mode_parse():
    assert EigenMode.parse("full") == EigenMode()
    assert EigenMode.parse("top_k:64") == EigenMode("top_k", 64)
    assert str(EigenMode.parse("top_k:5")) == "top_k:5"
    for bad in ("top_k", "top_k:x", "all", "top_k:0"):
        with pytest.raises(UsageError):
            EigenMode.parse(bad)


def test_normalized_scaling():
    grid = GridSpec(2, 8)
    plain = farfield_singular_values(2, 9.0, grid)
    scaled = farfield_singular_values(2, 9.0, grid, normalized=True)
    np.testing.assert_allclose(scaled.sigma, plain.sigma / 3.0, rtol=1e-14)
    assert scaled.operator_tag is OperatorTag.FARFIELD_FTILDE
    assert scaled.method_meta["scale_factor"] == pytest.approx(1 / 3)
    assert plain.method_meta["grid_m"] == 8
    assert plain.method_meta["mode"] == "full"


def test_ball_domain():
    record = farfield_singular_values(2, 2.0, GridSpec(2, 12, "ball"))
    assert record.method_meta["domain"] == "B_1"
    assert record.method_meta["rows"] == GridSpec(2, 12, "ball").size
    assert np.all(np.diff(record.sigma) <= 0)


@pytest.mark.slow
def test_grid_convergence():
    coarse = farfield_singular_values(2, 4.0, GridSpec(2, 60)).sigma[:20]
    fine = farfield_singular_values(2, 4.0, GridSpec(2, 90), mode=EigenMode("top_k", 20)).sigma
    np.testing.assert_allclose(coarse, fine, rtol=0.02)


@pytest.mark.slow
def test_leading_value_slope_2d():
    kappas = [2.0, 4.0, 8.0, 16.0, 32.0]
    points = [(k, farfield_singular_values(2, k, GridSpec(2, 60), normalized=True,
                                           mode=EigenMode("top_k", 4)).sigma[0]) for k in kappas]
    fit = fit_loglog(points)
    assert -0.55 <= fit.slope <= -0.45


@pytest.mark.slow
def test_leading_value_slope_3d():
    kappas = [2.0, 4.0, 8.0]
    points = [(k, farfield_singular_values(3, k, GridSpec(3, 12), normalized=True,
                                           mode=EigenMode("top_k", 64)).sigma[0]) for k in kappas]
    fit = fit_loglog(points)
    assert -1.15 <= fit.slope <= -0.85


@pytest.mark.slow
def test_stable_region_slope_2d():
    record = farfield_singular_values(2, 8.0, GridSpec(2, 60))
    summary = summarize_regions(record)
    assert summary.stable_fit is not None
    assert -0.35 <= summary.stable_fit.slope <= -0.15


@pytest.mark.slow
@pytest.mark.parametrize("kappa", [4.0, 8.0])
def test_knee_near_kappa_squared_2d(kappa):
    record = farfield_singular_values(2, kappa, GridSpec(2, 60))
    knee = detect_knee(record)
    assert knee.fired
    assert 0.5 <= knee.index / kappa ** 2 <= 2.0
