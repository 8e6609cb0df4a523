import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from errors import ComputeError, DomainError, UsageError
from herglotz import Truncation, herglotz_singular_values
from regions import (
    LOG_J,
    ModulusParams,
    Transform,
    detect_knee,
    fit_loglog,
    fit_spectrum,
    modulus_lower_bound,
    predicted_shift_point,
    summarize_regions,
    tail_power,
)
from spectrum import OperatorTag, SpectrumRecord


def spectrum_of(sigmas, tag=OperatorTag.FARFIELD_F, dim_n=2, kappa=4.0):
    return SpectrumRecord.from_sigmas(dim_n, kappa, tag, sigmas)


def test_exact_power_law():
    x = np.arange(1, 51, dtype=float)
    fit = fit_loglog(np.column_stack([x, x ** -0.5]))
    assert fit.slope == pytest.approx(-0.5, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert fit.window == (1, 50)
    assert fit.x_transform == "log_j"


def test_constant_data():
    x = np.arange(1, 11, dtype=float)
    fit = fit_loglog(np.column_stack([x, np.full(10, 7.0)]))
    assert fit.slope == pytest.approx(0.0, abs=1e-14)
    assert fit.r_squared == 1.0


def test_exponential_in_power():
    j = np.arange(1, 401, dtype=float)
    sigma = 3.0 * np.exp(-np.sqrt(j) / 10)
    fit = fit_loglog(np.column_stack([j, sigma]), Transform("j_pow", 0.5))
    assert fit.slope == pytest.approx(-0.1, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-10)


@settings(max_examples=50, deadline=None)
@given(slope=st.floats(-3.0, 3.0), scale=st.floats(0.01, 100.0))
def test_recovers_any_power_law(slope, scale):
    x = np.geomspace(1.0, 1e3, 30)
    fit = fit_loglog(np.column_stack([x, scale * x ** slope]))
    assert fit.slope == pytest.approx(slope, abs=1e-9)


def test_window_selects_points():
    x = np.arange(1, 21, dtype=float)
    y = np.where(x <= 10, x ** -1.0, 10.0 ** -1 * (x / 10) ** -3.0)
    head = fit_loglog(np.column_stack([x, y]), window=(1, 10))
    tail = fit_loglog(np.column_stack([x, y]), window=(10, 20))
    assert head.slope == pytest.approx(-1.0, abs=1e-12)
    assert tail.slope == pytest.approx(-3.0, abs=1e-12)
    assert tail.as_record()["window"] == [10, 20]


def test_degenerate_windows():
    pts = np.column_stack([np.arange(1, 11, dtype=float), np.ones(10)])
    with pytest.raises(ComputeError):
        fit_loglog(pts, window=(5, 5))
    with pytest.raises(ComputeError):
        fit_loglog(pts, window=(9, 10))
    with pytest.raises(ComputeError):
        fit_loglog(np.column_stack([np.ones(5), np.arange(1, 6, dtype=float)]))
    with pytest.raises(DomainError):
        fit_loglog(np.column_stack([np.arange(0, 5, dtype=float), np.ones(5)]))


def test_transform_parse():
    assert Transform.parse("log_j") == LOG_J
    assert Transform.parse("j_pow:0.5") == Transform("j_pow", 0.5)
    assert Transform.parse("j_pow(0.25)") == Transform("j_pow", 0.25)
    assert str(Transform("j_pow", 0.5)) == "j_pow(0.5)"
    for bad in ("j_pow:x", "j_pow(-1)", "sqrt"):
        with pytest.raises(UsageError):
            Transform.parse(bad)


def test_fit_spectrum_uses_rank():
    j = np.arange(1, 101, dtype=float)
    fit = fit_spectrum(spectrum_of(j ** -0.25), LOG_J, (2, 50))
    assert fit.slope == pytest.approx(-0.25, abs=1e-12)


def test_knee_on_synthetic_step():
    sigmas = np.concatenate([np.full(40, 2.0), np.full(60, 0.1)])
    knee = detect_knee(spectrum_of(sigmas))
    assert knee.fired
    assert knee.index == 41
    assert knee.plateau_level == 2.0


def test_knee_not_found_on_constant():
    knee = detect_knee(spectrum_of(np.ones(30)))
    assert not knee.fired
    assert knee.index == 30


@pytest.mark.parametrize("factor", [0.25, 8.0, 1024.0])
def test_knee_is_scale_invariant(factor):
    j = np.arange(1, 301, dtype=float)
    sigmas = np.minimum(1.0, np.exp(-(j - 100) / 20))
    base = detect_knee(spectrum_of(sigmas))
    scaled = detect_knee(spectrum_of(sigmas * factor))
    assert scaled.index == base.index
    assert scaled.plateau_level == base.plateau_level * factor


def test_knee_needs_enough_values():
    with pytest.raises(DomainError):
        detect_knee(spectrum_of(np.ones(19)))


def test_predicted_shift_and_power():
    assert predicted_shift_point(OperatorTag.HERGLOTZ_A, 3, 10.0) == (100.0, 1.0)
    assert predicted_shift_point(OperatorTag.HERGLOTZ_Q, 2, 4.0) == (4.0, 0.5)
    assert predicted_shift_point(OperatorTag.FARFIELD_F, 2, 4.0) == (16.0, 1.0)
    assert predicted_shift_point(OperatorTag.FARFIELD_FTILDE, 2, 4.0) == (16.0, 0.25)
    assert tail_power(OperatorTag.HERGLOTZ_A, 3) == 0.5
    assert tail_power(OperatorTag.FARFIELD_F, 3) == pytest.approx(1 / 6)


def test_summarize_synthetic():
    j = np.arange(1, 601, dtype=float)
    sigmas = np.minimum(1.0, np.exp(-3 * (np.sqrt(j) - 10)))
    summary = summarize_regions(spectrum_of(sigmas, tag=OperatorTag.HERGLOTZ_A, dim_n=3, kappa=10.0))
    # σ < 1/e 从 √j > 10 + 1/3 开始
    assert summary.knee_index == 107
    assert summary.flags == []
    assert summary.stable_fit.slope == pytest.approx(0.0, abs=1e-12)
    assert summary.tail_fit.slope == pytest.approx(-3.0, abs=1e-10)
    assert summary.tail_fit.window == (214, 535)
    assert summary.knee_over_predicted == pytest.approx(1.07)
    assert summary.stable_floor_ratio is None


def test_summarize_collapsed_windows():
    sigmas = np.concatenate([np.full(5, 1.0), np.full(55, 0.01)])
    summary = summarize_regions(spectrum_of(sigmas))
    assert summary.knee_index == 6
    assert "stable_window_collapsed" in summary.flags
    assert summary.stable_fit is None
    assert summary.tail_fit is not None


def test_summarize_reports_far_field_floor_ratio():
    j = np.arange(1, 201, dtype=float)
    sigmas = np.minimum(j ** -0.25, np.exp(-(j - 60) / 5) * 60 ** -0.25)
    summary = summarize_regions(spectrum_of(sigmas, dim_n=2))
    lo, hi = summary.stable_floor_ratio
    assert lo == pytest.approx(1.0)
    assert hi == pytest.approx(1.0)


def test_summarize_needs_fifty_values():
    with pytest.raises(DomainError):
        summarize_regions(spectrum_of(np.ones(49)))


def test_herglotz_tail_end_to_end():
    record = herglotz_singular_values(3, 10.0, Truncation(sigma_floor=1e-14))
    summary = summarize_regions(record)
    assert summary.tail_fit is not None
    assert summary.tail_fit.slope < 0
    assert summary.tail_fit.r_squared >= 0.98


# ==================== 不稳定性模 ====================

def test_modulus_examples():
    p = ModulusParams(h1=1.0, h2=1.0, mu=1.0, beta=1.0, gamma0=1.0)
    assert modulus_lower_bound(p, math.exp(-2)) == pytest.approx(0.25, rel=1e-12)
    assert modulus_lower_bound(p, 0.3) == pytest.approx(0.4153, abs=1e-4)


def test_modulus_half_exponents():
    # n=3 的代入: γ0 = β = 1/2, μ = 1/κ, κ = 10
    p = ModulusParams(h1=1.0, h2=1.0, mu=0.1, beta=0.5, gamma0=0.5)
    expected = (0.1 / math.sqrt(2)) / math.log(1000)
    assert modulus_lower_bound(p, 1e-3) == pytest.approx(expected, rel=1e-12)


def test_modulus_window_errors():
    p = ModulusParams(h1=1.0, h2=1.0, mu=1.0, beta=1.0, gamma0=1.0)
    with pytest.raises(DomainError, match="h1"):
        modulus_lower_bound(p, 0.5)
    q = ModulusParams(h1=10.0, h2=1.0, mu=2.0, beta=1.0, gamma0=1.0)
    with pytest.raises(DomainError, match="h2"):
        modulus_lower_bound(q, 0.2)
    with pytest.raises(DomainError):
        modulus_lower_bound(p, 0.0)


def test_modulus_params_validation():
    with pytest.raises(ValueError):
        ModulusParams(h1=0.0, h2=1.0, mu=1.0, beta=1.0, gamma0=1.0)
    with pytest.raises(ValueError):
        ModulusParams(h1=1.0, h2=math.inf, mu=1.0, beta=1.0, gamma0=1.0)


def test_modulus_is_monotone():
    p = ModulusParams(h1=2.0, h2=3.0, mu=0.5, beta=1.0, gamma0=1.5)
    ts = np.geomspace(1e-8, 0.3, 60)
    values = [modulus_lower_bound(p, t) for t in ts]
    assert all(b >= a for a, b in zip(values, values[1:]))
