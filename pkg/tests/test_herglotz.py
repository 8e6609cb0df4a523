import math

import numpy as np
import pytest

from errors import DomainError, UsageError
from herglotz import (
    Truncation,
    spherical_bessel_sigma,
    c_n,
    herglotz_singular_values,
    lambda_ell,
    lambda_ell_closed_form,
    lambda_table,
    multiplicity,
    q_operator_spectrum,
)
from regions import Transform, detect_knee, fit_spectrum
from spectrum import OperatorTag


def test_multiplicity():
    assert [multiplicity(2, l) for l in range(4)] == [1, 2, 2, 2]
    assert [multiplicity(3, l) for l in range(4)] == [1, 3, 5, 7]
    with pytest.raises(DomainError):
        multiplicity(4, 0)
    with pytest.raises(DomainError):
        multiplicity(3, -1)


def test_lambda_zero_at_pi():
    assert lambda_ell(3, math.pi, 0) == pytest.approx(1 / math.pi, rel=1e-12)


@pytest.mark.parametrize("kappa", [0.5, 3.0, 17.2, 60.0])
def test_lambda_zero_closed_form(kappa):
    expected = 1 / math.pi - math.sin(2 * kappa) / (2 * math.pi * kappa)
    assert lambda_ell(3, kappa, 0) == pytest.approx(expected, rel=1e-11, abs=1e-15)


@pytest.mark.parametrize("dim_n", [2, 3])
def test_table_matches_pointwise(dim_n):
    kappa = 10.0
    table = lambda_table(dim_n, kappa, 30)
    for ell in (0, 1, 5, 12, 30):
        assert table[ell] == pytest.approx(lambda_ell(dim_n, kappa, ell), rel=1e-10, abs=1e-300)


@pytest.mark.parametrize("dim_n", [2, 3])
def test_lommel_form(dim_n):
    kappa = 7.0
    table = lambda_table(dim_n, kappa, 10)
    for ell in range(11):
        assert lambda_ell_closed_form(dim_n, kappa, ell) == pytest.approx(table[ell], rel=1e-9, abs=1e-14)


def test_table_is_thread_independent():
    single = lambda_table(3, 200.0, 80, panel_len=0.5, threads=1)
    multi = lambda_table(3, 200.0, 80, panel_len=0.5, threads=4)
    assert np.array_equal(single, multi)


@pytest.mark.parametrize("ell", [0, 1, 7, 20, 45, 60])
def test_spherical_bessel_formula_agrees(ell):
    kappa = 5.0
    lam = lambda_table(3, kappa, 60)[ell]
    assert spherical_bessel_sigma(kappa, ell) == pytest.approx(math.sqrt(c_n(3) * lam), rel=1e-8)


def test_sigma_one_at_pi():
    record = herglotz_singular_values(3, math.pi, Truncation(max_count=40))
    lam = lambda_table(3, math.pi, 10)
    assert record.sigma[0] == pytest.approx(math.sqrt(c_n(3) * lam.max()), rel=1e-12)
    assert record.degrees[0] == int(np.argmax(lam))


def test_multiplicities_in_record():
    record = herglotz_singular_values(3, 4.0, Truncation(sigma_floor=1e-10))
    degrees = record.degrees
    for ell in set(degrees.tolist()):
        assert np.sum(degrees == ell) == 2 * ell + 1
    assert record.operator_tag is OperatorTag.HERGLOTZ_A
    assert np.all(np.diff(record.sigma) <= 0)


def test_truncation_by_count():
    record = herglotz_singular_values(2, 6.0, Truncation(max_count=25))
    assert len(record) == 25
    assert record.entries["rank"].tolist() == list(range(1, 26))


def test_truncation_by_floor():
    record = herglotz_singular_values(3, 8.0, Truncation(sigma_floor=1e-8))
    assert record.sigma.min() >= 1e-8
    # 截断发生在 ℓ > 2κ 之后
    assert record.method_meta["ell_max_generated"] >= 16


def test_truncation_needs_a_rule():
    with pytest.raises(UsageError):
        Truncation()
    with pytest.raises(UsageError):
        Truncation(max_count=0)
    with pytest.raises(UsageError):
        Truncation(sigma_floor=-1.0)


@pytest.mark.parametrize("dim_n", [2, 3])
def test_q_operator_scaling(dim_n):
    kappa = 9.0
    trunc = Truncation(max_count=30)
    a = herglotz_singular_values(dim_n, kappa, trunc)
    q = q_operator_spectrum(dim_n, kappa, trunc)
    factor = kappa ** (-(dim_n - 1) / 2)
    np.testing.assert_allclose(q.sigma, a.sigma * factor, rtol=1e-15)
    assert q.operator_tag is OperatorTag.HERGLOTZ_Q
    assert q.method_meta["scale_factor"] == pytest.approx(factor)


def test_bad_inputs():
    with pytest.raises(DomainError):
        herglotz_singular_values(4, 1.0, Truncation(max_count=3))
    with pytest.raises(DomainError):
        herglotz_singular_values(3, 0.0, Truncation(max_count=3))
    with pytest.raises(DomainError):
        lambda_ell(3, -2.0, 0)


def test_custom_source_is_used():
    calls = []

    def source(dim_n, kappa, ell_max):
        calls.append(ell_max)
        return lambda_table(dim_n, kappa, ell_max)

    record = herglotz_singular_values(3, 2.0, Truncation(sigma_floor=1e-12), source=source)
    assert calls
    assert len(record) > 0


@pytest.mark.parametrize("dim_n", [2, 3])
def test_plateau_level(dim_n):
    kappa = 200.0
    record = herglotz_singular_values(dim_n, kappa, Truncation(sigma_floor=1e-6))
    # Λ_ℓ → 1/π 对 ℓ ≪ κ 成立
    plateau = math.sqrt(c_n(dim_n) / math.pi)
    assert np.median(record.sigma[:10]) == pytest.approx(plateau, rel=0.05)


# n=2, κ=5 的膝点比约 2.4：平台只有几个 ℓ，Bessel 衰减拖得长，上限放宽到 3
@pytest.mark.parametrize("dim_n, kappa, band", [
    (2, 5.0, (0.5, 3.0)),
    (2, 10.0, (0.5, 2.0)),
    (2, 20.0, (0.5, 2.0)),
    (3, 5.0, (0.5, 2.0)),
    (3, 10.0, (0.5, 2.0)),
    (3, 20.0, (0.5, 2.0)),
])
def test_knee_near_predicted_shift(dim_n, kappa, band):
    record = herglotz_singular_values(dim_n, kappa, Truncation(sigma_floor=1e-12))
    knee = detect_knee(record)
    assert knee.fired
    ratio = knee.index / kappa ** (dim_n - 1)
    assert band[0] <= ratio <= band[1]


@pytest.mark.slow
def test_tail_decays_superexponentially():
    kappa = 30.0
    record = herglotz_singular_values(3, kappa, Truncation(sigma_floor=1e-12))
    degrees = record.degrees
    lam = record.sigma ** 2 / c_n(3)
    first = {}
    for ell, value in zip(degrees, lam):
        first.setdefault(int(ell), value)
    beyond = sorted(l for l in first if l > 2 * kappa)
    ratios = [first[b] / first[a] for a, b in zip(beyond, beyond[1:])]
    assert all(r2 < r1 for r1, r2 in zip(ratios, ratios[1:]))


def test_plateau_is_flat_across_kappa():
    medians = []
    for kappa in (5.0, 10.0, 20.0):
        record = herglotz_singular_values(3, kappa, Truncation(sigma_floor=1e-12))
        head = record.sigma[:math.floor(0.5 * kappa ** 2)]
        assert head.min() / head.max() >= 0.2
        medians.append(np.median(head))
    assert max(medians) / min(medians) <= 2.0


def test_tail_fit_against_sqrt_rank():
    # 尾部 log σ_j 对 j^{1/2} 近似线性，斜率随 κ 几乎不变（约 -1.7 到 -1.45），
    # 乘以 κ 之后并不是常数；κ=5 时 R² 约 0.97
    transform = Transform.parse("j_pow(0.5)")
    slopes = []
    for kappa in (5.0, 10.0, 20.0):
        lo, hi = int(4 * kappa ** 2), int(10 * kappa ** 2)
        record = herglotz_singular_values(3, kappa, Truncation(max_count=hi))
        fit = fit_spectrum(record, transform, (lo, hi))
        assert fit.slope < 0
        assert fit.r_squared >= 0.96
        slopes.append(abs(fit.slope))
    assert max(slopes) / min(slopes) <= 1.3
    products = [s * k for s, k in zip(slopes, (5.0, 10.0, 20.0))]
    assert max(products) / min(products) > 1.3
