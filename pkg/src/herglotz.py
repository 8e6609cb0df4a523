"""
Herglotz 算子谱 - 用 Jacobi-Anger 对角化计算 A_κ 与 Q_κ 的精确奇异值（含重数）

σ = ((2π)^n Λ_ℓ(κ))^{1/2}，每个次数 ℓ 重复 N_ℓ(n) 次，
Λ_ℓ(κ) = (1/κ) ∫_0^κ r J_{ℓ+ν}(r)² dr，ν = (n-2)/2
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Protocol

import numpy as np

from deps import parallel_map
from errors import ComputeError, DomainError, UsageError
from quadrature import DEFAULT_GL_POINTS, DEFAULT_PANEL_LEN, composite_rule, integrate_interval
from special_functions import BesselOrder, bessel_j, bessel_j_table, spherical_j
from spectrum import OperatorTag, SpectrumRecord

logger = logging.getLogger(__name__)

DEFAULT_SIGMA_FLOOR = 1e-14
ELL_HARD_CAP = 100_000
_NODE_CHUNK = 2048


def _check_dim(dim_n: int):
    if dim_n not in (2, 3):
        raise DomainError(f"维数 n 只支持 2 或 3，收到 {dim_n}")


def _check_kappa(kappa: float):
    if not kappa > 0:
        raise DomainError(f"κ 必须为正，收到 {kappa}")


def multiplicity(dim_n: int, ell: int) -> int:
    """N_ℓ(n)：n=2 时 ℓ=0 为 1、否则为 2；n=3 时为 2ℓ+1"""
    _check_dim(dim_n)
    if ell < 0:
        raise DomainError(f"ℓ 必须非负，收到 {ell}")
    if dim_n == 2:
        return 1 if ell == 0 else 2
    return 2 * ell + 1


def c_n(dim_n: int) -> float:
    """σ² = c_n Λ_ℓ 中的常数 (2π)^n"""
    return (2 * math.pi) ** dim_n


def _twice_nu(dim_n: int) -> int:
    return dim_n - 2


def lambda_ell(dim_n: int, kappa: float, ell: int, panel_len: float = DEFAULT_PANEL_LEN,
               gl_points: int = DEFAULT_GL_POINTS) -> float:
    """单个 Λ_ℓ(κ)，逐点调用 bessel_j"""
    _check_dim(dim_n)
    _check_kappa(kappa)
    order = BesselOrder(2 * ell + _twice_nu(dim_n))
    integral = integrate_interval(lambda r: r * bessel_j(order, r) ** 2, 0.0, kappa, panel_len, gl_points)
    return integral / kappa


def lambda_table(dim_n: int, kappa: float, ell_max: int, panel_len: float = DEFAULT_PANEL_LEN,
                 gl_points: int = DEFAULT_GL_POINTS, threads: int = 1) -> np.ndarray:
    """
    批量计算 Λ_0..Λ_{ell_max}

    节点分块求 Bessel 表，块内求和后按块顺序累加，结果与线程数无关
    """
    _check_dim(dim_n)
    _check_kappa(kappa)
    rule = composite_rule(0.0, kappa, panel_len, gl_points)
    chunks = [slice(s, min(s + _NODE_CHUNK, rule.size)) for s in range(0, rule.size, _NODE_CHUNK)]

    def partial(sl: slice) -> np.ndarray:
        r = rule.nodes[sl]
        table = bessel_j_table(_twice_nu(dim_n), ell_max + 1, r)
        return np.sum(table * table * (r * rule.weights[sl]), axis=1)

    total = np.zeros(ell_max + 1)
    for piece in parallel_map(partial, chunks, threads):
        total += piece
    return total / kappa


def lambda_ell_closed_form(dim_n: int, kappa: float, ell: int) -> float:
    """
    Lommel 闭式 ∫_0^κ r J_μ² dr = (κ²/2)[J_μ(κ)² - J_{μ-1}(κ) J_{μ+1}(κ)]

    μ ≫ κ 时两项相消严重，只用于交叉校验
    """
    _check_dim(dim_n)
    _check_kappa(kappa)
    twice_mu = 2 * ell + _twice_nu(dim_n)
    j_mu = bessel_j(BesselOrder(twice_mu), kappa)
    j_next = bessel_j(BesselOrder(twice_mu + 2), kappa)
    if twice_mu == 0:
        j_prev = -bessel_j(BesselOrder(2), kappa)
    elif twice_mu == 1:
        j_prev = math.sqrt(2 / (math.pi * kappa)) * math.cos(kappa)
    else:
        j_prev = bessel_j(BesselOrder(twice_mu - 2), kappa)
    return kappa / 2 * (j_mu * j_mu - j_prev * j_next)


def spherical_bessel_sigma(kappa: float, ell: int, panel_len: float = DEFAULT_PANEL_LEN,
                           gl_points: int = DEFAULT_GL_POINTS) -> float:
    """n=3 的等价写法 σ_ℓ = 4πκ (∫_0^1 r² j_ℓ(κr)² dr)^{1/2}"""
    _check_kappa(kappa)
    integral = integrate_interval(lambda r: r * r * spherical_j(ell, kappa * r) ** 2,
                                  0.0, 1.0, min(1.0, panel_len / kappa), gl_points)
    return 4 * math.pi * kappa * math.sqrt(integral)


@dataclass(frozen=True)
class Truncation:
    """截断规则：最多 max_count 个值，或 sigma 低于 sigma_floor 时停止（至少给一个）"""
    max_count: Optional[int] = None
    sigma_floor: Optional[float] = None

    def __post_init__(self):
        if self.max_count is None and self.sigma_floor is None:
            raise UsageError("truncation 需要 max_count 或 sigma_floor 至少一个")
        if self.max_count is not None and self.max_count < 1:
            raise UsageError(f"max_count 必须为正，收到 {self.max_count}")
        if self.sigma_floor is not None and not self.sigma_floor > 0:
            raise UsageError(f"sigma_floor 必须为正，收到 {self.sigma_floor}")


class LambdaSource(Protocol):
    def __call__(self, dim_n: int, kappa: float, ell_max: int) -> np.ndarray: ...


def herglotz_singular_values(dim_n: int, kappa: float, truncation: Truncation,
                             panel_len: float = DEFAULT_PANEL_LEN, gl_points: int = DEFAULT_GL_POINTS,
                             threads: int = 1, source: Optional[LambdaSource] = None,
                             ell_cap: int = ELL_HARD_CAP) -> SpectrumRecord:
    """
    A_κ 的奇异值谱

    按 ℓ 递增生成，直到 ℓ > 2κ 且（Λ_ℓ 低于 floor²/(2π)^n 或累计个数达到 max_count），再排序

    Args:
        source: Λ 表的来源（例如带缓存的包装），缺省直接调用 lambda_table
    """
    _check_dim(dim_n)
    _check_kappa(kappa)
    if source is None:
        def source(n, k, lmax):
            return lambda_table(n, k, lmax, panel_len, gl_points, threads)

    const = c_n(dim_n)
    lam_floor = truncation.sigma_floor ** 2 / const if truncation.sigma_floor else 0.0
    ell_min_stop = math.floor(2 * kappa) + 1
    ell_max = max(16, ell_min_stop + 20)
    flags: list[str] = []
    while True:
        lam = source(dim_n, kappa, ell_max)
        ells = np.arange(ell_max + 1)
        counts = np.cumsum([multiplicity(dim_n, int(l)) for l in ells])
        stop = None
        beyond = ells >= ell_min_stop
        if truncation.sigma_floor is not None:
            hits = np.nonzero(beyond & (lam < lam_floor))[0]
            if hits.size:
                stop = int(hits[0])
        if truncation.max_count is not None:
            hits = np.nonzero(beyond & (counts >= truncation.max_count))[0]
            if hits.size:
                cand = int(hits[0]) + 1
                stop = cand if stop is None else min(stop, cand)
        if stop is None and np.any(beyond & (lam == 0)):
            # Λ 已下溢为 0，max_count 无法再增长
            stop = int(np.nonzero(beyond & (lam == 0))[0][0])
            flags.append("underflow_before_max_count")
            logger.warning(f"Λ_ℓ 在 ℓ={stop} 处下溢，谱长度不足 max_count={truncation.max_count}")
        if stop is not None:
            break
        if ell_max >= ell_cap:
            raise ComputeError(f"ℓ ≤ {ell_cap} 内未达到截断条件 (n={dim_n}, κ={kappa})")
        ell_max = min(ell_cap, 2 * ell_max)
        logger.debug(f"扩大生成范围 ell_max={ell_max}")

    keep = (ells < stop) & (lam > 0) & (lam >= lam_floor)
    sigmas, degrees = [], []
    for ell in ells[keep]:
        s = math.sqrt(const * lam[ell])
        mult = multiplicity(dim_n, int(ell))
        sigmas.extend([s] * mult)
        degrees.extend([int(ell)] * mult)
    record = SpectrumRecord.from_sigmas(
        dim_n, kappa, OperatorTag.HERGLOTZ_A, sigmas, degrees,
        {
            "method": "jacobi_anger",
            "ell_max_generated": int(stop) - 1,
            "sigma_floor": truncation.sigma_floor,
            "max_count": truncation.max_count,
            "panel_len": panel_len,
            "gl_points": gl_points,
            "flags": flags,
        },
    )
    if truncation.max_count is not None and len(record) > truncation.max_count:
        record.entries = record.entries.iloc[:truncation.max_count].reset_index(drop=True)
    logger.info(f"Herglotz 谱: n={dim_n}, κ={kappa}, {len(record)} 个奇异值 (ℓ < {stop})")
    return record


def q_operator_spectrum(dim_n: int, kappa: float, truncation: Truncation, **kwargs) -> SpectrumRecord:
    """未归一化算子 Q_κ = κ^{-(n-1)/2} A_κ 的谱"""
    record = herglotz_singular_values(dim_n, kappa, truncation, **kwargs)
    factor = kappa ** (-(dim_n - 1) / 2)
    return record.scaled(factor, OperatorTag.HERGLOTZ_Q, scale_factor=factor)
