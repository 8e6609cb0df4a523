"""
区域分析 - log-log 最小二乘拟合、稳定/不稳定区的膝点、不稳定性模下界
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field, field_validator

from errors import ComputeError, DomainError, UsageError
from spectrum import OperatorTag, SpectrumRecord

logger = logging.getLogger(__name__)

KNEE_MIN_LEN = 20
SUMMARY_MIN_LEN = 50


@dataclass(frozen=True)
class Transform:
    """横轴变换：log_j、j_pow(p)、log_kappa"""
    kind: str
    power: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("log_j", "j_pow", "log_kappa"):
            raise UsageError(f"transform: 未知变换 {self.kind}")
        if self.kind == "j_pow" and not (self.power and self.power > 0):
            raise UsageError(f"transform: j_pow 需要正的幂次，收到 {self.power}")

    @classmethod
    def parse(cls, text: str) -> "Transform":
        """'log_j'、'log_kappa'、'j_pow:0.5' 或 'j_pow(0.5)'"""
        text = text.strip()
        if text.startswith("j_pow"):
            arg = text[len("j_pow"):].strip("():")
            try:
                return cls("j_pow", float(arg))
            except ValueError:
                raise UsageError(f"transform: 无法解析幂次 {text!r}")
        return cls(text)

    def apply(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "j_pow":
            return x ** self.power
        return np.log(x)

    def __str__(self) -> str:
        return f"j_pow({self.power:g})" if self.kind == "j_pow" else self.kind


LOG_J = Transform("log_j")


class FitResult(BaseModel):
    slope: float
    intercept: float
    r_squared: float = Field(ge=0, le=1)
    window: tuple[int, int]
    x_transform: str

    def as_record(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "window": list(self.window),
            "transform": self.x_transform,
        }


def fit_loglog(points: Sequence[tuple[float, float]], transform: Transform = LOG_J,
               window: Optional[tuple[int, int]] = None) -> FitResult:
    """
    对 (transform(x), log y) 做普通最小二乘

    Args:
        points: (x, y) 序列，x、y 均为正
        window: 1 起始、两端包含的下标区间，缺省为全部点
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    lo, hi = window if window is not None else (1, len(pts))
    if lo >= hi:
        raise ComputeError(f"拟合窗口 [{lo}, {hi}] 退化")
    sel = pts[max(lo, 1) - 1:min(hi, len(pts))]
    if len(sel) < 3:
        raise ComputeError(f"拟合窗口 [{lo}, {hi}] 内只有 {len(sel)} 个点，至少需要 3 个")
    x, y = sel[:, 0], sel[:, 1]
    if np.any(x <= 0) or np.any(y <= 0):
        raise DomainError("log-log 拟合要求 x、y 全部为正")
    X, Y = transform.apply(x), np.log(y)
    dx = X - X.mean()
    sxx = float(dx @ dx)
    if sxx == 0:
        raise ComputeError(f"拟合窗口 [{lo}, {hi}] 内 x 全部相同")
    slope = float(dx @ (Y - Y.mean())) / sxx
    intercept = float(Y.mean() - slope * X.mean())
    resid = Y - (slope * X + intercept)
    dy = Y - Y.mean()
    ss_tot = float(dy @ dy)
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(resid @ resid) / ss_tot
    return FitResult(slope=slope, intercept=intercept, r_squared=min(1.0, max(0.0, r2)),
                     window=(lo, hi), x_transform=str(transform))


def fit_spectrum(spectrum: SpectrumRecord, transform: Transform, window: tuple[int, int]) -> FitResult:
    """以 rank 为横坐标拟合一条谱"""
    sigma = spectrum.sigma
    ranks = np.arange(1, len(sigma) + 1, dtype=float)
    return fit_loglog(np.column_stack([ranks, sigma]), transform, window)


# ==================== 膝点 ====================

@dataclass(frozen=True)
class Knee:
    index: int
    plateau_level: float
    fired: bool


def detect_knee(spectrum: SpectrumRecord) -> Knee:
    """
    第一个满足 σ_j < σ_plateau / e 的 j（1 起始）

    σ_plateau 为前 max(5, ⌊len/100⌋) 项的中位数；从未跌破阈值时返回最后一个下标，fired=False
    """
    sigma = spectrum.sigma
    if len(sigma) < KNEE_MIN_LEN:
        raise DomainError(f"膝点检测至少需要 {KNEE_MIN_LEN} 个奇异值，当前 {len(sigma)}")
    head = max(5, len(sigma) // 100)
    plateau = float(np.median(sigma[:head]))
    below = np.nonzero(sigma < plateau / math.e)[0]
    if below.size == 0:
        logger.warning(f"谱中没有低于 σ_plateau/e 的值 ({spectrum.operator_tag.value}, κ={spectrum.kappa})")
        return Knee(len(sigma), plateau, False)
    return Knee(int(below[0]) + 1, plateau, True)


def predicted_shift_point(tag: OperatorTag, dim_n: int, kappa: float) -> tuple[float, float]:
    """稳定区与不稳定区的理论转折点 (j, σ)"""
    tag = OperatorTag(tag)
    if tag == OperatorTag.HERGLOTZ_A:
        return kappa ** (dim_n - 1), 1.0
    if tag == OperatorTag.HERGLOTZ_Q:
        return kappa ** (dim_n - 1), kappa ** (-(dim_n - 1) / 2)
    if tag == OperatorTag.FARFIELD_F:
        return kappa ** dim_n, 1.0
    return kappa ** dim_n, kappa ** (-dim_n / 2)


def tail_power(tag: OperatorTag, dim_n: int) -> float:
    """不稳定区指数中 j 的幂次：Herglotz 为 1/(n-1)，远场为 1/(2n)"""
    return 1 / (dim_n - 1) if OperatorTag(tag).is_herglotz else 1 / (2 * dim_n)


class RegionSummary(BaseModel):
    plateau_level: float
    knee_index: int
    stable_fit: Optional[FitResult] = None
    tail_fit: Optional[FitResult] = None
    predicted_shift: tuple[float, float]
    knee_over_predicted: float
    stable_floor_ratio: Optional[tuple[float, float]] = None
    flags: list[str] = Field(default_factory=list)


def summarize_regions(spectrum: SpectrumRecord) -> RegionSummary:
    """
    稳定区 [2, ⌊knee/2⌋] 上按 log_j 拟合，不稳定区 [2·knee, min(5·knee, len)] 上按 j_pow(p) 拟合

    窗口塌缩时对应拟合为 None 并记 flag，不抛异常；远场谱另给出稳定窗内 σ_j·j^{1/(2n)} 的最小/最大值
    """
    if len(spectrum) < SUMMARY_MIN_LEN:
        raise DomainError(f"区域分析至少需要 {SUMMARY_MIN_LEN} 个奇异值，当前 {len(spectrum)}")
    knee = detect_knee(spectrum)
    flags = [] if knee.fired else ["knee_not_found"]
    n_total = len(spectrum)

    stable_window = (2, knee.index // 2)
    tail_window = (2 * knee.index, min(5 * knee.index, n_total))
    p = tail_power(spectrum.operator_tag, spectrum.dim_n)

    def try_fit(window, transform, flag):
        try:
            return fit_spectrum(spectrum, transform, window)
        except ComputeError as e:
            logger.warning(f"{flag}: {e.detail}")
            flags.append(flag)
            return None

    stable_fit = try_fit(stable_window, LOG_J, "stable_window_collapsed")
    tail_fit = try_fit(tail_window, Transform("j_pow", p), "tail_window_collapsed")

    floor_ratio = None
    if not spectrum.operator_tag.is_herglotz and stable_window[1] >= stable_window[0]:
        j = np.arange(stable_window[0], stable_window[1] + 1)
        scaled = spectrum.sigma[j - 1] * j ** (1 / (2 * spectrum.dim_n))
        floor_ratio = (float(scaled.min()), float(scaled.max()))

    shift = predicted_shift_point(spectrum.operator_tag, spectrum.dim_n, spectrum.kappa)
    return RegionSummary(
        plateau_level=knee.plateau_level,
        knee_index=knee.index,
        stable_fit=stable_fit,
        tail_fit=tail_fit,
        predicted_shift=shift,
        knee_over_predicted=knee.index / shift[0],
        stable_floor_ratio=floor_ratio,
        flags=flags,
    )


# ==================== 不稳定性模 ====================

class ModulusParams(BaseModel):
    h1: float = Field(gt=0)
    h2: float = Field(gt=0)
    mu: float = Field(gt=0)
    beta: float = Field(gt=0)
    gamma0: float = Field(gt=0)

    @field_validator("h1", "h2", "mu", "beta", "gamma0")
    @classmethod
    def finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("参数必须有限")
        return v

    def window(self) -> tuple[float, float]:
        """t 的有效上界 (h1·2^{-γ0}, h2·e^{-μ})"""
        return self.h1 * 2.0 ** (-self.gamma0), self.h2 * math.exp(-self.mu)


def modulus_lower_bound(params: ModulusParams, t: float) -> float:
    """ω(t) ≥ max{t/h1, 2^{-γ0} μ^{γ0/β} (log h2 + log(1/t))^{-γ0/β}}"""
    if not t > 0:
        raise DomainError(f"t 必须为正，收到 {t}")
    bound1, bound2 = params.window()
    if t >= bound1:
        raise DomainError(f"t={t} 超出有效窗: 需要 t < h1·2^(-gamma0) = {bound1}")
    if t >= bound2:
        raise DomainError(f"t={t} 超出有效窗: 需要 t < h2·exp(-mu) = {bound2}")
    ratio = params.gamma0 / params.beta
    second = 2.0 ** (-params.gamma0) * params.mu ** ratio * (math.log(params.h2) + math.log(1 / t)) ** (-ratio)
    return max(t / params.h1, second)
