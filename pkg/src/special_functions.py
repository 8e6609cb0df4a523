"""
特殊函数模块 - 第一类 Bessel 函数 J_ν（整数/半整数阶）、球 Bessel 函数 j_ℓ、半整数点 Gamma 函数

求值分支（按 x 与 ν 划分，保证每个分支都稳定）:
    - 幂级数:      x ≤ 12，或 x² ≤ ν+1
    - Miller 向下递推 + 归一化: ν > x
    - 向上递推:    ν ≤ x ≤ 1e4·(1+ν)，起点 J_0,J_1（整数阶）或 J_{1/2},J_{3/2}（半整数阶）
    - Hankel 渐近展开: x > 1e4·(1+ν)
"""
import logging
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from errors import DomainError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

MAX_TWICE_ORDER = 4096
UNDERFLOW = 1e-290
SERIES_LIMIT = 12.0
HANKEL_FACTOR = 1e4
_RESCALE_AT = 1e250
_SERIES_MAX_TERMS = 400


@dataclass(frozen=True)
class BesselOrder:
    """Bessel 阶 ν = twice_order / 2，整数与半整数阶都能精确表示"""
    twice_order: int

    def __post_init__(self):
        if not isinstance(self.twice_order, (int, np.integer)) or self.twice_order < 0:
            raise DomainError(f"twice_order 必须是非负整数，收到 {self.twice_order!r}")
        if self.twice_order > MAX_TWICE_ORDER:
            raise DomainError(f"twice_order={self.twice_order} 超过上限 {MAX_TWICE_ORDER}")

    @property
    def nu(self) -> float:
        return self.twice_order / 2

    @property
    def is_half_integer(self) -> bool:
        return self.twice_order % 2 == 1

    @classmethod
    def of(cls, nu: float) -> "BesselOrder":
        twice = int(round(2 * nu))
        if abs(2 * nu - twice) > 1e-12:
            raise DomainError(f"只支持整数或半整数阶，收到 ν={nu}")
        return cls(twice)


# ==================== 各分支实现（x 为一维正数组） ====================

def _series(nu: float, x: np.ndarray) -> np.ndarray:
    """幂级数 Σ (-1)^k (x/2)^{2k+ν} / (k! Γ(k+ν+1))，首项在对数域计算避免溢出"""
    half = x / 2
    q = half * half
    term = np.exp(nu * np.log(half) - math.lgamma(nu + 1))
    total = term.copy()
    k = 0
    while k < _SERIES_MAX_TERMS:
        k += 1
        term = -term * q / (k * (k + nu))
        total += term
        # 项先增后减，必须越过峰值后再判断收敛
        if k * (k + nu) > q.max() and np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    return total


def _start_order(top: float, x_max: float) -> int:
    """Miller 递推的起始阶（相对 base 的偏移）"""
    ref = max(top, x_max)
    return int(ref) + 30 + int(10 * np.cbrt(ref + 1))


def _half_integer_seeds(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """J_{1/2}, J_{3/2} 的初等闭式"""
    s, c = np.sin(x), np.cos(x)
    amp = np.sqrt(2 / (np.pi * x))
    return amp * s, amp * (s / x - c)


def _miller(twice_base: int, offsets: np.ndarray, x: np.ndarray) -> np.ndarray:
    """
    Miller 向下递推，返回 J_{base/2 + k}(x)，k 取自 offsets

    twice_base 只能是 0（整数阶，用 J_0 + 2ΣJ_{2k} = 1 归一化）
    或 1（半整数阶，用 J_{1/2}、J_{3/2} 闭式中较大者归一化）
    """
    offsets = np.asarray(offsets, dtype=int)
    base = twice_base / 2
    top = int(offsets.max())
    start = _start_order(top, float(x.max()))
    wanted = set(int(k) for k in offsets)
    stored: dict[int, np.ndarray] = {}

    nxt = np.zeros_like(x)              # J_{k+1}
    cur = np.full_like(x, 1e-300)       # J_k
    norm_sum = np.zeros_like(x)
    for k in range(start, -1, -1):
        if k in wanted:
            stored[k] = cur.copy()
        if twice_base == 0 and k % 2 == 0:
            norm_sum += cur if k == 0 else 2 * cur
        if k in (0, 1) and twice_base == 1:
            stored.setdefault(-1 - k, cur.copy())   # -1 -> J_{1/2}, -2 -> J_{3/2}
        if k == 0:
            break
        prev = (2 * (k + base) / x) * cur - nxt
        nxt, cur = cur, prev
        big = np.abs(cur) > _RESCALE_AT
        if big.any():
            scale = np.where(big, 1 / _RESCALE_AT, 1.0)
            cur *= scale
            nxt *= scale
            norm_sum *= scale
            for key in stored:
                stored[key] *= scale

    if twice_base == 0:
        factor = 1 / norm_sum
    else:
        exact0, exact1 = _half_integer_seeds(x)
        got0, got1 = stored[-1], stored[-2]
        use0 = np.abs(exact0) >= np.abs(exact1)
        factor = np.where(use0, exact0 / np.where(use0, got0, 1.0), exact1 / np.where(use0, 1.0, got1))
    return np.stack([stored[int(k)] * factor for k in offsets])


def _upward(order: BesselOrder, x: np.ndarray) -> np.ndarray:
    """x ≥ ν 时的向上递推"""
    if order.is_half_integer:
        prev, cur = _half_integer_seeds(x)
        mu = 1.5
    else:
        prev, cur = _miller(0, np.array([0, 1]), x)
        mu = 1.0
    steps = int(round(order.nu - (mu - 1)))
    if steps == 0:
        return prev
    for _ in range(steps - 1):
        prev, cur = cur, (2 * mu / x) * cur - prev
        mu += 1
    return cur


def _hankel(nu: float, x: np.ndarray) -> np.ndarray:
    """大宗量 Hankel 渐近展开"""
    mu4 = 4 * nu * nu
    p = np.ones_like(x)
    q = np.zeros_like(x)
    term = np.ones_like(x)
    k = 0
    while k < 60:
        k += 1
        term = term * (mu4 - (2 * k - 1) ** 2) / (k * 8 * x)
        if k % 2 == 1:
            q += term if (k // 2) % 2 == 0 else -term
        else:
            p += -term if (k // 2) % 2 == 1 else term
        if np.all(np.abs(term) < 1e-17):
            break
    chi = x - (nu / 2 + 0.25) * np.pi
    return np.sqrt(2 / (np.pi * x)) * (p * np.cos(chi) - q * np.sin(chi))


# ==================== 对外接口 ====================

def _as_order(order: Union[BesselOrder, float]) -> BesselOrder:
    return order if isinstance(order, BesselOrder) else BesselOrder.of(order)


def bessel_j_flagged(order: Union[BesselOrder, float], x: ArrayLike) -> tuple[np.ndarray, np.ndarray]:
    """
    计算 J_ν(x)，同时返回下溢标记

    Returns:
        (values, flushed): |J| < 1e-290 的值被置零，对应位置 flushed=True
    """
    order = _as_order(order)
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError(f"bessel_j 要求 x ≥ 0，收到 min(x)={np.nanmin(arr) if arr.size else x}")
    nu = order.nu
    out = np.zeros_like(arr)

    zero = arr == 0
    out[zero] = 1.0 if order.twice_order == 0 else 0.0

    series = ~zero & ((arr <= SERIES_LIMIT) | (arr * arr <= nu + 1))
    hankel = ~zero & ~series & (arr > HANKEL_FACTOR * (1 + nu))
    miller = ~zero & ~series & ~hankel & (nu > arr)
    upward = ~zero & ~series & ~hankel & ~miller

    if series.any():
        out[series] = _series(nu, arr[series])
    if miller.any():
        k = int(round(nu - order.twice_order % 2 / 2))
        out[miller] = _miller(order.twice_order % 2, np.array([k]), arr[miller])[0]
    if upward.any():
        out[upward] = _upward(order, arr[upward])
    if hankel.any():
        out[hankel] = _hankel(nu, arr[hankel])

    flushed = ~zero & (np.abs(out) < UNDERFLOW)
    out[flushed] = 0.0
    if flushed.any():
        logger.debug(f"J_{nu} 下溢置零 {int(flushed.sum())} 个点")
    return out.reshape(np.shape(x)), flushed.reshape(np.shape(x))


def bessel_j(order: Union[BesselOrder, float], x: ArrayLike) -> ArrayLike:
    """第一类 Bessel 函数 J_ν(x)，x 可为标量或数组"""
    values, _ = bessel_j_flagged(order, x)
    return float(values) if np.ndim(values) == 0 else values


def bessel_j_table(twice_base: int, count: int, x: np.ndarray) -> np.ndarray:
    """
    一次性计算 J_{base/2 + k}(x)，k = 0..count-1

    供 Λ_ℓ 批量积分使用；x ≤ 12 走幂级数，其余走 Miller 递推（对所有阶都稳定）

    Returns:
        形状 (count, len(x)) 的数组
    """
    if twice_base not in (0, 1):
        raise DomainError(f"twice_base 只能是 0 或 1，收到 {twice_base}")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("bessel_j_table 要求 x ≥ 0")
    table = np.zeros((count, x.size))
    base = twice_base / 2

    small = (x <= SERIES_LIMIT) & (x > 0)
    if small.any():
        xs = x[small]
        for k in range(count):
            table[k, small] = _series(base + k, xs)
    large = x > SERIES_LIMIT
    if large.any():
        table[:, large] = _miller(twice_base, np.arange(count), x[large])
    if (x == 0).any() and twice_base == 0:
        table[0, x == 0] = 1.0

    table[np.abs(table) < UNDERFLOW] = 0.0
    return table


def spherical_j(ell: int, x: ArrayLike) -> ArrayLike:
    """球 Bessel 函数 j_ℓ(x) = sqrt(π/(2x)) J_{ℓ+1/2}(x)，x=0 取可去极限"""
    if ell < 0:
        raise DomainError(f"ℓ 必须非负，收到 {ell}")
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros_like(arr)
    zero = arr == 0
    out[zero] = 1.0 if ell == 0 else 0.0
    if (~zero).any():
        xs = arr[~zero]
        out[~zero] = np.sqrt(np.pi / (2 * xs)) * bessel_j(BesselOrder(2 * ell + 1), xs)
    out = out.reshape(np.shape(x))
    return float(out) if np.ndim(out) == 0 else out


def gamma_half_integer(twice_arg: int) -> float:
    """Γ(k/2)：由 Γ(1)=1、Γ(1/2)=√π 与 Γ(z+1)=zΓ(z) 递推"""
    if twice_arg < 1:
        raise DomainError(f"gamma_half_integer 要求 twice_arg ≥ 1，收到 {twice_arg}")
    if twice_arg % 2 == 0:
        z, value = 1.0, 1.0
    else:
        z, value = 0.5, math.sqrt(math.pi)
    while 2 * z < twice_arg:
        value *= z
        z += 1
    return value
