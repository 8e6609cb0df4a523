"""
求积模块 - Gauss-Legendre、复合 GL、圆周/球面乘积规则、球体规则、[0,1]^n 中点网格

所有规则都是确定性的：相同参数两次构造得到逐位相同的节点与权重
"""
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Literal

import numpy as np

from errors import DomainError

logger = logging.getLogger(__name__)

DEFAULT_PANEL_LEN = 1.0
DEFAULT_GL_POINTS = 16
MAX_GL_POINTS = 256


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """求积规则：nodes 形状 (N,) 或 (N, d)，weights 形状 (N,)"""
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if len(self.nodes) != len(self.weights):
            raise DomainError(f"节点数 {len(self.nodes)} 与权重数 {len(self.weights)} 不一致")
        if np.any(self.weights <= 0):
            raise DomainError("求积权重必须全部为正")

    @property
    def size(self) -> int:
        return len(self.weights)

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """f 作用于全部节点，对最后一维加权求和（支持批量被积函数）"""
        values = np.asarray(f(self.nodes), dtype=float)
        return np.sum(values * self.weights, axis=-1)


@dataclass(frozen=True)
class GridSpec:
    """
    均匀中点网格

    cube: [0,1]^dim 分成 m^dim 个单元（缺省区域）
    ball: [-1,1]^dim 分成 m^dim 个单元，只保留中点落在单位球内的单元
    """
    dim: int
    m: int
    domain: Literal["cube", "ball"] = "cube"
    _coords: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise DomainError(f"网格维数只支持 2 或 3，收到 {self.dim}")
        if self.m < 1:
            raise DomainError(f"每轴点数 m 必须为正，收到 {self.m}")
        if self.domain not in ("cube", "ball"):
            raise DomainError(f"未知区域 {self.domain}")
        idx = np.indices((self.m,) * self.dim).reshape(self.dim, -1).T
        if self.domain == "ball":
            mid = -1 + (idx + 0.5) * self.cell_width
            idx = idx[np.sum(mid * mid, axis=1) < 1.0]
        object.__setattr__(self, "_coords", idx)

    @property
    def cell_width(self) -> float:
        return (1.0 if self.domain == "cube" else 2.0) / self.m

    @property
    def cell_volume(self) -> float:
        return self.cell_width ** self.dim

    @property
    def size(self) -> int:
        return len(self._coords)

    def integer_coords(self) -> np.ndarray:
        """单元的整数下标，形状 (size, dim)，按行优先排列"""
        return self._coords

    def midpoints(self) -> np.ndarray:
        origin = 0.0 if self.domain == "cube" else -1.0
        return origin + (self._coords + 0.5) * self.cell_width


# ==================== 一维规则 ====================

@lru_cache(maxsize=None)
def _legendre_roots(k: int) -> tuple[np.ndarray, np.ndarray]:
    """Newton 迭代求 P_k 的根与权重"""
    i = np.arange(1, k + 1)
    x = np.cos(np.pi * (i - 0.25) / (k + 0.5))
    for _ in range(100):
        p0, p1 = np.ones_like(x), x.copy()
        for j in range(2, k + 1):
            p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
        dp = k * (x * p1 - p0) / (x * x - 1)
        dx = p1 / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-16:
            break
    p0, p1 = np.ones_like(x), x.copy()
    for j in range(2, k + 1):
        p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
    dp = k * (x * p1 - p0) / (x * x - 1)
    w = 2 / ((1 - x * x) * dp * dp)
    nodes, weights = x[::-1].copy(), w[::-1].copy()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_legendre(k: int) -> QuadratureRule:
    """[-1,1] 上 k 点 Gauss-Legendre 规则，对 2k-1 次多项式精确"""
    if not 1 <= k <= MAX_GL_POINTS:
        raise DomainError(f"Gauss-Legendre 点数需在 1..{MAX_GL_POINTS}，收到 {k}")
    nodes, weights = _legendre_roots(k)
    return QuadratureRule(nodes, weights)


def composite_rule(a: float, b: float, panel_len: float = DEFAULT_PANEL_LEN,
                   k: int = DEFAULT_GL_POINTS) -> QuadratureRule:
    """[a,b] 上 ⌈(b-a)/panel_len⌉ 个等长小区间的复合 GL 规则，节点升序"""
    if b < a:
        raise DomainError(f"积分区间要求 a ≤ b，收到 [{a}, {b}]")
    if panel_len <= 0:
        raise DomainError(f"panel_len 必须为正，收到 {panel_len}")
    panels = max(1, math.ceil((b - a) / panel_len))
    ref = gauss_legendre(k)
    edges = a + (b - a) * np.arange(panels + 1) / panels
    half = (edges[1:] - edges[:-1]) / 2
    mid = (edges[1:] + edges[:-1]) / 2
    nodes = (mid[:, None] + half[:, None] * ref.nodes[None, :]).ravel()
    weights = (half[:, None] * ref.weights[None, :]).ravel()
    return QuadratureRule(nodes, weights)


def integrate_interval(f: Callable[[np.ndarray], np.ndarray], a: float, b: float,
                       panel_len: float = DEFAULT_PANEL_LEN, k: int = DEFAULT_GL_POINTS) -> np.ndarray:
    """
    复合 Gauss-Legendre 积分 ∫_a^b f(r) dr

    f 接收节点数组，可返回 (..., N) 形状以一次积分多个被积函数
    """
    if a == b:
        shape = np.shape(f(np.array([a])))[:-1]
        return np.zeros(shape) if shape else 0.0
    result = composite_rule(a, b, panel_len, k).integrate(f)
    return float(result) if np.ndim(result) == 0 else result


# ==================== 球面与球体规则 ====================

def sphere_surface(dim_sphere: int) -> float:
    """S^1 周长 2π，S^2 面积 4π"""
    return {1: 2 * np.pi, 2: 4 * np.pi}[dim_sphere]


def sphere_rule(dim_sphere: int, resolution: int) -> QuadratureRule:
    """
    单位球面规则

    S^1: resolution 个等分角，等权 2π/resolution
    S^2: cos(极角) 上 resolution 点 GL × 方位角 2·resolution 个等分点
    """
    if resolution < 4:
        raise DomainError(f"球面分辨率至少为 4，收到 {resolution}")
    if dim_sphere == 1:
        phi = 2 * np.pi * np.arange(resolution) / resolution
        nodes = np.stack([np.cos(phi), np.sin(phi)], axis=1)
        weights = np.full(resolution, sphere_surface(1) / resolution)
        return QuadratureRule(nodes, weights)
    if dim_sphere == 2:
        gl = gauss_legendre(resolution)
        n_phi = 2 * resolution
        phi = 2 * np.pi * np.arange(n_phi) / n_phi
        t = np.repeat(gl.nodes, n_phi)
        p = np.tile(phi, resolution)
        s = np.sqrt(1 - t * t)
        nodes = np.stack([s * np.cos(p), s * np.sin(p), t], axis=1)
        weights = np.repeat(gl.weights, n_phi) * (2 * np.pi / n_phi)
        return QuadratureRule(nodes, weights)
    raise DomainError(f"球面维数只支持 1 或 2，收到 {dim_sphere}")


def radial_rule(radius: float, radial_panels: int, k: int = DEFAULT_GL_POINTS,
                radial_map: Literal["linear", "sine"] = "linear") -> QuadratureRule:
    """
    [0, radius] 上的径向规则（不含 r^{dim-1} 因子）

    sine: r = radius·sin θ，θ ∈ [0, π/2]，权重带 radius·cos θ，
    吸收端点处 (radius² - r²)^{±1/2} 型奇性
    """
    if radial_panels < 4:
        raise DomainError(f"radial_panels 至少为 4，收到 {radial_panels}")
    if radius <= 0:
        raise DomainError(f"半径必须为正，收到 {radius}")
    if radial_map == "linear":
        return composite_rule(0.0, radius, radius / radial_panels, k)
    if radial_map == "sine":
        theta = composite_rule(0.0, np.pi / 2, (np.pi / 2) / radial_panels, k)
        return QuadratureRule(radius * np.sin(theta.nodes), theta.weights * radius * np.cos(theta.nodes))
    raise DomainError(f"未知径向映射 {radial_map}")


def ball_rule(dim: int, radius: float, radial_panels: int, k: int, angular_resolution: int,
              radial_map: Literal["linear", "sine"] = "linear") -> QuadratureRule:
    """半径 radius 的 dim 维球体上的极坐标乘积规则，Jacobian r^{dim-1} 计入权重"""
    if dim not in (2, 3):
        raise DomainError(f"球体维数只支持 2 或 3，收到 {dim}")
    radial = radial_rule(radius, radial_panels, k, radial_map)
    angular = sphere_rule(dim - 1, angular_resolution)
    r = radial.nodes
    nodes = (r[:, None, None] * angular.nodes[None, :, :]).reshape(-1, dim)
    weights = ((radial.weights * r ** (dim - 1))[:, None] * angular.weights[None, :]).ravel()
    return QuadratureRule(nodes, weights)
