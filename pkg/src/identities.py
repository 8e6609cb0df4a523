"""
恒等式校验 - 余面积公式、HS 范数公式、行列式恒等式、Λ_ℓ → 1/π 极限、两种 σ 公式的交叉校验

球面双重积分按真实的 S×S 求积做：外层是 sphere_rule，内层规则的极轴对齐到外层节点，
这样 √(1-(ẑ·x̂)²) 这类在 ẑ = ±x̂ 处不光滑的权重只出现在内层规则的端点上
"""
import logging
import math
from enum import Enum
from typing import Callable, Iterator, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from errors import DomainError
from herglotz import spherical_bessel_sigma, c_n, lambda_ell, lambda_ell_closed_form, lambda_table
from linalg import lu_determinant
from quadrature import DEFAULT_GL_POINTS, ball_rule, composite_rule, sphere_rule
from special_functions import gamma_half_integer

logger = logging.getLogger(__name__)

RadialProfile = Callable[[np.ndarray], np.ndarray]

DEFAULT_RESOLUTION = 24
DEFAULT_RADIAL_PANELS = 8
CROSS_CHECK_FLOOR = 1e-12


class IdentityName(str, Enum):
    COAREA1 = "coarea1"
    COAREA2 = "coarea2"
    HS_NORM = "hs_norm"
    DETERMINANT = "determinant"
    AH_LIMIT = "ah_limit"
    CROSS_CHECK = "cross_check"


class IdentityReport(BaseModel):
    identity_name: IdentityName
    lhs: float
    rhs: float
    rel_diff: float = Field(ge=0)
    parameters: dict = Field(default_factory=dict)
    passed: Optional[bool] = None

    @classmethod
    def build(cls, name: IdentityName, lhs: float, rhs: float, **parameters) -> "IdentityReport":
        diff = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)
        return cls(identity_name=name, lhs=float(lhs), rhs=float(rhs), rel_diff=diff, parameters=parameters)

    def judged(self, threshold: float) -> "IdentityReport":
        return self.model_copy(update={"passed": bool(self.rel_diff <= threshold)})

    def as_record(self) -> dict:
        """JSON lines 输出的一行"""
        return {
            "identity": self.identity_name.value,
            "params": self.parameters,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "rel_diff": self.rel_diff,
            "pass": self.passed,
        }


# 测试用径向剖面
PROFILES: dict[str, RadialProfile] = {
    "const": lambda r: np.ones_like(r),
    "gauss": lambda r: np.exp(-r * r),
    "quadratic": lambda r: 4 - r * r,
    "cos": np.cos,
}

HS_PROFILES: dict[str, RadialProfile] = {
    "gauss": lambda r: np.exp(-r * r / 2),
    "zero": lambda r: np.zeros_like(r),
}


def coarea_constant(dim_n: int, which: int) -> float:
    """which=1: 2^{3-n} π^{(n-1)/2} / Γ((n-1)/2)；which=2: 2^{4-n} π^{(n-1)/2} / Γ((n-1)/2)"""
    base = math.pi ** ((dim_n - 1) / 2) / gamma_half_integer(dim_n - 1)
    return 2.0 ** ((3 if which == 1 else 4) - dim_n) * base


def _check_dim(dim_n: int):
    if dim_n not in (2, 3):
        raise DomainError(f"维数 n 只支持 2 或 3，收到 {dim_n}")


def _frames(poles: np.ndarray) -> np.ndarray:
    """每个极点 ẑ 的正交标架，最后一列为 ẑ 本身；形状 (N, dim, dim)"""
    n_pts, dim = poles.shape
    if dim == 2:
        perp = np.stack([-poles[:, 1], poles[:, 0]], axis=1)
        return np.stack([perp, poles], axis=2)
    helper = np.where(np.abs(poles[:, :1]) < 0.9, [[1.0, 0.0, 0.0]], [[0.0, 1.0, 0.0]])
    e1 = helper - np.sum(helper * poles, axis=1, keepdims=True) * poles
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(poles, e1)
    return np.stack([e1, e2, poles], axis=2)


def _aligned_rule(dim_n: int, resolution: int, gl_points: int) -> tuple[np.ndarray, np.ndarray]:
    """
    以北极为极轴的内层球面规则（局部坐标）

    S^1: 角度 φ 在 [0,π]、[π,2π] 两段上做 GL；S^2: 极角 θ 上做 GL（含 sin θ），方位角等分
    """
    if dim_n == 2:
        phi = composite_rule(0.0, 2 * math.pi, math.pi, max(gl_points, resolution))
        local = np.stack([np.sin(phi.nodes), np.cos(phi.nodes)], axis=1)
        return local, phi.weights
    theta = composite_rule(0.0, math.pi, math.pi / 2, max(gl_points, resolution))
    n_az = 2 * resolution
    az = 2 * math.pi * np.arange(n_az) / n_az
    t = np.repeat(theta.nodes, n_az)
    a = np.tile(az, theta.size)
    local = np.stack([np.sin(t) * np.cos(a), np.sin(t) * np.sin(a), np.cos(t)], axis=1)
    weights = np.repeat(theta.weights * np.sin(theta.nodes), n_az) * (2 * math.pi / n_az)
    return local, weights


def double_sphere_integral(dim_n: int, integrand: Callable[[np.ndarray, np.ndarray], np.ndarray],
                           resolution: int = DEFAULT_RESOLUTION, gl_points: int = DEFAULT_GL_POINTS,
                           rotation: Optional[np.ndarray] = None) -> float:
    """
    ∬_{S^{n-1}×S^{n-1}} integrand(|ẑ-x̂|, ẑ·x̂) dS(ẑ) dS(x̂)

    rotation 给出时，外层节点先整体旋转（被积函数只依赖 ẑ 与 x̂ 的相对位置，结果应不变）
    """
    _check_dim(dim_n)
    outer = sphere_rule(dim_n - 1, resolution)
    poles = outer.nodes if rotation is None else outer.nodes @ np.asarray(rotation, dtype=float).T
    frames = _frames(poles)
    local, inner_w = _aligned_rule(dim_n, resolution, gl_points)
    total = 0.0
    for z, frame, w in zip(poles, frames, outer.weights):
        x = local @ frame.T
        dot = np.clip(x @ z, -1.0, 1.0)
        dist = np.linalg.norm(x - z, axis=1)
        total += w * float(np.sum(inner_w * integrand(dist, dot)))
    return total


def _ball_radial_integral(dim_n: int, radius: float, f: RadialProfile, radial_panels: int,
                          gl_points: int, angular_resolution: int) -> float:
    """∫_{B_radius} f(|y|) dy，sine 径向映射吸收 radius 处的端点奇性"""
    rule = ball_rule(dim_n, radius, radial_panels, gl_points, angular_resolution, radial_map="sine")
    r = np.linalg.norm(rule.nodes, axis=1)
    return float(np.sum(rule.weights * f(r)))


def check_coarea(dim_n: int, which: int, h: RadialProfile, resolution: int = DEFAULT_RESOLUTION,
                 radial_panels: int = DEFAULT_RADIAL_PANELS, gl_points: int = DEFAULT_GL_POINTS,
                 rotation: Optional[np.ndarray] = None, profile_name: str = "custom") -> IdentityReport:
    """余面积公式：球面双重积分与 B_2 上带权积分"""
    _check_dim(dim_n)
    if which not in (1, 2):
        raise DomainError(f"which 只能为 1 或 2，收到 {which}")
    if which == 1:
        lhs = double_sphere_integral(dim_n, lambda d, t: h(d) * np.sqrt(np.clip(1 - t * t, 0.0, None)),
                                     resolution, gl_points, rotation)
        ball_weight = lambda r: (4 - r * r) ** ((dim_n - 2) / 2)
    else:
        lhs = double_sphere_integral(dim_n, lambda d, t: h(d), resolution, gl_points, rotation)
        ball_weight = lambda r: (4 - r * r) ** ((dim_n - 3) / 2) / r
    rhs = coarea_constant(dim_n, which) * _ball_radial_integral(
        dim_n, 2.0, lambda r: h(r) * ball_weight(r), radial_panels, gl_points, resolution)
    name = IdentityName.COAREA1 if which == 1 else IdentityName.COAREA2
    return IdentityReport.build(name, lhs, rhs, n=dim_n, h=profile_name, resolution=resolution)


def check_hs_norm(dim_n: int, kappa: float, h_hat: RadialProfile, resolution: int = DEFAULT_RESOLUTION,
                  radial_panels: int = DEFAULT_RADIAL_PANELS, gl_points: int = DEFAULT_GL_POINTS,
                  profile_name: str = "custom") -> IdentityReport:
    """‖F_κ(h)‖²_HS 的两种算法：核 κ^{(n-1)/2} ĥ(κ(ω-θ)) 的双重积分，与 B_{2κ} 上的径向公式"""
    _check_dim(dim_n)
    if not kappa > 0:
        raise DomainError(f"κ 必须为正，收到 {kappa}")
    lhs = kappa ** (dim_n - 1) * double_sphere_integral(
        dim_n, lambda d, t: np.abs(h_hat(kappa * d)) ** 2, resolution, gl_points)
    weight = lambda r: np.abs(h_hat(r)) ** 2 / r * (4 - (r / kappa) ** 2) ** ((dim_n - 3) / 2)
    rhs = coarea_constant(dim_n, 2) * _ball_radial_integral(
        dim_n, 2 * kappa, weight, radial_panels, gl_points, resolution)
    return IdentityReport.build(IdentityName.HS_NORM, lhs, rhs, n=dim_n, kappa=kappa,
                                h_hat=profile_name, resolution=resolution)


def check_determinant(u: Sequence[float], v: Sequence[float]) -> IdentityReport:
    """det(2I - u⊗u - v⊗v) 的 LU 值与闭式 2^{m-1}(2 - u·u - v·v + ½(u·u)(v·v) - ½(u·v)²)"""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 1:
        raise DomainError(f"u、v 需为同长度向量，收到 {u.shape} 与 {v.shape}")
    m = len(u)
    if not 1 <= m <= 12:
        raise DomainError(f"向量长度需在 1..12，收到 {m}")
    lhs = lu_determinant(2 * np.eye(m) - np.outer(u, u) - np.outer(v, v))
    uu, vv, uv = u @ u, v @ v, u @ v
    rhs = 2.0 ** (m - 1) * (2 - uu - vv + 0.5 * uu * vv - 0.5 * uv * uv)
    return IdentityReport.build(IdentityName.DETERMINANT, lhs, rhs, m=m)


def determinant_trials(trials: int, seed: int, max_m: int = 10) -> Iterator[IdentityReport]:
    """随机向量（分量均匀分布于 [-1,1]，长度 1..max_m）上的行列式恒等式"""
    rng = np.random.default_rng(seed)
    for i in range(trials):
        m = int(rng.integers(1, max_m + 1))
        u = rng.uniform(-1, 1, m)
        v = rng.uniform(-1, 1, m)
        report = check_determinant(u, v)
        report.parameters.update(trial=i, seed=seed)
        yield report


def check_ah_limit(dim_n: int, ell: int, kappas: Sequence[float], **quad) -> list[IdentityReport]:
    """
    (2π)^n Λ_ℓ(κ) 对比极限 2(2π)^{n-1}（即 Λ_ℓ → 1/π），每个 κ 一份报告

    parameters 中的 gap = |Λ_ℓ(κ) - 1/π|，gap_times_kappa 用于检查 O(1/κ) 速率
    """
    _check_dim(dim_n)
    kappas = [float(k) for k in kappas]
    if any(b <= a for a, b in zip(kappas, kappas[1:])):
        raise DomainError("kappa 序列必须严格递增")
    rhs = 2 * (2 * math.pi) ** (dim_n - 1)
    reports = []
    for kappa in kappas:
        lam = lambda_ell(dim_n, kappa, ell, **quad)
        gap = abs(lam - 1 / math.pi)
        reports.append(IdentityReport.build(
            IdentityName.AH_LIMIT, c_n(dim_n) * lam, rhs,
            n=dim_n, ell=ell, kappa=kappa, gap=gap, gap_times_kappa=gap * kappa))
    return reports


def cross_check(kappa: float, ellmax: int, threads: int = 1, **quad) -> list[IdentityReport]:
    """
    n=3 时 ((2π)³Λ_ℓ)^{1/2}（Bessel 表 + 复合 GL）与 4πκ(∫_0^1 r² j_ℓ(κr)² dr)^{1/2}（球 Bessel）逐 ℓ 对比

    parameters 另附 Lommel 闭式给出的 σ；σ 低于 1e-12 的项标记 below_floor
    """
    lam = lambda_table(3, kappa, ellmax, threads=threads, **quad)
    reports = []
    for ell in range(ellmax + 1):
        lhs = math.sqrt(c_n(3) * lam[ell])
        rhs = spherical_bessel_sigma(kappa, ell, **quad)
        closed = lambda_ell_closed_form(3, kappa, ell)
        report = IdentityReport.build(
            IdentityName.CROSS_CHECK, lhs, rhs, n=3, kappa=kappa, ell=ell,
            lommel_sigma=math.sqrt(c_n(3) * closed) if closed > 0 else 0.0,
            below_floor=bool(max(lhs, rhs) < CROSS_CHECK_FLOOR))
        reports.append(report)
    return reports


def random_rotation(dim_n: int, seed: int) -> np.ndarray:
    """QR 分解得到的随机正交矩阵（行列式 +1）"""
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((dim_n, dim_n)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q
