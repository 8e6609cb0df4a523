"""
远场算子谱 - [0,1]^n 上 F_κ*F_κ 的 Nyström 离散、特征值求解与 F_κ / F̃_κ 的近似奇异值

核函数 G(d) = (2π)^n κ^{n-1} (κd)^{2-n} J_{n/2-1}(κd)²，Gram 矩阵元 G(|x_i - x_j|)·|Ω_ij|
"""
import logging
import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from deps import parallel_map
from errors import ComputeError, DomainError, UsageError
from linalg import eigh_dense, lanczos_topk
from quadrature import GridSpec
from special_functions import BesselOrder, bessel_j, gamma_half_integer, spherical_j
from spectrum import OperatorTag, SpectrumRecord

logger = logging.getLogger(__name__)

DEFAULT_MEMORY_CAP = 20_000
FULL_EIG_MAX = 5_000
NATIVE_EIG_MAX = 1_000
_BLOCK_ENTRIES = 2_000_000

Backend = Literal["auto", "native", "lapack"]


def kernel_at_zero(dim_n: int, kappa: float) -> float:
    """d → 0 的可去极限 (2π)^n κ^{n-1} 2^{2-n} / Γ(n/2)²"""
    g = gamma_half_integer(dim_n)
    return (2 * math.pi) ** dim_n * kappa ** (dim_n - 1) * 2.0 ** (2 - dim_n) / (g * g)


def farfield_kernel(dim_n: int, kappa: float, dist):
    """G(dist)，dist 可为标量或数组"""
    if dim_n not in (2, 3):
        raise DomainError(f"维数 n 只支持 2 或 3，收到 {dim_n}")
    d = np.asarray(dist, dtype=float)
    if np.any(d < 0):
        raise DomainError("距离必须非负")
    z = kappa * d
    scale = (2 * math.pi) ** dim_n * kappa ** (dim_n - 1)
    if dim_n == 2:
        out = scale * bessel_j(BesselOrder(0), z) ** 2
    else:
        # z^{-1} J_{1/2}(z)² = (2/π) j_0(z)²
        out = scale * (2 / math.pi) * spherical_j(0, z) ** 2
    out = np.where(d == 0, kernel_at_zero(dim_n, kappa), out)
    return float(out) if out.ndim == 0 else out


@dataclass(eq=False)
class SymmetricMatrixBuffer:
    """稠密实对称矩阵（行优先 N×N）"""
    size: int
    data: np.ndarray

    def __post_init__(self):
        if self.data.shape != (self.size, self.size):
            raise DomainError(f"矩阵形状 {self.data.shape} 与 size={self.size} 不符")


def assemble_gram(dim_n: int, kappa: float, grid: GridSpec, memory_cap: int = DEFAULT_MEMORY_CAP,
                  threads: int = 1) -> SymmetricMatrixBuffer:
    """
    组装 (F_κ*F_κ)^approx

    中点网格上 x_i - x_j 只取决于整数偏移，先对所有 |偏移| 建核函数表再查表，
    (i,j) 与 (j,i) 查到同一个表项，矩阵逐位对称
    """
    if grid.dim != dim_n:
        raise UsageError(f"grid.dim={grid.dim} 与 n={dim_n} 不一致")
    n_rows = grid.size
    if n_rows > memory_cap:
        raise ComputeError(f"Gram 矩阵 {n_rows} 行超过内存上限 {memory_cap}")

    m = grid.m
    offsets = np.indices((m,) * dim_n).reshape(dim_n, -1).T
    dist = grid.cell_width * np.sqrt(np.sum(offsets.astype(float) ** 2, axis=1))
    table = (farfield_kernel(dim_n, kappa, dist) * grid.cell_volume).reshape((m,) * dim_n)

    coords = grid.integer_coords()
    data = np.empty((n_rows, n_rows))
    block = max(1, _BLOCK_ENTRIES // max(n_rows, 1))
    starts = list(range(0, n_rows, block))

    def fill(s: int):
        e = min(s + block, n_rows)
        diff = np.abs(coords[s:e, None, :] - coords[None, :, :])
        data[s:e] = table[tuple(diff[..., a] for a in range(dim_n))]

    parallel_map(fill, starts, threads)
    logger.info(f"Gram 组装完成: n={dim_n}, κ={kappa}, m={m}, {n_rows}×{n_rows}")
    return SymmetricMatrixBuffer(n_rows, data)


@dataclass(frozen=True)
class EigenMode:
    """full: 全部特征值；top_k: Lanczos 求最大的 k 个"""
    kind: Literal["full", "top_k"] = "full"
    k: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("full", "top_k"):
            raise UsageError(f"未知特征值模式 {self.kind}")
        if self.kind == "top_k" and (self.k is None or self.k < 1):
            raise UsageError(f"top_k 模式需要正整数 k，收到 {self.k}")

    @classmethod
    def parse(cls, text: str) -> "EigenMode":
        """'full' 或 'top_k:64'"""
        if text == "full":
            return cls()
        if text.startswith("top_k"):
            _, _, k = text.partition(":")
            try:
                return cls("top_k", int(k))
            except ValueError:
                raise UsageError(f"mode: 无法解析 {text!r}，应为 top_k:<整数>")
        raise UsageError(f"mode: 无法解析 {text!r}，应为 full 或 top_k:<k>")

    def __str__(self) -> str:
        return "full" if self.kind == "full" else f"top_k:{self.k}"


def symmetric_eigenvalues(matrix: SymmetricMatrixBuffer, mode: EigenMode = EigenMode(),
                          backend: Backend = "auto", native_max: int = NATIVE_EIG_MAX,
                          full_max: int = FULL_EIG_MAX, tol: float = 1e-8,
                          max_restarts: int = 300, seed: int = 0) -> np.ndarray:
    """
    对称矩阵特征值，降序

    full 模式: native = Householder + QL；lapack = numpy.linalg.eigvalsh；
    auto 在 N ≤ native_max 时用 native，否则用 lapack
    """
    n_rows = matrix.size
    if mode.kind == "full":
        if n_rows > full_max:
            raise ComputeError(f"full 模式要求 N ≤ {full_max}，当前 N={n_rows}，请改用 top_k")
        use_native = backend == "native" or (backend == "auto" and n_rows <= native_max)
        if use_native:
            values, _ = eigh_dense(matrix.data)
        else:
            values = np.linalg.eigvalsh(matrix.data)
        return values[::-1].copy()
    if mode.k > n_rows:
        raise UsageError(f"top_k={mode.k} 超过矩阵阶数 {n_rows}")
    values, _ = lanczos_topk(matrix.data, mode.k, tol=tol, max_restarts=max_restarts, seed=seed)
    return values


def farfield_singular_values(dim_n: int, kappa: float, grid: GridSpec, normalized: bool = False,
                             mode: EigenMode = EigenMode(), memory_cap: int = DEFAULT_MEMORY_CAP,
                             threads: int = 1, **eig_options) -> SpectrumRecord:
    """
    σ̂_j = sqrt|λ_j|；normalized=True 时整体乘 κ^{-(n-1)/2}，得到 F̃_κ 的谱
    """
    gram = assemble_gram(dim_n, kappa, grid, memory_cap, threads)
    values = symmetric_eigenvalues(gram, mode, **eig_options)
    sigmas = np.sqrt(np.abs(values))
    sigmas = sigmas[sigmas > 0]
    tag = OperatorTag.FARFIELD_F
    factor = 1.0
    if normalized:
        factor = kappa ** (-(dim_n - 1) / 2)
        sigmas = sigmas * factor
        tag = OperatorTag.FARFIELD_FTILDE
    record = SpectrumRecord.from_sigmas(
        dim_n, kappa, tag, sigmas,
        method_meta={
            "method": "nystrom_midpoint",
            "grid_m": grid.m,
            "domain": "[0,1]^n" if grid.domain == "cube" else "B_1",
            "rows": gram.size,
            "mode": str(mode),
            "backend": eig_options.get("backend", "auto"),
            "normalized": normalized,
            "scale_factor": factor,
            "min_eigenvalue": float(values.min()),
            "max_eigenvalue": float(values.max()),
        },
    )
    logger.info(f"远场谱: n={dim_n}, κ={kappa}, m={grid.m}, {len(record)} 个奇异值, mode={mode}")
    return record
