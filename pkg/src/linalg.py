"""
稠密线性代数内核 - LU 行列式、Householder 三对角化、隐式位移 QL、全重正交化 Lanczos

都是单线程内核，调用方在独立矩阵之间并行
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from errors import ConvergenceError, DomainError

logger = logging.getLogger(__name__)

LU_MAX_SIZE = 64
QL_ITER_FACTOR = 30


@dataclass(frozen=True, eq=False)
class DenseMatrix:
    """行优先稠密矩阵"""
    rows: int
    cols: int
    data: np.ndarray

    def __post_init__(self):
        if self.rows * self.cols != self.data.size:
            raise DomainError(f"rows·cols={self.rows * self.cols} 与数据长度 {self.data.size} 不一致")

    @classmethod
    def from_array(cls, a: np.ndarray) -> "DenseMatrix":
        a = np.asarray(a, dtype=float)
        return cls(a.shape[0], a.shape[1], a.ravel().copy())

    def as_array(self) -> np.ndarray:
        return self.data.reshape(self.rows, self.cols)


MatrixLike = Union[np.ndarray, DenseMatrix]


def _as_array(a: MatrixLike) -> np.ndarray:
    if isinstance(a, DenseMatrix):
        return a.as_array()
    return np.asarray(a, dtype=float)


def _require_square(a: np.ndarray, name: str):
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"{name} 需要方阵，收到形状 {a.shape}")


# ==================== LU 行列式 ====================

def lu_determinant(m: MatrixLike) -> float:
    """部分主元 LU 分解求行列式，行交换记录符号；奇异矩阵返回 0"""
    a = np.array(_as_array(m), dtype=float, copy=True)
    _require_square(a, "lu_determinant")
    n = a.shape[0]
    if n > LU_MAX_SIZE:
        raise DomainError(f"lu_determinant 只支持 ≤{LU_MAX_SIZE} 阶，收到 {n}")
    det = 1.0
    for k in range(n):
        piv = k + int(np.argmax(np.abs(a[k:, k])))
        if a[piv, k] == 0.0:
            return 0.0
        if piv != k:
            a[[k, piv]] = a[[piv, k]]
            det = -det
        det *= a[k, k]
        if k + 1 < n:
            factors = a[k + 1:, k] / a[k, k]
            a[k + 1:, k + 1:] -= np.outer(factors, a[k, k + 1:])
    return float(det)


# ==================== Householder + QL ====================

def tridiagonalize(a: MatrixLike, want_q: bool = False) -> tuple[np.ndarray, np.ndarray, Optional[np.ndarray]]:
    """
    Householder 相似变换化为三对角形 T = Qᵀ A Q

    Returns:
        (d, e, Q): d 主对角线，e 次对角线（长度 n-1），want_q=False 时 Q 为 None
    """
    A = np.array(_as_array(a), dtype=float, copy=True)
    _require_square(A, "tridiagonalize")
    n = A.shape[0]
    Q = np.eye(n) if want_q else None
    for k in range(n - 2):
        x = A[k + 1:, k]
        if not np.any(x[1:]):
            continue
        sigma = float(np.linalg.norm(x))
        alpha = -math.copysign(sigma, x[0])
        v = x.copy()
        v[0] -= alpha
        v /= np.linalg.norm(v)
        sub = A[k + 1:, k + 1:]
        p = sub @ v
        w = p - (v @ p) * v
        sub -= 2.0 * (np.outer(v, w) + np.outer(w, v))
        A[k + 1:, k] = 0.0
        A[k, k + 1:] = 0.0
        A[k + 1, k] = A[k, k + 1] = alpha
        if Q is not None:
            Q[:, k + 1:] -= 2.0 * np.outer(Q[:, k + 1:] @ v, v)
    return np.diag(A).copy(), np.diag(A, -1).copy(), Q


def ql_eigen(d: np.ndarray, e: np.ndarray, z: Optional[np.ndarray] = None,
             iter_factor: int = QL_ITER_FACTOR) -> tuple[np.ndarray, Optional[np.ndarray]]:
    """
    对称三对角矩阵的隐式位移 QL（Wilkinson 型位移）

    Args:
        d: 主对角线
        e: 次对角线，e[i] 连接 i 与 i+1
        z: 若给出，旋转累积到其列上（传入 Householder 的 Q 即得 A 的特征向量）

    Returns:
        (升序特征值, 对应列排列后的 z)
    """
    n = len(d)
    dl = [float(v) for v in d]
    el = [float(v) for v in e] + [0.0]
    if z is not None:
        z = np.array(z, dtype=float, copy=True)
    eps = np.finfo(float).eps
    cap = iter_factor * max(n, 1)
    total = 0
    for l in range(n):
        while True:
            m = l
            while m < n - 1:
                dd = abs(dl[m]) + abs(dl[m + 1])
                if abs(el[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            total += 1
            if total > cap:
                raise ConvergenceError(f"QL 迭代超过上限 {cap}（n={n}）", partial=np.array(dl[:l]))
            g = (dl[l + 1] - dl[l]) / (2.0 * el[l])
            r = math.hypot(g, 1.0)
            g = dl[m] - dl[l] + el[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            split = False
            while i >= l:
                f = s * el[i]
                b = c * el[i]
                r = math.hypot(f, g)
                el[i + 1] = r
                if r == 0.0:
                    dl[i + 1] -= p
                    el[m] = 0.0
                    split = True
                    break
                s = f / r
                c = g / r
                g = dl[i + 1] - p
                r = (dl[i] - g) * s + 2.0 * c * b
                p = s * r
                dl[i + 1] = g + p
                g = c * r - b
                if z is not None:
                    col = z[:, i + 1].copy()
                    z[:, i + 1] = s * z[:, i] + c * col
                    z[:, i] = c * z[:, i] - s * col
                i -= 1
            if split:
                continue
            dl[l] -= p
            el[l] = g
            el[m] = 0.0
    values = np.array(dl)
    order = np.argsort(values, kind="stable")
    logger.debug(f"QL 完成: n={n}, 迭代 {total} 次")
    return values[order], (z[:, order] if z is not None else None)


def eigh_dense(a: MatrixLike, want_vectors: bool = False) -> tuple[np.ndarray, Optional[np.ndarray]]:
    """Householder 三对角化 + QL，返回升序特征值（及特征向量列）"""
    d, e, q = tridiagonalize(a, want_q=want_vectors)
    return ql_eigen(d, e, q)


# ==================== Lanczos ====================

MAX_DEFLATION_PASSES = 16


def _orthogonalize(w: np.ndarray, basis: np.ndarray) -> np.ndarray:
    for _ in range(2):
        w = w - basis @ (basis.T @ w)
    return w


def _thick_restart(A: np.ndarray, k: int, p: int, tol: float, max_restarts: int,
                   rng: np.random.Generator, locked: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """一轮厚重启 Lanczos，Krylov 基始终与 locked 的列正交"""
    n = A.shape[0]
    V = np.zeros((n, p + 1))
    H = np.zeros((p, p))
    v0 = _orthogonalize(rng.standard_normal(n), locked)
    V[:, 0] = v0 / np.linalg.norm(v0)
    start = 0
    theta = np.zeros(p)
    converged = np.zeros(k, dtype=bool)
    for restart in range(max_restarts + 1):
        beta = 0.0
        for j in range(start, p):
            w = _orthogonalize(A @ V[:, j], locked)
            basis = V[:, :j + 1]
            h = basis.T @ w
            w -= basis @ h
            h2 = basis.T @ w
            w -= basis @ h2
            h += h2
            H[:j + 1, j] = h
            H[j, :j + 1] = h
            beta = float(np.linalg.norm(w))
            if beta <= 1e-14 * max(1.0, abs(h[j])):
                # 不变子空间：换一个与当前基正交的随机方向继续
                w = _orthogonalize(_orthogonalize(rng.standard_normal(n), locked), basis)
                V[:, j + 1] = w / np.linalg.norm(w)
                beta = 0.0
            else:
                V[:, j + 1] = w / beta
            if j + 1 < p:
                H[j + 1, j] = H[j, j + 1] = beta

        theta, S = eigh_dense(H, want_vectors=True)
        theta, S = theta[::-1], S[:, ::-1]
        residual = np.abs(beta * S[p - 1, :])
        floor = 1e-12 * abs(theta[0])
        converged = (residual[:k] <= tol * np.abs(theta[:k])) | (residual[:k] <= floor)
        if converged.all():
            logger.debug(f"Lanczos 收敛: n={n}, k={k}, 锁定 {locked.shape[1]} 个, 重启 {restart} 次")
            return theta[:k].copy(), V[:, :p] @ S[:, :k]

        keep = min(k + (p - k) // 2, p - 1)
        residual_vec = V[:, p].copy()
        V[:, :keep] = V[:, :p] @ S[:, :keep]
        V[:, keep] = residual_vec
        V[:, keep + 1:] = 0.0
        H[:] = 0.0
        H[np.arange(keep), np.arange(keep)] = theta[:keep]
        H[:keep, keep] = H[keep, :keep] = beta * S[p - 1, :keep]
        start = keep

    raise ConvergenceError(
        f"Lanczos 在 {max_restarts} 次重启后仍有 {int((~converged).sum())} 个值未收敛",
        partial={"values": theta[:k].copy(), "converged": converged},
    )


def lanczos_topk(a: MatrixLike, k: int, tol: float = 1e-8, max_restarts: int = 300,
                 krylov_dim: Optional[int] = None, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """
    全重正交化、厚重启 Lanczos，求最大的 k 个特征值

    单个起始向量的 Krylov 空间只含重特征值的一个方向，所以收敛后把已得 Ritz 向量锁定，
    在其正交补上再跑一轮；新一轮的最大值不超过当前第 k 个时停止

    收敛判据: 残差 |β·s_last| ≤ tol·|θ_i|，或低于舍入水平 1e-12·|θ_1|

    Returns:
        (降序 Ritz 值, 对应 Ritz 向量列)

    Raises:
        ConvergenceError: 重启次数用尽，partial 中给出当前 Ritz 值与收敛标记
    """
    A = _as_array(a)
    _require_square(A, "lanczos_topk")
    n = A.shape[0]
    if not 1 <= k <= n:
        raise DomainError(f"top_k 需满足 1 ≤ k ≤ N={n}，收到 {k}")
    p = min(n - 1, krylov_dim or max(2 * k + 20, 40))

    def dense() -> tuple[np.ndarray, np.ndarray]:
        w, vecs = eigh_dense(A, want_vectors=True)
        return w[::-1][:k].copy(), vecs[:, ::-1][:, :k].copy()

    if k >= p:
        return dense()

    rng = np.random.default_rng(seed)
    values, vectors = _thick_restart(A, k, p, tol, max_restarts, rng, np.zeros((n, 0)))
    for _ in range(MAX_DEFLATION_PASSES):
        if n - vectors.shape[1] <= p:
            return dense()
        extra, extra_vecs = _thick_restart(A, k, p, tol, max_restarts, rng, vectors)
        if extra[0] <= values[-1] + tol * abs(values[0]):
            break
        merged = np.concatenate([values, extra])
        order = np.argsort(-merged, kind="stable")[:k]
        values = merged[order]
        vectors = np.hstack([vectors, extra_vecs])[:, order]
        logger.debug(f"Lanczos 锁定后找到新的特征值 {extra[0]:.6g}")
    return values, vectors
