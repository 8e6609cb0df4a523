"""
奇异值谱记录 - 一个算子在一组 (n, κ) 下的降序奇异值序列
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from errors import DomainError


class OperatorTag(str, Enum):
    HERGLOTZ_A = "Herglotz_A"
    HERGLOTZ_Q = "Herglotz_Q"
    FARFIELD_F = "Farfield_F"
    FARFIELD_FTILDE = "Farfield_Ftilde"

    @property
    def is_herglotz(self) -> bool:
        return self in (OperatorTag.HERGLOTZ_A, OperatorTag.HERGLOTZ_Q)


@dataclass(eq=False)
class SpectrumRecord:
    """
    entries 列: rank (1..N)、sigma（非增）、degree_ell（Herglotz 的球谐次数，远场为空）
    """
    dim_n: int
    kappa: float
    operator_tag: OperatorTag
    entries: pd.DataFrame
    method_meta: dict = field(default_factory=dict)

    @classmethod
    def from_sigmas(cls, dim_n: int, kappa: float, operator_tag: OperatorTag,
                    sigmas: Sequence[float], degrees: Optional[Sequence[int]] = None,
                    method_meta: Optional[dict] = None) -> "SpectrumRecord":
        """排序（sigma 降序，并列时 ℓ 升序）并编号"""
        sigmas = np.asarray(sigmas, dtype=float)
        if degrees is not None:
            degrees = np.asarray(degrees, dtype=int)
            order = np.lexsort((degrees, -sigmas))
        else:
            order = np.argsort(-sigmas, kind="stable")
        df = pd.DataFrame({
            "rank": np.arange(1, len(sigmas) + 1, dtype=int),
            "sigma": sigmas[order],
            "degree_ell": pd.array(degrees[order] if degrees is not None else [pd.NA] * len(sigmas), dtype="Int64"),
        })
        record = cls(dim_n, float(kappa), OperatorTag(operator_tag), df, dict(method_meta or {}))
        record.validate()
        return record

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def sigma(self) -> np.ndarray:
        return self.entries["sigma"].to_numpy(dtype=float)

    @property
    def degrees(self) -> Optional[np.ndarray]:
        col = self.entries["degree_ell"]
        if col.isna().all():
            return None
        return col.to_numpy(dtype=int)

    def validate(self):
        """检查排序、编号连续、sigma > 0"""
        s = self.sigma
        if len(s) and np.any(s <= 0):
            raise DomainError("SpectrumRecord 中存在非正奇异值")
        if np.any(np.diff(s) > 0):
            raise DomainError("SpectrumRecord 未按非增排序")
        if not np.array_equal(self.entries["rank"].to_numpy(), np.arange(1, len(s) + 1)):
            raise DomainError("SpectrumRecord 的 rank 不连续")

    def scaled(self, factor: float, operator_tag: OperatorTag, **meta) -> "SpectrumRecord":
        """所有 sigma 乘以同一个正数，排序不变"""
        df = self.entries.copy()
        df["sigma"] = df["sigma"] * factor
        return SpectrumRecord(self.dim_n, self.kappa, OperatorTag(operator_tag), df,
                              {**self.method_meta, **meta})
