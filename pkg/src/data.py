"""
数据服务模块 - 谱 CSV / JSON 元数据的读写，Λ_ℓ 表的 Parquet 本地缓存

CSV：逗号分隔、表头、LF 换行、UTF-8，浮点数写 17 位有效数字以保证读回逐位相同
"""
import json
import logging
import math
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np
import pandas as pd

from config import DATA_DIR
from errors import DataFormatError, UsageError
from herglotz import lambda_table
from quadrature import DEFAULT_GL_POINTS, DEFAULT_PANEL_LEN
from spectrum import OperatorTag, SpectrumRecord

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def number_label(x: float) -> str:
    """文件名里的数值：能用短格式精确表示就用短格式，否则用 repr，不同的值不会撞名"""
    short = f"{float(x):g}"
    return short if float(short) == float(x) else repr(float(x))


def sidecar_path(path: PathLike) -> Path:
    return Path(path).with_suffix(".json")


def write_text(path: Path, text: str):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as e:
        raise UsageError(f"无法写入 {path}: {e.strerror}")


def dumps(obj) -> str:
    """确定性 JSON（键排序），非有限浮点数写成 null"""
    def clean(v):
        if isinstance(v, float) and not math.isfinite(v):
            return None
        if isinstance(v, dict):
            return {str(k): clean(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [clean(x) for x in v]
        if isinstance(v, np.generic):
            return clean(v.item())
        return v
    return json.dumps(clean(obj), ensure_ascii=False, sort_keys=True)


# ==================== 谱文件 ====================

def write_spectrum(record: SpectrumRecord, path: PathLike):
    """写 CSV 与同名 .json 元数据；Herglotz 谱带 degree_ell 列，远场谱只有 rank,sigma"""
    path = Path(path)
    herglotz = record.operator_tag.is_herglotz
    lines = ["rank,sigma,degree_ell" if herglotz else "rank,sigma"]
    degrees = record.degrees
    for i, (rank, sigma) in enumerate(zip(record.entries["rank"], record.sigma)):
        row = f"{int(rank)},{fmt(sigma)}"
        if herglotz:
            row += f",{int(degrees[i])}" if degrees is not None else ","
        lines.append(row)
    write_text(path, "\n".join(lines) + "\n")
    meta = {
        "dim_n": record.dim_n,
        "kappa": record.kappa,
        "operator_tag": record.operator_tag.value,
        "count": len(record),
        "method_meta": record.method_meta,
    }
    write_text(sidecar_path(path), dumps(meta) + "\n")
    logger.info(f"已写入 {path}（{len(record)} 行）")


def _read_lines(path: Path) -> list[str]:
    try:
        return path.read_text(encoding="utf-8").splitlines()
    except FileNotFoundError:
        raise DataFormatError("文件不存在", str(path))
    except (OSError, UnicodeDecodeError) as e:
        raise DataFormatError(f"无法读取: {e}", str(path))


def _parse_float(text: str, path: Path, line: int, column: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise DataFormatError(f"列 {column} 无法解析为数值: {text!r}", str(path), line)


def read_points(path: PathLike) -> np.ndarray:
    """读取带表头的 CSV 的前两列，返回形状 (N, 2) 的数组"""
    path = Path(path)
    lines = _read_lines(path)
    if not lines:
        raise DataFormatError("空文件", str(path))
    header = lines[0].split(",")
    if len(header) < 2:
        raise DataFormatError("表头至少需要两列", str(path), 1)
    rows = []
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != len(header):
            raise DataFormatError(f"应有 {len(header)} 列，实际 {len(cells)} 列", str(path), i)
        rows.append((_parse_float(cells[0], path, i, header[0]), _parse_float(cells[1], path, i, header[1])))
    if not rows:
        raise DataFormatError("没有数据行", str(path))
    return np.array(rows)


def read_spectrum(path: PathLike, dim_n: Optional[int] = None, kappa: Optional[float] = None,
                  operator_tag: Optional[str] = None) -> SpectrumRecord:
    """
    读回 write_spectrum 写出的谱

    dim_n / kappa / operator_tag 缺省时取自 .json 元数据；元数据也缺失时报错
    """
    path = Path(path)
    lines = _read_lines(path)
    if not lines or lines[0] not in ("rank,sigma", "rank,sigma,degree_ell"):
        raise DataFormatError("表头应为 rank,sigma 或 rank,sigma,degree_ell", str(path), 1)
    with_degree = lines[0].endswith("degree_ell")
    ranks, sigmas, degrees = [], [], []
    for i, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != (3 if with_degree else 2):
            raise DataFormatError(f"列数不符: {line!r}", str(path), i)
        try:
            ranks.append(int(cells[0]))
        except ValueError:
            raise DataFormatError(f"rank 不是整数: {cells[0]!r}", str(path), i)
        sigma = _parse_float(cells[1], path, i, "sigma")
        if not sigma > 0:
            raise DataFormatError(f"sigma 必须为正: {cells[1]!r}", str(path), i)
        sigmas.append(sigma)
        if with_degree:
            degrees.append(int(cells[2]) if cells[2] else None)
    if ranks != list(range(1, len(ranks) + 1)):
        raise DataFormatError("rank 必须从 1 开始连续", str(path))
    if any(b > a for a, b in zip(sigmas, sigmas[1:])):
        raise DataFormatError("sigma 必须非增", str(path))

    meta = {}
    side = sidecar_path(path)
    if side.exists():
        try:
            meta = json.loads(side.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise DataFormatError(f"元数据不是合法 JSON: {e.msg}", str(side), e.lineno)
    dim_n = dim_n or meta.get("dim_n")
    kappa = kappa or meta.get("kappa")
    operator_tag = operator_tag or meta.get("operator_tag")
    if dim_n is None or kappa is None or operator_tag is None:
        raise DataFormatError("缺少 dim_n / kappa / operator_tag（既无元数据也未在命令行给出）", str(path))

    entries = pd.DataFrame({
        "rank": np.array(ranks, dtype=int),
        "sigma": np.array(sigmas, dtype=float),
        "degree_ell": pd.array(degrees if with_degree and None not in degrees else [pd.NA] * len(ranks),
                               dtype="Int64"),
    })
    record = SpectrumRecord(int(dim_n), float(kappa), OperatorTag(operator_tag), entries,
                            dict(meta.get("method_meta") or {}))
    record.validate()
    return record


def write_json(obj, path: Optional[PathLike]) -> str:
    """写单个 JSON 对象；path 为空时只返回文本"""
    text = dumps(obj) + "\n"
    if path is not None:
        write_text(Path(path), text)
    return text


def write_json_lines(objs: Iterable, path: Optional[PathLike]) -> str:
    text = "".join(dumps(o) + "\n" for o in objs)
    if path is not None:
        write_text(Path(path), text)
    return text


def write_points(path: PathLike, header: tuple[str, str], points: Iterable[tuple[float, float]]):
    lines = [",".join(header)] + [f"{fmt(x)},{fmt(y)}" for x, y in points]
    write_text(Path(path), "\n".join(lines) + "\n")


# ==================== Λ_ℓ 缓存 ====================

class LambdaCache:
    """
    Λ_ℓ(κ) 表的 Parquet 缓存，可直接作为 herglotz_singular_values 的 source

    每个 (n, κ, panel_len, gl_points) 一个文件，长表列 ell_max, ell, lam；
    Miller 递推的起点随表长变化，所以按请求的 ell_max 整表存取，命中结果与重算逐位相同
    """

    def __init__(self, cache_dir: Optional[PathLike] = None, panel_len: float = DEFAULT_PANEL_LEN,
                 gl_points: int = DEFAULT_GL_POINTS, threads: int = 1):
        self.cache_dir = Path(cache_dir) if cache_dir else DATA_DIR / "cache"
        self.panel_len = panel_len
        self.gl_points = gl_points
        self.threads = threads

    def path_for(self, dim_n: int, kappa: float) -> Path:
        label = f"n{dim_n}_k{number_label(kappa)}_p{number_label(self.panel_len)}_g{self.gl_points}"
        return self.cache_dir / f"lambda_{label}.parquet"

    def __call__(self, dim_n: int, kappa: float, ell_max: int) -> np.ndarray:
        cache_path = self.path_for(dim_n, kappa)

        # 尝试读取缓存
        cached_df = pd.DataFrame()
        if cache_path.exists():
            try:
                cached_df = pd.read_parquet(cache_path)
            except Exception as e:
                logger.warning(f"缓存损坏，将重新计算: {e}")
                cache_path.unlink()
                cached_df = pd.DataFrame()
        if not cached_df.empty:
            hit = cached_df[cached_df["ell_max"] == ell_max].sort_values("ell")
            if len(hit) == ell_max + 1:
                logger.debug(f"Λ 缓存命中 {cache_path.name} (ell_max={ell_max})")
                return hit["lam"].to_numpy(dtype=float)

        lam = lambda_table(dim_n, kappa, ell_max, self.panel_len, self.gl_points, self.threads)
        df = pd.DataFrame({"ell_max": ell_max, "ell": np.arange(ell_max + 1), "lam": lam})

        # 合并缓存
        if not cached_df.empty:
            df = pd.concat([cached_df, df]).drop_duplicates(["ell_max", "ell"], keep="last")
        try:
            self.cache_dir.mkdir(parents=True, exist_ok=True)
            df.sort_values(["ell_max", "ell"]).reset_index(drop=True).to_parquet(cache_path)
            logger.info(f"Λ 表已缓存 {cache_path.name} (ell_max={ell_max})")
        except OSError as e:
            logger.warning(f"写缓存失败 {cache_path}: {e}")
        return lam
