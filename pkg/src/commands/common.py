"""
子命令共用的参数解析与配置取值
"""
import argparse
from typing import Optional

from config import ROOT_DIR, section
from data import LambdaCache
from errors import UsageError
from farfield import EigenMode
from herglotz import Truncation
from quadrature import DEFAULT_GL_POINTS, DEFAULT_PANEL_LEN, GridSpec


def float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"无法解析数值列表: {text!r}")


def float_pair(text: str) -> tuple[float, float]:
    values = float_list(text)
    if len(values) != 2:
        raise argparse.ArgumentTypeError(f"需要两个逗号分隔的数值，收到 {text!r}")
    return values[0], values[1]


def int_pair(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"需要 lo,hi 形式的整数对，收到 {text!r}")
    return lo, hi


def herglotz_quad(cfg: dict, args: argparse.Namespace) -> dict:
    h = section(cfg, "herglotz")
    return {
        "panel_len": getattr(args, "panel_len", None) or h.get("panel_len", DEFAULT_PANEL_LEN),
        "gl_points": getattr(args, "gl_points", None) or h.get("gl_points", DEFAULT_GL_POINTS),
    }


def truncation(cfg: dict, args: argparse.Namespace) -> Truncation:
    """命令行未给 --floor / --max-count 时取 config.json 的 sigma_floor"""
    floor, count = args.floor, args.max_count
    if floor is None and count is None:
        floor = section(cfg, "herglotz").get("sigma_floor", 1e-14)
    return Truncation(max_count=count, sigma_floor=floor)


def lambda_source(cfg: dict, args: argparse.Namespace, threads: int) -> Optional[LambdaCache]:
    cache = section(cfg, "cache")
    if args.no_cache or not cache.get("enabled", True):
        return None
    quad = herglotz_quad(cfg, args)
    cache_dir = ROOT_DIR / cache.get("dir", "data/cache")
    return LambdaCache(cache_dir, quad["panel_len"], quad["gl_points"], threads)


def grid_spec(cfg: dict, args: argparse.Namespace) -> GridSpec:
    ff = section(cfg, "farfield")
    m = args.grid or ff.get("grid_m_2d" if args.n == 2 else "grid_m_3d", 60 if args.n == 2 else 12)
    return GridSpec(args.n, m, args.domain or ff.get("domain", "cube"))


def eigen_mode(cfg: dict, args: argparse.Namespace) -> EigenMode:
    if args.mode:
        return EigenMode.parse(args.mode)
    return EigenMode()


def eigen_options(cfg: dict, args: argparse.Namespace) -> dict:
    e = section(cfg, "eigen")
    ff = section(cfg, "farfield")
    backend = getattr(args, "backend", None) or e.get("backend", "auto")
    if backend not in ("auto", "native", "lapack"):
        raise UsageError(f"eigen.backend: 未知后端 {backend}")
    return {
        "backend": backend,
        "native_max": e.get("native_max", 1000),
        "full_max": ff.get("full_eig_max", 5000),
        "tol": e.get("lanczos_tol", 1e-8),
        "max_restarts": e.get("max_restarts", 300),
        "seed": args.seed if args.seed is not None else 0,
    }


def add_herglotz_arguments(p: argparse.ArgumentParser):
    p.add_argument("--floor", type=float, help="sigma 截断下限")
    p.add_argument("--max-count", type=int, help="最多输出的奇异值个数")
    p.add_argument("--operator", choices=["A", "Q"], default="A", help="A_κ 或未归一化的 Q_κ")
    p.add_argument("--panel-len", type=float, help="复合 GL 小区间长度")
    p.add_argument("--gl-points", type=int, help="每个小区间的 GL 点数")


def add_farfield_arguments(p: argparse.ArgumentParser):
    p.add_argument("--grid", type=int, help="每轴网格数 m")
    p.add_argument("--normalized", action="store_true", help="乘 κ^{-(n-1)/2}，输出 F̃_κ 的谱")
    p.add_argument("--mode", help="full 或 top_k:<k>")
    p.add_argument("--backend", choices=["auto", "native", "lapack"])
    p.add_argument("--domain", choices=["cube", "ball"])
