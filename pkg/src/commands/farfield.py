"""
farfield 子命令 - (F_κ*F_κ)^approx 的特征值开方写入 CSV
"""
import argparse
import logging

from commands.common import add_farfield_arguments, eigen_mode, eigen_options, grid_spec
from config import build_run_config, section
from data import write_spectrum
from deps import resolve_threads
from farfield import DEFAULT_MEMORY_CAP, farfield_singular_values

logger = logging.getLogger(__name__)


def register(subparsers, parents):
    p = subparsers.add_parser("farfield", parents=parents, help="远场算子的近似奇异值")
    p.add_argument("--n", type=int, required=True, help="维数 2 或 3")
    p.add_argument("--kappa", type=float, required=True)
    add_farfield_arguments(p)
    p.add_argument("--out", required=True, help="输出 CSV 路径")
    p.set_defaults(func=run)


def run(args: argparse.Namespace, cfg: dict) -> int:
    run_cfg = build_run_config(command="farfield", dim_n=args.n, kappa=args.kappa, grid_m=args.grid,
                               out=args.out, threads=args.threads)
    record = farfield_singular_values(
        run_cfg.dim_n, run_cfg.kappa, grid_spec(cfg, args), normalized=args.normalized,
        mode=eigen_mode(cfg, args),
        memory_cap=section(cfg, "farfield").get("memory_cap_rows", DEFAULT_MEMORY_CAP),
        threads=resolve_threads(run_cfg.threads), **eigen_options(cfg, args))
    write_spectrum(record, run_cfg.out)
    logger.info(f"σ̂_1 = {record.sigma[0]:.6g}，共 {len(record)} 个")
    return 0
