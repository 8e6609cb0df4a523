"""
herglotz 子命令 - A_κ / Q_κ 的奇异值谱写入 CSV
"""
import argparse
import logging

from commands.common import add_herglotz_arguments, herglotz_quad, lambda_source, truncation
from config import build_run_config
from data import write_spectrum
from deps import resolve_threads
from herglotz import herglotz_singular_values, q_operator_spectrum

logger = logging.getLogger(__name__)


def register(subparsers, parents):
    p = subparsers.add_parser("herglotz", parents=parents, help="Herglotz 算子的精确奇异值")
    p.add_argument("--n", type=int, required=True, help="维数 2 或 3")
    p.add_argument("--kappa", type=float, required=True)
    add_herglotz_arguments(p)
    p.add_argument("--out", required=True, help="输出 CSV 路径")
    p.set_defaults(func=run)


def run(args: argparse.Namespace, cfg: dict) -> int:
    run_cfg = build_run_config(command="herglotz", dim_n=args.n, kappa=args.kappa, max_count=args.max_count,
                               sigma_floor=args.floor, out=args.out, threads=args.threads)
    threads = resolve_threads(run_cfg.threads)
    quad = herglotz_quad(cfg, args)
    compute = q_operator_spectrum if args.operator == "Q" else herglotz_singular_values
    record = compute(run_cfg.dim_n, run_cfg.kappa, truncation(cfg, args), threads=threads,
                     source=lambda_source(cfg, args, threads), **quad)
    write_spectrum(record, run_cfg.out)
    logger.info(f"σ_1 = {record.sigma[0]:.6g}，共 {len(record)} 个")
    return 0
