"""
sweep 子命令 - 对一组 κ 逐个计算谱，并汇总 σ_1 随 κ 的变化
"""
import argparse
import logging
from pathlib import Path

from commands.common import (
    add_farfield_arguments,
    add_herglotz_arguments,
    eigen_mode,
    eigen_options,
    float_list,
    grid_spec,
    herglotz_quad,
    lambda_source,
    truncation,
)
from commands.fit import SWEEP_SUMMARY
from config import build_run_config, section
from data import number_label, write_points, write_spectrum
from deps import parallel_map, resolve_threads
from farfield import DEFAULT_MEMORY_CAP, farfield_singular_values
from herglotz import herglotz_singular_values, q_operator_spectrum
from spectrum import SpectrumRecord

logger = logging.getLogger(__name__)


def register(subparsers, parents):
    p = subparsers.add_parser("sweep", parents=parents, help="κ 扫描与 σ_1-κ 汇总")
    p.add_argument("--source", choices=["herglotz", "farfield"], default="farfield")
    p.add_argument("--n", type=int, required=True, help="维数 2 或 3")
    p.add_argument("--kappas", type=float_list, required=True, help="逗号分隔的 κ 列表")
    add_herglotz_arguments(p)
    add_farfield_arguments(p)
    p.add_argument("--out-dir", required=True, help="输出目录")
    p.set_defaults(func=run)


def spectrum_filename(source: str, dim_n: int, kappa: float) -> str:
    return f"{source}_n{dim_n}_k{number_label(kappa)}.csv"


def run(args: argparse.Namespace, cfg: dict) -> int:
    run_cfg = build_run_config(command="sweep", dim_n=args.n, kappa_list=args.kappas, grid_m=args.grid,
                               max_count=args.max_count, sigma_floor=args.floor, out=args.out_dir,
                               threads=args.threads)
    threads = resolve_threads(run_cfg.threads)
    out_dir = Path(run_cfg.out)
    kappas = run_cfg.kappa_list

    if args.source == "herglotz":
        quad = herglotz_quad(cfg, args)
        trunc = truncation(cfg, args)
        compute = q_operator_spectrum if args.operator == "Q" else herglotz_singular_values
        source = lambda_source(cfg, args, 1)

        def one(kappa: float) -> SpectrumRecord:
            return compute(run_cfg.dim_n, kappa, trunc, threads=1, source=source, **quad)
    else:
        grid = grid_spec(cfg, args)
        mode = eigen_mode(cfg, args)
        options = eigen_options(cfg, args)
        cap = section(cfg, "farfield").get("memory_cap_rows", DEFAULT_MEMORY_CAP)

        def one(kappa: float) -> SpectrumRecord:
            return farfield_singular_values(run_cfg.dim_n, kappa, grid, normalized=args.normalized, mode=mode,
                                            memory_cap=cap, threads=1, **options)

    # 各 κ 相互独立，线程预算用在 κ 之间
    records = parallel_map(one, kappas, threads)
    for kappa, record in zip(kappas, records):
        write_spectrum(record, out_dir / spectrum_filename(args.source, run_cfg.dim_n, kappa))
        logger.info(f"κ={kappa:g}: σ_1 = {record.sigma[0]:.6g}")
    write_points(out_dir / SWEEP_SUMMARY, ("kappa", "sigma1"),
                 [(kappa, record.sigma[0]) for kappa, record in zip(kappas, records)])
    logger.info(f"扫描完成: {len(records)} 个 κ，汇总写入 {out_dir / SWEEP_SUMMARY}")
    return 0
