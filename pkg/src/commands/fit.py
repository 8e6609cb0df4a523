"""
fit 子命令 - 对点列、谱的稳定/不稳定窗口或 σ_1-κ 扫描结果做 log-log 最小二乘
"""
import argparse
import logging
import sys
from pathlib import Path

from commands.common import int_pair
from config import build_run_config
from data import read_points, read_spectrum, write_json
from errors import ComputeError
from regions import Transform, fit_loglog, summarize_regions

logger = logging.getLogger(__name__)

SWEEP_SUMMARY = "sigma1_vs_kappa.csv"
OPERATOR_ALIASES = {"A": "Herglotz_A", "Q": "Herglotz_Q", "F": "Farfield_F", "Ftilde": "Farfield_Ftilde"}


def register(subparsers, parents):
    p = subparsers.add_parser("fit", parents=parents, help="log-log 最小二乘拟合")
    p.add_argument("inputs", nargs="+", help="CSV 文件（sigma1-vs-kappa 模式也可给 sweep 输出目录）")
    p.add_argument("--mode", choices=["points", "stable", "tail", "regions", "sigma1-vs-kappa"], default="points")
    p.add_argument("--transform", help="log_j、log_kappa 或 j_pow(p)；points 模式缺省 log_j")
    p.add_argument("--window", type=int_pair, help="1 起始、两端包含的下标区间 lo,hi")
    p.add_argument("--n", type=int, help="谱缺少元数据时的维数")
    p.add_argument("--kappa", type=float, help="谱缺少元数据时的波数")
    p.add_argument("--operator", choices=list(OPERATOR_ALIASES), help="谱缺少元数据时的算子")
    p.add_argument("--out", help="输出 JSON 路径，缺省写到 stdout")
    p.set_defaults(func=run)


def _points_fit(path: str, transform: Transform, window):
    return fit_loglog(read_points(path), transform, window)


def run(args: argparse.Namespace, cfg: dict) -> int:
    run_cfg = build_run_config(command="fit", inputs=args.inputs, out=args.out, threads=args.threads)
    source = run_cfg.inputs[0]

    if args.mode == "sigma1-vs-kappa":
        path = Path(source)
        if path.is_dir():
            path = path / SWEEP_SUMMARY
        result = _points_fit(str(path), Transform.parse(args.transform or "log_kappa"), args.window).as_record()
    elif args.mode == "points":
        result = _points_fit(source, Transform.parse(args.transform or "log_j"), args.window).as_record()
    else:
        tag = OPERATOR_ALIASES.get(args.operator) if args.operator else None
        record = read_spectrum(source, args.n, args.kappa, tag)
        summary = summarize_regions(record)
        if args.mode == "regions":
            result = summary.model_dump(mode="json")
        else:
            fit = summary.stable_fit if args.mode == "stable" else summary.tail_fit
            if fit is None:
                raise ComputeError(f"{args.mode} 窗口塌缩（膝点 {summary.knee_index}，flags={summary.flags}）")
            result = {**fit.as_record(), "knee_index": summary.knee_index}

    text = write_json(result, run_cfg.out)
    if run_cfg.out is None:
        sys.stdout.write(text)
    if "slope" in result:
        logger.info(f"slope = {result['slope']:.6g}, R² = {result['r_squared']:.6f}")
    return 0
