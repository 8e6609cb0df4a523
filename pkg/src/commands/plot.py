"""
plot 子命令 - 多条谱叠加的 SVG 图
"""
import argparse
import logging
from pathlib import Path

from commands.common import float_pair
from config import build_run_config
from data import write_text, read_points, read_spectrum
from plotting import PlotOptions, Series, render_svg
from regions import predicted_shift_point

logger = logging.getLogger(__name__)


def register(subparsers, parents):
    p = subparsers.add_parser("plot", parents=parents, help="log-log SVG 折线图")
    p.add_argument("inputs", nargs="+", help="CSV 文件，取前两列作为 (x, y)")
    p.add_argument("--logx", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--logy", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--ref-slope", type=float, help="参考线斜率")
    p.add_argument("--ref-point", type=float_pair, help="参考线经过的点 x,y")
    p.add_argument("--ref-shift", action="store_true", help="标出每条谱的理论转折点（需要 .json 元数据）")
    p.add_argument("--title", default="")
    p.add_argument("--xlabel", default="j")
    p.add_argument("--ylabel", default="sigma")
    p.add_argument("--out", required=True, help="输出 SVG 路径")
    p.set_defaults(func=run)


def run(args: argparse.Namespace, cfg: dict) -> int:
    run_cfg = build_run_config(command="plot", inputs=args.inputs, out=args.out, logx=args.logx, logy=args.logy,
                               threads=args.threads)
    series = []
    for path in run_cfg.inputs:
        pts = read_points(path)
        marker = None
        if args.ref_shift:
            record = read_spectrum(path)
            marker = predicted_shift_point(record.operator_tag, record.dim_n, record.kappa)
        series.append(Series(Path(path).stem, pts[:, 0], pts[:, 1], marker))
    options = PlotOptions(logx=run_cfg.logx, logy=run_cfg.logy, title=args.title, xlabel=args.xlabel,
                          ylabel=args.ylabel, ref_slope=args.ref_slope, ref_point=args.ref_point)
    write_text(Path(run_cfg.out), render_svg(series, options))
    logger.info(f"已写入 {run_cfg.out}（{len(series)} 条序列）")
    return 0
