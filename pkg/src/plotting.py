"""
SVG 折线图 - 纯文本输出，对数轴十进刻度、图例、参考斜率线与转折点标记
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

from errors import DomainError, UsageError

logger = logging.getLogger(__name__)

WIDTH, HEIGHT = 720, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 80, 170, 30, 60
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"]


@dataclass
class Series:
    name: str
    x: np.ndarray
    y: np.ndarray
    marker: Optional[tuple[float, float]] = None


@dataclass
class PlotOptions:
    logx: bool = True
    logy: bool = True
    title: str = ""
    xlabel: str = "j"
    ylabel: str = "sigma"
    ref_slope: Optional[float] = None
    ref_point: Optional[tuple[float, float]] = None


class _Axis:
    def __init__(self, lo: float, hi: float, log: bool, pix_lo: float, pix_hi: float):
        self.log = log
        f = math.log10 if log else float
        self.lo, self.hi = f(lo), f(hi)
        if self.hi == self.lo:
            self.lo, self.hi = self.lo - 0.5, self.hi + 0.5
        self.pix_lo, self.pix_hi = pix_lo, pix_hi

    def to_pixel(self, v):
        t = np.log10(v) if self.log else np.asarray(v, dtype=float)
        return self.pix_lo + (t - self.lo) / (self.hi - self.lo) * (self.pix_hi - self.pix_lo)

    def ticks(self) -> list[tuple[float, str]]:
        if self.log:
            first, last = math.ceil(self.lo - 1e-9), math.floor(self.hi + 1e-9)
            step = max(1, math.ceil((last - first + 1) / 10))
            return [(10.0 ** e, f"1e{e}") for e in range(first, last + 1, step)]
        span = self.hi - self.lo
        raw = span / 5
        mag = 10 ** math.floor(math.log10(raw))
        step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=mag)
        start = math.ceil(self.lo / step) * step
        out = []
        v = start
        while v <= self.hi + 1e-12 * span:
            out.append((v, f"{v:g}"))
            v += step
        return out


def _points_attr(px: np.ndarray, py: np.ndarray) -> str:
    return " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))


def render_svg(series: Sequence[Series], options: PlotOptions = PlotOptions()) -> str:
    """生成独立的 SVG 1.1 文档"""
    if not series:
        raise UsageError("plot: 没有输入序列")
    for s in series:
        if len(s.x) == 0:
            raise UsageError(f"plot: 序列 {s.name} 为空")
        if options.logx and np.any(s.x <= 0):
            raise DomainError(f"plot: 序列 {s.name} 含非正 x，不能用对数横轴")
        if options.logy and np.any(s.y <= 0):
            raise DomainError(f"plot: 序列 {s.name} 含非正 y，不能用对数纵轴")

    xs = np.concatenate([s.x for s in series])
    ys = np.concatenate([s.y for s in series])
    ax = _Axis(float(xs.min()), float(xs.max()), options.logx, MARGIN_L, WIDTH - MARGIN_R)
    ay = _Axis(float(ys.min()), float(ys.max()), options.logy, HEIGHT - MARGIN_B, MARGIN_T)
    left, right, top, bottom = MARGIN_L, WIDTH - MARGIN_R, MARGIN_T, HEIGHT - MARGIN_B

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<defs><clipPath id="plot-area"><rect x="{left}" y="{top}" width="{right - left}" '
        f'height="{bottom - top}"/></clipPath></defs>',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{left}" y="{top}" width="{right - left}" height="{bottom - top}" fill="none" stroke="black"/>',
    ]
    if options.title:
        out.append(f'<text x="{(left + right) / 2:.1f}" y="{top - 10}" text-anchor="middle" '
                   f'font-size="14">{escape(options.title)}</text>')

    for v, label in ax.ticks():
        px = float(ax.to_pixel(v))
        out.append(f'<line class="tick-x" x1="{px:.2f}" y1="{bottom}" x2="{px:.2f}" y2="{bottom + 5}" stroke="black"/>')
        out.append(f'<text x="{px:.2f}" y="{bottom + 20}" text-anchor="middle" font-size="11">{label}</text>')
    for v, label in ay.ticks():
        py = float(ay.to_pixel(v))
        out.append(f'<line class="tick-y" x1="{left - 5}" y1="{py:.2f}" x2="{left}" y2="{py:.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{py + 4:.2f}" text-anchor="end" font-size="11">{label}</text>')
    out.append(f'<text x="{(left + right) / 2:.1f}" y="{HEIGHT - 15}" text-anchor="middle" '
               f'font-size="12">{escape(options.xlabel)}</text>')
    out.append(f'<text x="20" y="{(top + bottom) / 2:.1f}" text-anchor="middle" font-size="12" '
               f'transform="rotate(-90 20 {(top + bottom) / 2:.1f})">{escape(options.ylabel)}</text>')

    for i, s in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        out.append(f'<polyline class="series" clip-path="url(#plot-area)" fill="none" stroke="{color}" '
                   f'stroke-width="1.5" points="{_points_attr(ax.to_pixel(s.x), ay.to_pixel(s.y))}"/>')
        if s.marker is not None:
            mx, my = float(ax.to_pixel(s.marker[0])), float(ay.to_pixel(s.marker[1]))
            out.append(f'<circle class="shift-point" cx="{mx:.2f}" cy="{my:.2f}" r="4" fill="none" '
                       f'stroke="{color}" stroke-width="1.5"/>')
        ly = top + 15 + 18 * i
        out.append(f'<line x1="{right + 10}" y1="{ly}" x2="{right + 35}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{right + 40}" y="{ly + 4}" font-size="11">{escape(s.name)}</text>')

    if options.ref_slope is not None:
        if options.ref_point is not None:
            x0, y0 = options.ref_point
        else:
            x0, y0 = float(series[0].x[0]), float(series[0].y[0])
        grid = np.geomspace(xs.min(), xs.max(), 64) if options.logx else np.linspace(xs.min(), xs.max(), 64)
        if options.logx and options.logy:
            gy = y0 * (grid / x0) ** options.ref_slope
        elif options.logy:
            gy = y0 * 10 ** (options.ref_slope * (grid - x0))
        elif options.logx:
            gy = y0 + options.ref_slope * np.log10(grid / x0)
        else:
            gy = y0 + options.ref_slope * (grid - x0)
        keep = gy > 0 if options.logy else np.ones_like(gy, dtype=bool)
        out.append(f'<polyline class="reference" clip-path="url(#plot-area)" fill="none" stroke="gray" '
                   f'stroke-dasharray="4,3" points="{_points_attr(ax.to_pixel(grid[keep]), ay.to_pixel(gy[keep]))}"/>')
        ly = top + 15 + 18 * len(series)
        out.append(f'<line x1="{right + 10}" y1="{ly}" x2="{right + 35}" y2="{ly}" stroke="gray" stroke-dasharray="4,3"/>')
        out.append(f'<text x="{right + 40}" y="{ly + 4}" font-size="11">slope {options.ref_slope:g}</text>')

    out.append("</svg>")
    logger.debug(f"SVG: {len(series)} 条序列")
    return "\n".join(out) + "\n"
