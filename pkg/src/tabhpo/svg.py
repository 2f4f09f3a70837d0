"""Minimal SVG line, step and bar charts; no plotting dependency."""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from pathlib import Path
from xml.sax.saxutils import escape

PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2",
           "#7f7f7f", "#bcbd22", "#17becf"]

WIDTH, HEIGHT = 640, 400
MARGIN = dict(left=70, right=130, top=30, bottom=50)


class _Axis:
    def __init__(self, lo: float, hi: float, a: float, b: float, log: bool = False):
        self.log = log and lo > 0
        if self.log:
            lo, hi = math.log10(lo), math.log10(hi)
        if hi <= lo:
            lo, hi = lo - 0.5, hi + 0.5
        self.lo, self.hi, self.a, self.b = lo, hi, a, b

    def __call__(self, v: float) -> float:
        if self.log:
            v = math.log10(max(v, 10 ** self.lo))
        return self.a + (v - self.lo) / (self.hi - self.lo) * (self.b - self.a)

    def ticks(self, n: int = 5) -> list[float]:
        if self.log:
            return [10.0 ** k for k in range(math.floor(self.lo), math.ceil(self.hi) + 1)
                    if self.lo <= k <= self.hi]
        return [self.lo + k * (self.hi - self.lo) / (n - 1) for k in range(n)]


def _fmt(v: float) -> str:
    return f"{v:.3g}"


def _frame(title: str, xlabel: str, ylabel: str, xa: _Axis, ya: _Axis) -> list[str]:
    x0, x1 = MARGIN["left"], WIDTH - MARGIN["right"]
    y0, y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'font-family="sans-serif" font-size="11">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>',
        f'<text x="{(x0 + x1) / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="16" y="{(y0 + y1) / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {(y0 + y1) / 2:.1f})">{escape(ylabel)}</text>',
    ]
    for t in xa.ticks():
        px = xa(t)
        out.append(f'<line x1="{px:.1f}" y1="{y0}" x2="{px:.1f}" y2="{y0 + 4}" stroke="black"/>')
        out.append(f'<text x="{px:.1f}" y="{y0 + 16}" text-anchor="middle">{_fmt(t)}</text>')
    for t in ya.ticks():
        py = ya(t)
        out.append(f'<line x1="{x0 - 4}" y1="{py:.1f}" x2="{x0}" y2="{py:.1f}" stroke="black"/>')
        out.append(f'<text x="{x0 - 6}" y="{py + 4:.1f}" text-anchor="end">{_fmt(t)}</text>')
    return out


def _legend(names: list[str]) -> list[str]:
    x = WIDTH - MARGIN["right"] + 12
    out = []
    for k, name in enumerate(names):
        y = MARGIN["top"] + 16 * k + 8
        out.append(f'<line x1="{x}" y1="{y}" x2="{x + 18}" y2="{y}" '
                   f'stroke="{PALETTE[k % len(PALETTE)]}" stroke-width="2"/>')
        out.append(f'<text x="{x + 24}" y="{y + 4}">{escape(name)}</text>')
    return out


def _finite(vals):
    return [v for v in vals if math.isfinite(v)]


def line_chart(series: dict, title: str = "", xlabel: str = "", ylabel: str = "",
               logx: bool = False, logy: bool = False, step: bool = False) -> str:
    """``series`` maps a label to ``(xs, ys)``; ``step`` draws post-steps."""
    xs_all = _finite([x for xs, _ in series.values() for x in xs])
    ys_all = _finite([y for _, ys in series.values() for y in ys])
    if logx:
        xs_all = [x for x in xs_all if x > 0]
    if logy:
        ys_all = [y for y in ys_all if y > 0]
    xa = _Axis(min(xs_all, default=0.0), max(xs_all, default=1.0),
               MARGIN["left"], WIDTH - MARGIN["right"], logx)
    ya = _Axis(min(ys_all, default=0.0), max(ys_all, default=1.0),
               HEIGHT - MARGIN["bottom"], MARGIN["top"], logy)
    out = _frame(title, xlabel, ylabel, xa, ya)
    for k, (name, (xs, ys)) in enumerate(series.items()):
        pts = [(x, y) for x, y in zip(xs, ys) if math.isfinite(x) and math.isfinite(y)
               and (not xa.log or x > 0) and (not ya.log or y > 0)]
        if not pts:
            continue
        coords = []
        for i, (x, y) in enumerate(pts):
            if step and i:
                coords.append(f"{xa(x):.1f},{ya(pts[i - 1][1]):.1f}")
            coords.append(f"{xa(x):.1f},{ya(y):.1f}")
        out.append(f'<polyline fill="none" stroke="{PALETTE[k % len(PALETTE)]}" '
                   f'stroke-width="1.5" points="{" ".join(coords)}"/>')
    out += _legend(list(series))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def bar_chart(labels: list[str], values: list[float], title: str = "", ylabel: str = "") -> str:
    n = max(len(labels), 1)
    top = max(_finite(values), default=1.0)
    ya = _Axis(0.0, top if top > 0 else 1.0, HEIGHT - MARGIN["bottom"], MARGIN["top"])
    xa = _Axis(0.0, 1.0, MARGIN["left"], WIDTH - MARGIN["right"])
    out = _frame(title, "", ylabel, _NoTicks(xa), ya)
    slot = (WIDTH - MARGIN["left"] - MARGIN["right"]) / n
    for k, (lab, v) in enumerate(zip(labels, values)):
        x = MARGIN["left"] + k * slot + slot * 0.1
        y = ya(max(v, 0.0))
        h = ya(0.0) - y
        out.append(f'<rect x="{x:.1f}" y="{y:.1f}" width="{slot * 0.8:.1f}" height="{h:.1f}" '
                   f'fill="{PALETTE[0]}"/>')
        cx = x + slot * 0.4
        out.append(f'<text x="{cx:.1f}" y="{HEIGHT - MARGIN["bottom"] + 14}" text-anchor="end" '
                   f'transform="rotate(-30 {cx:.1f} {HEIGHT - MARGIN["bottom"] + 14})">'
                   f'{escape(lab)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


class _NoTicks(_Axis):
    def __init__(self, axis: _Axis):
        self.__dict__.update(axis.__dict__)

    def ticks(self, n: int = 5) -> list[float]:
        return []


def _read_rows(path: Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def write_report_plots(out_dir) -> list[Path]:
    """Regret-over-time and final-regret ECDF plots from a report bundle."""
    out = Path(out_dir)
    written = []
    curves = defaultdict(lambda: ([], []))
    for r in _read_rows(out / "curves.csv"):
        xs, ys = curves[r["strategy"]]
        xs.append(float(r["time"]))
        ys.append(float(r["median"]))
    if curves:
        p = out / "curves.svg"
        p.write_text(line_chart(dict(curves), "median test regret", "simulated seconds",
                                "regret", logx=True, logy=True, step=True), encoding="utf-8")
        written.append(p)
    ecdfs = defaultdict(lambda: ([], []))
    for r in _read_rows(out / "ecdf.csv"):
        xs, ys = ecdfs[r["strategy"]]
        xs.append(float(r["final_regret"]))
        ys.append(float(r["cdf"]))
    if ecdfs:
        p = out / "ecdf.svg"
        p.write_text(line_chart(dict(ecdfs), "final regret", "test regret", "cdf",
                                step=True), encoding="utf-8")
        written.append(p)
    return written
