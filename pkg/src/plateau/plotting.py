"""Dependency-free semi-log SVG figures from sweep CSVs."""

from __future__ import annotations

import math
from collections import defaultdict
from pathlib import Path
from xml.sax.saxutils import escape

from .experiment import VarianceReport

WIDTH, HEIGHT = 640, 440
MARGIN = dict(left=80, right=130, top=40, bottom=60)
COLORS = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)
KINDS = ("vs-qubits", "vs-layers")


def _series(reports: list[VarianceReport], kind: str):
    """Group points into labelled series plus prediction lines, both keyed on x."""
    groups = defaultdict(list)
    predictions = defaultdict(dict)
    if kind == "vs-qubits":
        for r in reports:
            groups[f"L={r.n_layers}"].append((r.n_qubits, r.grad_var, r.var_stderr))
            predictions["2-design prediction"][r.n_qubits] = r.pred_var_2design
    elif kind == "vs-layers":
        for r in reports:
            groups[f"n={r.n_qubits}"].append((r.n_layers, r.grad_var, r.var_stderr))
            predictions[f"n={r.n_qubits} prediction"][r.n_layers] = r.pred_var_2design
    else:
        raise ValueError(f"unknown plot kind {kind!r}; expected one of {KINDS}")
    return groups, predictions


def _nice_ticks(lo: float, hi: float, count: int = 6) -> list[float]:
    span = hi - lo or 1.0
    raw = span / count
    step = 10 ** math.floor(math.log10(raw))
    for mult in (1, 2, 5, 10):
        if raw <= mult * step:
            step *= mult
            break
    start = math.ceil(lo / step) * step
    ticks = []
    x = start
    while x <= hi + 1e-9 * span:
        ticks.append(round(x, 10))
        x += step
    return ticks


def render_svg(reports: list[VarianceReport], kind: str, title: str = "") -> str:
    groups, predictions = _series(reports, kind)
    xs = [p[0] for pts in groups.values() for p in pts]
    ys = [p[1] for pts in groups.values() for p in pts if p[1] > 0]
    ys += [v for line in predictions.values() for v in line.values() if v > 0]
    if not xs or not ys:
        raise ValueError("nothing to plot: no positive variances")
    x_lo, x_hi = min(xs), max(xs)
    if x_lo == x_hi:
        x_lo, x_hi = x_lo - 1, x_hi + 1
    y_lo = math.floor(math.log10(min(ys)))
    y_hi = math.ceil(math.log10(max(ys)))
    if y_lo == y_hi:
        y_hi += 1

    plot_w = WIDTH - MARGIN["left"] - MARGIN["right"]
    plot_h = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(x):
        return MARGIN["left"] + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(v):
        return MARGIN["top"] + (y_hi - math.log10(v)) / (y_hi - y_lo) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect class="frame" x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{plot_w}" '
        f'height="{plot_h}" fill="none" stroke="black"/>',
    ]
    for decade in range(y_lo, y_hi + 1):
        y = py(10.0 ** decade)
        out.append(f'<line x1="{MARGIN["left"] - 5}" y1="{y:.2f}" x2="{MARGIN["left"]}" '
                   f'y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{MARGIN["left"] - 8}" y="{y + 4:.2f}" text-anchor="end">'
                   f'1e{decade}</text>')
    for t in _nice_ticks(x_lo, x_hi):
        x = px(t)
        bottom = MARGIN["top"] + plot_h
        out.append(f'<line x1="{x:.2f}" y1="{bottom}" x2="{x:.2f}" y2="{bottom + 5}" stroke="black"/>')
        label = f"{t:g}"
        out.append(f'<text x="{x:.2f}" y="{bottom + 18}" text-anchor="middle">{label}</text>')
    xlabel = "number of qubits" if kind == "vs-qubits" else "number of layers"
    out.append(f'<text x="{MARGIN["left"] + plot_w / 2}" y="{HEIGHT - 15}" '
               f'text-anchor="middle">{xlabel}</text>')
    out.append(f'<text transform="translate(20,{MARGIN["top"] + plot_h / 2}) rotate(-90)" '
               f'text-anchor="middle">Var[dE/d theta] (log scale)</text>')
    if title:
        out.append(f'<text x="{WIDTH / 2}" y="22" text-anchor="middle">{escape(title)}</text>')

    legend_y = MARGIN["top"] + 10
    legend_x = WIDTH - MARGIN["right"] + 10
    for label, line in sorted(predictions.items()):
        pts = [(x, v) for x, v in sorted(line.items()) if v > 0]
        if len(pts) == 1:
            # a constant prediction at a single x is drawn across the frame
            pts = [(x_lo, pts[0][1]), (x_hi, pts[0][1])]
        coords = " ".join(f"{px(x):.2f},{py(v):.2f}" for x, v in pts)
        out.append(f'<polyline class="prediction" points="{coords}" fill="none" '
                   f'stroke="black" stroke-dasharray="6,4"><title>{escape(label)}</title></polyline>')
    for i, (label, pts) in enumerate(sorted(groups.items(), key=lambda kv: _label_key(kv[0]))):
        color = COLORS[i % len(COLORS)]
        for x, v, err in sorted(pts):
            if v <= 0:
                continue
            lo = max(v - err, v * 1e-3)
            out.append(f'<line class="errorbar" x1="{px(x):.2f}" y1="{py(lo):.2f}" '
                       f'x2="{px(x):.2f}" y2="{py(v + err):.2f}" stroke="{color}"/>')
            out.append(f'<circle class="data" cx="{px(x):.2f}" cy="{py(v):.2f}" r="3" '
                       f'fill="{color}"/>')
        out.append(f'<circle cx="{legend_x + 5}" cy="{legend_y - 4}" r="3" fill="{color}"/>')
        out.append(f'<text x="{legend_x + 14}" y="{legend_y}">{escape(label)}</text>')
        legend_y += 16
    out.append(f'<line x1="{legend_x}" y1="{legend_y - 4}" x2="{legend_x + 10}" '
               f'y2="{legend_y - 4}" stroke="black" stroke-dasharray="3,2"/>')
    out.append(f'<text x="{legend_x + 14}" y="{legend_y}">2-design</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _label_key(label: str):
    return int(label.split("=")[1])


def gnuplot_script(csv_path: str, kind: str) -> str:
    xcol = 1 if kind == "vs-qubits" else 2
    xlabel = "number of qubits" if kind == "vs-qubits" else "number of layers"
    return "\n".join([
        "# gnuplot script; columns follow the sweep CSV header",
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set logscale y",
        f"set xlabel '{xlabel}'",
        "set ylabel 'Var[dE/d theta]'",
        f"plot '{csv_path}' using {xcol}:5:7 with yerrorbars title 'sample variance', \\",
        f"     '' using {xcol}:8 with lines dashtype 2 title '2-design prediction'",
        "",
    ])


def write_plot(reports: list[VarianceReport], kind: str, out_path, csv_path: str) -> tuple[Path, Path]:
    out_path = Path(out_path)
    out_path.write_text(render_svg(reports, kind, title=Path(csv_path).name))
    script = out_path.with_suffix(".gp")
    script.write_text(gnuplot_script(str(csv_path), kind))
    return out_path, script
