"""Summaries and charts built back up from the per-run CSV files.

Everything here is a pure function of the CSV bytes: re-running a report on
the same directory reproduces identical output files, which is what the
determinism checks diff.  The chart is plain hand-written SVG so the
artifact is dependency-free and diffable.
"""

import math
import os
import re

import numpy as np

from .harness import config_summary, read_run_csv, write_summary_csv

RUN_FILE_RE = re.compile(r"^(?P<config>.+)__seed(?P<seed>\d+)\.csv$")

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd",
           "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")

WIDTH, HEIGHT = 720, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 16, 16, 44
MAX_POINTS = 512  # per-curve cap; long runs are strided down for the chart


def collect_runs(run_dir):
    """Run curves grouped by config id, seeds sorted, from {id}__seed{n}.csv."""
    if not os.path.isdir(run_dir):
        raise FileNotFoundError(f"run directory not found: {run_dir}")
    groups = {}
    for name in sorted(os.listdir(run_dir)):
        m = RUN_FILE_RE.match(name)
        if m is None:
            continue
        curve = read_run_csv(os.path.join(run_dir, name))
        groups.setdefault(m.group("config"), []).append(curve)
    if not groups:
        raise FileNotFoundError(f"no run CSVs found in {run_dir}")
    for curves in groups.values():
        curves.sort(key=lambda c: c.seed)
    return groups


def generate_report(run_dir, out_dir=None):
    """Write summary.csv and regret.svg from a directory of run CSVs.

    Returns the two output paths.  Raises FileNotFoundError / ValueError on
    missing or corrupt inputs; messages name the offending path.
    """
    out_dir = out_dir or run_dir
    groups = collect_runs(run_dir)
    summaries = [config_summary(cid, groups[cid]) for cid in sorted(groups)]
    os.makedirs(out_dir, exist_ok=True)
    summary_path = os.path.join(out_dir, "summary.csv")
    write_summary_csv(summary_path, summaries)
    svg_path = os.path.join(out_dir, "regret.svg")
    with open(svg_path, "w") as f:
        f.write(regret_chart_svg(groups))
    return summary_path, svg_path


# -- SVG assembly -----------------------------------------------------------


def _series(groups):
    """Per config id: (k, mean, se) arrays of the cumulative regret curves."""
    out = []
    for cid in sorted(groups):
        curves = groups[cid]
        K = curves[0].cum_regret.size
        if any(c.cum_regret.size != K for c in curves):
            raise ValueError(f"curves for {cid!r} disagree on episode count")
        stack = np.stack([c.cum_regret for c in curves])
        mean = stack.mean(axis=0)
        if len(curves) > 1:
            se = stack.std(axis=0, ddof=1) / math.sqrt(len(curves))
        else:
            se = np.zeros(K)
        stride = max(1, -(-K // MAX_POINTS))
        idx = np.arange(0, K, stride)
        if idx[-1] != K - 1:
            idx = np.append(idx, K - 1)
        out.append((cid, curves[0].k[idx].astype(float), mean[idx], se[idx]))
    return out


def _ticks(lo, hi, target=5):
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * span:
        ticks.append(0.0 if abs(t) < 1e-12 * span else t)
        t += step
    return ticks


def _fmt_tick(v):
    return "%g" % v


def _xy(k, v, xlim, ylim):
    x0, x1 = xlim
    y0, y1 = ylim
    px = MARGIN_L + (k - x0) / (x1 - x0) * (WIDTH - MARGIN_L - MARGIN_R)
    py = HEIGHT - MARGIN_B - (v - y0) / (y1 - y0) * (HEIGHT - MARGIN_T - MARGIN_B)
    return px, py


def _path_points(k, v, xlim, ylim):
    pts = []
    for ki, vi in zip(k, v):
        px, py = _xy(ki, vi, xlim, ylim)
        pts.append("%.2f,%.2f" % (px, py))
    return " ".join(pts)


def regret_chart_svg(groups):
    """Mean cumulative regret per config with a +-1 SE band, as SVG text."""
    series = _series(groups)
    xmax = max(float(k[-1]) for _, k, _, _ in series)
    xlim = (1.0, xmax if xmax > 1.0 else 2.0)
    lo = min(0.0, min(float(np.min(m - e)) for _, _, m, e in series))
    hi = max(float(np.max(m + e)) for _, _, m, e in series)
    if hi <= lo:
        hi = lo + 1.0
    pad = 0.05 * (hi - lo)
    ylim = (lo, hi + pad)

    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d" '
        'viewBox="0 0 %d %d">' % (WIDTH, HEIGHT, WIDTH, HEIGHT),
        '<rect width="%d" height="%d" fill="white"/>' % (WIDTH, HEIGHT),
    ]
    ax_x0, ax_y0 = _xy(xlim[0], ylim[0], xlim, ylim)
    ax_x1, ax_y1 = _xy(xlim[1], ylim[1], xlim, ylim)
    for t in _ticks(*xlim):
        px, _ = _xy(t, ylim[0], xlim, ylim)
        parts.append('<line x1="%.2f" y1="%.2f" x2="%.2f" y2="%.2f" '
                     'stroke="#dddddd"/>' % (px, ax_y1, px, ax_y0))
        parts.append('<text x="%.2f" y="%.2f" font-family="monospace" '
                     'font-size="11" text-anchor="middle">%s</text>'
                     % (px, ax_y0 + 16, _fmt_tick(t)))
    for t in _ticks(*ylim):
        _, py = _xy(xlim[0], t, xlim, ylim)
        parts.append('<line x1="%.2f" y1="%.2f" x2="%.2f" y2="%.2f" '
                     'stroke="#dddddd"/>' % (ax_x0, py, ax_x1, py))
        parts.append('<text x="%.2f" y="%.2f" font-family="monospace" '
                     'font-size="11" text-anchor="end">%s</text>'
                     % (ax_x0 - 6, py + 4, _fmt_tick(t)))
    parts.append('<line x1="%.2f" y1="%.2f" x2="%.2f" y2="%.2f" '
                 'stroke="black"/>' % (ax_x0, ax_y0, ax_x1, ax_y0))
    parts.append('<line x1="%.2f" y1="%.2f" x2="%.2f" y2="%.2f" '
                 'stroke="black"/>' % (ax_x0, ax_y0, ax_x0, ax_y1))
    parts.append('<text x="%.2f" y="%.2f" font-family="monospace" '
                 'font-size="12" text-anchor="middle">episode</text>'
                 % ((ax_x0 + ax_x1) / 2, HEIGHT - 8))
    parts.append('<text x="14" y="%.2f" font-family="monospace" font-size="12" '
                 'text-anchor="middle" transform="rotate(-90 14 %.2f)">'
                 'cumulative regret</text>'
                 % ((ax_y0 + ax_y1) / 2, (ax_y0 + ax_y1) / 2))

    for i, (cid, k, mean, se) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        if np.any(se > 0):
            upper = _path_points(k, mean + se, xlim, ylim)
            lower = _path_points(k[::-1], (mean - se)[::-1], xlim, ylim)
            parts.append('<polygon points="%s %s" fill="%s" fill-opacity="0.15" '
                         'stroke="none"/>' % (upper, lower, color))
        parts.append('<polyline points="%s" fill="none" stroke="%s" '
                     'stroke-width="1.5"/>'
                     % (_path_points(k, mean, xlim, ylim), color))
        ly = MARGIN_T + 14 + 16 * i
        parts.append('<line x1="%d" y1="%d" x2="%d" y2="%d" stroke="%s" '
                     'stroke-width="1.5"/>'
                     % (MARGIN_L + 8, ly - 4, MARGIN_L + 28, ly - 4, color))
        parts.append('<text x="%d" y="%d" font-family="monospace" '
                     'font-size="12">%s</text>'
                     % (MARGIN_L + 34, ly, _escape(cid)))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _escape(text):
    return (text.replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;"))
