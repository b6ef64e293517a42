"""Minimal deterministic SVG charts.

Four chart kinds cover the toolkit's outputs: time series, empirical
CDFs, the normalized Morris mu*-sigma plane, and decision-grid
heatmaps. Everything is rendered by hand into plain SVG so identical
inputs always produce identical bytes.
"""

from __future__ import annotations

import math

import numpy as np


class ChartError(ValueError):
    """Missing columns or unusable chart data."""


WIDTH = 720.0
HEIGHT = 480.0
MARGIN_L = 72.0
MARGIN_R = 24.0
MARGIN_T = 36.0
MARGIN_B = 56.0

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#17becf", "#7f7f7f", "#bcbd22", "#e377c2")


def _fnum(x):
    """Pixel coordinate with stable formatting."""
    s = f"{x:.2f}"
    return "0.00" if s == "-0.00" else s


def _flabel(x):
    s = f"{x:.6g}"
    return "0" if s == "-0" else s


def _ticks(lo, hi, target=5):
    """Round tick positions covering [lo, hi]."""
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ChartError("cannot scale non-finite axis limits")
    if hi <= lo:
        pad = 1.0 if lo == 0.0 else abs(lo) * 0.5
        lo, hi = lo - pad, hi + pad
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        step = mult * mag
        if raw <= step:
            break
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = first
    while t <= hi + step * 1e-9:
        ticks.append(0.0 if abs(t) < step * 1e-9 else t)
        t += step
    return ticks


class _Frame:
    """Axis frame mapping data coordinates to pixels."""

    def __init__(self, x_lo, x_hi, y_lo, y_hi):
        if x_hi <= x_lo:
            pad = 1.0 if x_lo == 0.0 else abs(x_lo) * 0.05
            x_lo, x_hi = x_lo - pad, x_hi + pad
        if y_hi <= y_lo:
            pad = 1.0 if y_lo == 0.0 else abs(y_lo) * 0.05
            y_lo, y_hi = y_lo - pad, y_hi + pad
        self.x_lo, self.x_hi = x_lo, x_hi
        self.y_lo, self.y_hi = y_lo, y_hi

    def x(self, v):
        f = (v - self.x_lo) / (self.x_hi - self.x_lo)
        return MARGIN_L + f * (WIDTH - MARGIN_L - MARGIN_R)

    def y(self, v):
        f = (v - self.y_lo) / (self.y_hi - self.y_lo)
        return HEIGHT - MARGIN_B - f * (HEIGHT - MARGIN_T - MARGIN_B)


def _svg_open(title):
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0f}" '
        f'height="{HEIGHT:.0f}" viewBox="0 0 {WIDTH:.0f} {HEIGHT:.0f}" '
        f'font-family="Helvetica,Arial,sans-serif">',
        f'<rect width="{WIDTH:.0f}" height="{HEIGHT:.0f}" fill="#ffffff"/>',
    ]
    if title:
        parts.append(
            f'<text x="{WIDTH / 2:.0f}" y="22" font-size="14" '
            f'text-anchor="middle" fill="#222222">{_esc(title)}</text>')
    return parts


def _esc(s):
    return (str(s).replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;").replace('"', "&quot;"))


def _axes(parts, frame, x_label, y_label):
    x0, x1 = MARGIN_L, WIDTH - MARGIN_R
    y0, y1 = HEIGHT - MARGIN_B, MARGIN_T
    parts.append(f'<rect x="{_fnum(x0)}" y="{_fnum(y1)}" '
                 f'width="{_fnum(x1 - x0)}" height="{_fnum(y0 - y1)}" '
                 f'fill="none" stroke="#333333" stroke-width="1"/>')
    for t in _ticks(frame.x_lo, frame.x_hi):
        if t < frame.x_lo - 1e-12 or t > frame.x_hi + 1e-12:
            continue
        px = frame.x(t)
        parts.append(f'<line x1="{_fnum(px)}" y1="{_fnum(y0)}" '
                     f'x2="{_fnum(px)}" y2="{_fnum(y0 + 5)}" '
                     f'stroke="#333333" stroke-width="1"/>')
        parts.append(f'<text x="{_fnum(px)}" y="{_fnum(y0 + 18)}" '
                     f'font-size="11" text-anchor="middle" '
                     f'fill="#333333">{_flabel(t)}</text>')
    for t in _ticks(frame.y_lo, frame.y_hi):
        if t < frame.y_lo - 1e-12 or t > frame.y_hi + 1e-12:
            continue
        py = frame.y(t)
        parts.append(f'<line x1="{_fnum(x0 - 5)}" y1="{_fnum(py)}" '
                     f'x2="{_fnum(x0)}" y2="{_fnum(py)}" '
                     f'stroke="#333333" stroke-width="1"/>')
        parts.append(f'<text x="{_fnum(x0 - 8)}" y="{_fnum(py + 4)}" '
                     f'font-size="11" text-anchor="end" '
                     f'fill="#333333">{_flabel(t)}</text>')
    if x_label:
        parts.append(f'<text x="{_fnum((x0 + x1) / 2)}" '
                     f'y="{_fnum(HEIGHT - 14)}" font-size="12" '
                     f'text-anchor="middle" fill="#222222">'
                     f'{_esc(x_label)}</text>')
    if y_label:
        cx, cy = 18.0, (y0 + y1) / 2
        parts.append(f'<text x="{_fnum(cx)}" y="{_fnum(cy)}" '
                     f'font-size="12" text-anchor="middle" fill="#222222" '
                     f'transform="rotate(-90 {_fnum(cx)} {_fnum(cy)})">'
                     f'{_esc(y_label)}</text>')


def render_timeseries(x, series, x_label="t_d", y_label="", title=""):
    """Line chart: one polyline per named series.

    Parameters
    ----------
    x : array
    series : sequence of (name, array) pairs
    """
    x = np.asarray(x, dtype=float)
    series = [(str(n), np.asarray(v, dtype=float)) for n, v in series]
    if not series:
        raise ChartError("timeseries needs at least one column")
    for name, v in series:
        if v.shape != x.shape:
            raise ChartError(f"column {name!r} length does not match x")
    ys = np.concatenate([v for _, v in series])
    ys = ys[np.isfinite(ys)]
    if ys.size == 0:
        raise ChartError("timeseries has no finite values")
    frame = _Frame(float(x.min()), float(x.max()),
                   float(min(ys.min(), 0.0)), float(ys.max()))
    parts = _svg_open(title)
    _axes(parts, frame, x_label, y_label)
    for i, (name, v) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{_fnum(frame.x(a))},{_fnum(frame.y(b))}"
                       for a, b in zip(x, v) if math.isfinite(b))
        parts.append(f'<polyline points="{pts}" fill="none" '
                     f'stroke="{color}" stroke-width="1.5"/>')
        ly = MARGIN_T + 14 + 14 * i
        lx = WIDTH - MARGIN_R - 150
        parts.append(f'<line x1="{_fnum(lx)}" y1="{_fnum(ly - 4)}" '
                     f'x2="{_fnum(lx + 18)}" y2="{_fnum(ly - 4)}" '
                     f'stroke="{color}" stroke-width="1.5"/>')
        parts.append(f'<text x="{_fnum(lx + 24)}" y="{_fnum(ly)}" '
                     f'font-size="11" fill="#333333">{_esc(name)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_ecdf(values, column="", threshold=None, x_label=None,
                y_label="cumulative probability", title=""):
    """Step plot of the empirical CDF with an optional threshold line."""
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    if v.size == 0:
        raise ChartError("ecdf needs at least one finite value")
    v = np.sort(v)
    n = v.size
    lo, hi = float(v[0]), float(v[-1])
    if threshold is not None:
        lo, hi = min(lo, float(threshold)), max(hi, float(threshold))
    frame = _Frame(lo, hi, 0.0, 1.0)
    parts = _svg_open(title)
    _axes(parts, frame, x_label if x_label is not None else column, y_label)
    d = [f"M {_fnum(frame.x(v[0]))} {_fnum(frame.y(0.0))}"]
    for i in range(n):
        d.append(f"V {_fnum(frame.y((i + 1) / n))}")
        if i + 1 < n:
            d.append(f"H {_fnum(frame.x(v[i + 1]))}")
    parts.append(f'<path d="{" ".join(d)}" fill="none" stroke="#1f77b4" '
                 f'stroke-width="1.5"/>')
    if threshold is not None:
        px = frame.x(float(threshold))
        parts.append(f'<line x1="{_fnum(px)}" y1="{_fnum(frame.y(0.0))}" '
                     f'x2="{_fnum(px)}" y2="{_fnum(frame.y(1.0))}" '
                     f'stroke="#d62728" stroke-width="1.2" '
                     f'stroke-dasharray="6,4"/>')
        parts.append(f'<text x="{_fnum(px + 4)}" y="{_fnum(MARGIN_T + 14)}" '
                     f'font-size="11" fill="#d62728">threshold '
                     f'{_flabel(float(threshold))}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_morris_scatter(points, metric="", title=""):
    """Normalized mu*-sigma plane with sigma/mu* guide lines.

    The solid line has slope 1 and the dashed line slope 0.1 in data
    coordinates, separating non-monotonic from near-linear parameters.

    Parameters
    ----------
    points : sequence of (parameter, mu_star_norm, sigma_norm)
    """
    pts = [(str(p), float(m), float(s)) for p, m, s in points]
    if not pts:
        raise ChartError("morris_scatter needs at least one point")
    m_hi = max(max(m for _, m, _ in pts), 1.0) * 1.05
    s_hi = max(max(s for _, _, s in pts), 0.1) * 1.10
    frame = _Frame(0.0, m_hi, 0.0, s_hi)
    parts = _svg_open(title)
    _axes(parts, frame, f"normalized mu* ({metric})" if metric
          else "normalized mu*", "normalized sigma")
    for slope, dash in ((1.0, None), (0.1, "6,4")):
        x_end = min(m_hi, s_hi / slope)
        y_end = slope * x_end
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        parts.append(f'<line x1="{_fnum(frame.x(0.0))}" '
                     f'y1="{_fnum(frame.y(0.0))}" '
                     f'x2="{_fnum(frame.x(x_end))}" '
                     f'y2="{_fnum(frame.y(y_end))}" stroke="#888888" '
                     f'stroke-width="1"{extra}/>')
        parts.append(f'<text x="{_fnum(frame.x(x_end) + 2)}" '
                     f'y="{_fnum(frame.y(y_end) - 2)}" font-size="10" '
                     f'fill="#888888">sigma/mu*={_flabel(slope)}</text>')
    for name, m, s in pts:
        parts.append(f'<circle cx="{_fnum(frame.x(m))}" '
                     f'cy="{_fnum(frame.y(s))}" r="3.5" fill="#1f77b4" '
                     f'fill-opacity="0.8"/>')
        parts.append(f'<text x="{_fnum(frame.x(m) + 5)}" '
                     f'y="{_fnum(frame.y(s) + 3)}" font-size="9" '
                     f'fill="#555555">{_esc(name)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _heat_color(f):
    """Two-color linear ramp, light blue to dark blue."""
    lo = (0xf7, 0xfb, 0xff)
    hi = (0x08, 0x30, 0x6b)
    f = min(max(f, 0.0), 1.0)
    rgb = tuple(round(a + f * (b - a)) for a, b in zip(lo, hi))
    return f"#{rgb[0]:02x}{rgb[1]:02x}{rgb[2]:02x}"


def render_heatmap(x_values, y_values, grid, x_label="", y_label="",
                   metric="", title=""):
    """Grid cells colored by metric value; NaN cells are hatched gray."""
    x_values = np.asarray(x_values, dtype=float)
    y_values = np.asarray(y_values, dtype=float)
    grid = np.asarray(grid, dtype=float)
    if grid.shape != (len(y_values), len(x_values)):
        raise ChartError("heatmap grid shape does not match axes")
    finite = grid[np.isfinite(grid)]
    if finite.size == 0:
        raise ChartError("heatmap has no finite cells")
    g_lo, g_hi = float(finite.min()), float(finite.max())
    span = g_hi - g_lo if g_hi > g_lo else 1.0
    parts = _svg_open(title)
    x0, x1 = MARGIN_L, WIDTH - MARGIN_R - 70
    y0, y1 = HEIGHT - MARGIN_B, MARGIN_T
    cw = (x1 - x0) / len(x_values)
    ch = (y0 - y1) / len(y_values)
    for j in range(len(y_values)):
        for i in range(len(x_values)):
            v = grid[j, i]
            color = "#dddddd" if not math.isfinite(v) \
                else _heat_color((v - g_lo) / span)
            px = x0 + i * cw
            py = y0 - (j + 1) * ch
            parts.append(f'<rect x="{_fnum(px)}" y="{_fnum(py)}" '
                         f'width="{_fnum(cw)}" height="{_fnum(ch)}" '
                         f'fill="{color}" stroke="#ffffff" '
                         f'stroke-width="0.5"/>')
    parts.append(f'<rect x="{_fnum(x0)}" y="{_fnum(y1)}" '
                 f'width="{_fnum(x1 - x0)}" height="{_fnum(y0 - y1)}" '
                 f'fill="none" stroke="#333333" stroke-width="1"/>')
    for i, v in enumerate(x_values):
        px = x0 + (i + 0.5) * cw
        parts.append(f'<text x="{_fnum(px)}" y="{_fnum(y0 + 16)}" '
                     f'font-size="9" text-anchor="middle" fill="#333333" '
                     f'transform="rotate(45 {_fnum(px)} {_fnum(y0 + 16)})">'
                     f'{_flabel(v)}</text>')
    for j, v in enumerate(y_values):
        py = y0 - (j + 0.5) * ch
        parts.append(f'<text x="{_fnum(x0 - 6)}" y="{_fnum(py + 3)}" '
                     f'font-size="9" text-anchor="end" '
                     f'fill="#333333">{_flabel(v)}</text>')
    if x_label:
        parts.append(f'<text x="{_fnum((x0 + x1) / 2)}" '
                     f'y="{_fnum(HEIGHT - 10)}" font-size="12" '
                     f'text-anchor="middle" fill="#222222">'
                     f'{_esc(x_label)}</text>')
    if y_label:
        cx, cy = 18.0, (y0 + y1) / 2
        parts.append(f'<text x="{_fnum(cx)}" y="{_fnum(cy)}" '
                     f'font-size="12" text-anchor="middle" fill="#222222" '
                     f'transform="rotate(-90 {_fnum(cx)} {_fnum(cy)})">'
                     f'{_esc(y_label)}</text>')
    bar_x = x1 + 16
    bar_w = 14.0
    n_seg = 64
    seg_h = (y0 - y1) / n_seg
    for k in range(n_seg):
        f = (k + 0.5) / n_seg
        py = y0 - (k + 1) * seg_h
        parts.append(f'<rect x="{_fnum(bar_x)}" y="{_fnum(py)}" '
                     f'width="{_fnum(bar_w)}" height="{_fnum(seg_h + 0.5)}" '
                     f'fill="{_heat_color(f)}"/>')
    parts.append(f'<text x="{_fnum(bar_x + bar_w + 4)}" y="{_fnum(y0)}" '
                 f'font-size="10" fill="#333333">{_flabel(g_lo)}</text>')
    parts.append(f'<text x="{_fnum(bar_x + bar_w + 4)}" y="{_fnum(y1 + 8)}" '
                 f'font-size="10" fill="#333333">{_flabel(g_hi)}</text>')
    if metric:
        parts.append(f'<text x="{_fnum(bar_x)}" y="{_fnum(y1 - 6)}" '
                     f'font-size="11" fill="#222222">{_esc(metric)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
