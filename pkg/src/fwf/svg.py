"""Minimal deterministic SVG emitters.

Hand-rolled rather than a plotting library so the output is
byte-stable across runs (no timestamps, font probing, or library
version strings) and structurally testable: a heatmap contains exactly
one ``<rect class="cell">`` per grid point, a line chart one
``<polyline class="series">`` per curve.
"""

from __future__ import annotations

import math

PANEL_W, PANEL_H = 560, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 110, 40, 50

_RAMP = [  # dark blue -> teal -> yellow, viridis-like anchor points
    (68, 1, 84), (59, 82, 139), (33, 145, 140), (94, 201, 98), (253, 231, 37)]

_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
            "#8c564b", "#17becf", "#7f7f7f"]


def _ramp_color(t: float) -> str:
    t = min(max(t, 0.0), 1.0)
    pos = t * (len(_RAMP) - 1)
    i = min(int(pos), len(_RAMP) - 2)
    f = pos - i
    rgb = [round(a + (b - a) * f) for a, b in zip(_RAMP[i], _RAMP[i + 1])]
    return "#%02x%02x%02x" % tuple(rgb)


def _esc(s: str) -> str:
    return str(s).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _text(x, y, s, size=11, anchor="middle"):
    return (f'<text x="{x:.1f}" y="{y:.1f}" font-family="monospace" '
            f'font-size="{size}" text-anchor="{anchor}">{_esc(s)}</text>')


def heatmap_svg(xs, ys, values, panels, title="", xlabel="", ylabel="") -> str:
    """Grid heatmaps, one panel per entry of ``panels``.

    xs, ys: sorted axis values. values: dict panel -> dict (x, y) -> value
    (missing or NaN cells are hatched grey). Color scale is shared and
    log10 when all finite values are positive.
    """
    finite = [v for p in panels for v in values[p].values()
              if v is not None and math.isfinite(v)]
    logscale = bool(finite) and min(finite) > 0
    if finite:
        tr = (lambda v: math.log10(v)) if logscale else (lambda v: v)
        lo = min(tr(v) for v in finite)
        hi = max(tr(v) for v in finite)
        span = (hi - lo) or 1.0
    total_w = MARGIN_L + PANEL_W + MARGIN_R
    total_h = MARGIN_T + len(panels) * (PANEL_H + MARGIN_B)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{total_w}" '
           f'height="{total_h}" viewBox="0 0 {total_w} {total_h}">',
           '<rect width="100%" height="100%" fill="white"/>']
    if title:
        out.append(_text(total_w / 2, 20, title, size=13))
    cw = PANEL_W / len(xs)
    ch = PANEL_H / len(ys)
    for pi, panel in enumerate(panels):
        oy = MARGIN_T + pi * (PANEL_H + MARGIN_B)
        out.append(_text(MARGIN_L + PANEL_W / 2, oy - 6, str(panel), size=12))
        for xi, xv in enumerate(xs):
            for yi, yv in enumerate(ys):
                v = values[panel].get((xv, yv))
                x0 = MARGIN_L + xi * cw
                y0 = oy + PANEL_H - (yi + 1) * ch
                if v is None or not math.isfinite(v):
                    fill = "#cccccc"
                else:
                    fill = _ramp_color((tr(v) - lo) / span)
                out.append(f'<rect class="cell" x="{x0:.1f}" y="{y0:.1f}" '
                           f'width="{cw:.1f}" height="{ch:.1f}" fill="{fill}">'
                           f'<title>{_esc(panel)} x={xv:g} y={yv:g} v={v}</title></rect>')
        for xi, xv in enumerate(xs):
            out.append(_text(MARGIN_L + (xi + 0.5) * cw, oy + PANEL_H + 14, f"{xv:g}", size=9))
        for yi, yv in enumerate(ys):
            out.append(_text(MARGIN_L - 8, oy + PANEL_H - (yi + 0.5) * ch + 3,
                             f"{yv:g}", size=9, anchor="end"))
        out.append(_text(MARGIN_L + PANEL_W / 2, oy + PANEL_H + 32, xlabel, size=11))
        out.append(_text(16, oy + PANEL_H / 2, ylabel, size=11, anchor="middle"))
        # colorbar
        for s in range(40):
            cy = oy + PANEL_H - (s + 1) * PANEL_H / 40
            out.append(f'<rect x="{MARGIN_L + PANEL_W + 20}" y="{cy:.1f}" width="14" '
                       f'height="{PANEL_H / 40 + 0.5:.1f}" fill="{_ramp_color(s / 39)}"/>')
        if finite:
            label = "log10" if logscale else "value"
            out.append(_text(MARGIN_L + PANEL_W + 27, oy + PANEL_H + 14,
                             f"{lo:.2f}..{hi:.2f} {label}", size=9))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def lines_svg(curves, title="", xlabel="", ylabel="", logx=False, logy=True) -> str:
    """Line chart; ``curves`` maps label -> list of (x, y) points."""
    pts = [(x, y) for c in curves.values() for x, y in c
           if math.isfinite(x) and math.isfinite(y)]
    if not pts:
        raise ValueError("no finite points to plot")
    fx = (lambda v: math.log10(v)) if logx else (lambda v: v)
    fy = (lambda v: math.log10(v)) if logy else (lambda v: v)
    xs = [fx(p[0]) for p in pts]
    ys = [fy(p[1]) for p in pts if not (logy and p[1] <= 0)]
    if not ys:
        raise ValueError("log-scale y axis needs positive values")
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    x_span = (x_hi - x_lo) or 1.0
    y_span = (y_hi - y_lo) or 1.0
    total_w = MARGIN_L + PANEL_W + MARGIN_R
    total_h = MARGIN_T + PANEL_H + MARGIN_B

    def px(x):
        return MARGIN_L + (fx(x) - x_lo) / x_span * PANEL_W

    def py(y):
        return MARGIN_T + PANEL_H - (fy(y) - y_lo) / y_span * PANEL_H

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{total_w}" '
           f'height="{total_h}" viewBox="0 0 {total_w} {total_h}">',
           '<rect width="100%" height="100%" fill="white"/>',
           f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{PANEL_W}" height="{PANEL_H}" '
           'fill="none" stroke="#222" stroke-width="1"/>']
    if title:
        out.append(_text(total_w / 2, 20, title, size=13))
    for ci, (label, pts_c) in enumerate(curves.items()):
        color = _PALETTE[ci % len(_PALETTE)]
        keep = [(x, y) for x, y in pts_c
                if math.isfinite(x) and math.isfinite(y) and not (logy and y <= 0)]
        if not keep:
            continue
        coords = " ".join(f"{px(x):.1f},{py(y):.1f}" for x, y in keep)
        out.append(f'<polyline class="series" fill="none" stroke="{color}" '
                   f'stroke-width="1.5" points="{coords}"/>')
        for x, y in keep:
            out.append(f'<circle cx="{px(x):.1f}" cy="{py(y):.1f}" r="2.5" fill="{color}"/>')
        ly = MARGIN_T + 14 + 14 * ci
        lx = MARGIN_L + PANEL_W + 8
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 16}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(_text(lx + 20, ly, label, size=9, anchor="start"))
    n_ticks = 5
    for t in range(n_ticks):
        xv = x_lo + t * x_span / (n_ticks - 1)
        yv = y_lo + t * y_span / (n_ticks - 1)
        xl = 10 ** xv if logx else xv
        yl = 10 ** yv if logy else yv
        gx = MARGIN_L + t * PANEL_W / (n_ticks - 1)
        gy = MARGIN_T + PANEL_H - t * PANEL_H / (n_ticks - 1)
        out.append(_text(gx, MARGIN_T + PANEL_H + 14, f"{xl:.4g}", size=9))
        out.append(_text(MARGIN_L - 6, gy + 3, f"{yl:.4g}", size=9, anchor="end"))
    out.append(_text(MARGIN_L + PANEL_W / 2, MARGIN_T + PANEL_H + 32, xlabel, size=11))
    out.append(_text(16, MARGIN_T + PANEL_H / 2, ylabel, size=11))
    out.append("</svg>")
    return "\n".join(out) + "\n"
