"""Tiny standalone SVG plotter: line plots and heatmaps, no dependencies.

CSV files remain the canonical data; these plots exist so a run directory is
inspectable at a glance. Output is deterministic for identical inputs.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = ["line_plot", "heatmap"]

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

# Anchor colors of a perceptually ordered blue->green->yellow ramp.
_RAMP = (
    (0.267, 0.005, 0.329),
    (0.283, 0.141, 0.458),
    (0.254, 0.265, 0.530),
    (0.207, 0.372, 0.553),
    (0.164, 0.471, 0.558),
    (0.128, 0.567, 0.551),
    (0.135, 0.659, 0.518),
    (0.267, 0.749, 0.441),
    (0.478, 0.821, 0.318),
    (0.741, 0.873, 0.150),
    (0.993, 0.906, 0.144),
)


def _fmt(x: float) -> str:
    return f"{x:.2f}".rstrip("0").rstrip(".")


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if not math.isfinite(lo) or not math.isfinite(hi):
        return []
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        step = mult * mag
        if step >= raw:
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-12 * abs(hi):
        ticks.append(round(t, 12))
        t += step
    return ticks


def _tick_label(t: float) -> str:
    if t == 0:
        return "0"
    if abs(t) >= 1e4 or abs(t) < 1e-3:
        return f"{t:.1e}"
    return f"{t:.6g}"


def _ramp_color(u: float) -> str:
    u = min(max(u, 0.0), 1.0)
    pos = u * (len(_RAMP) - 1)
    i = min(int(pos), len(_RAMP) - 2)
    f = pos - i
    rgb = [(_RAMP[i][k] * (1 - f) + _RAMP[i + 1][k] * f) for k in range(3)]
    return "#" + "".join(f"{int(round(255 * c)):02x}" for c in rgb)


def _svg_header(width: int, height: int, title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="Helvetica, Arial, sans-serif">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2}" y="20" text-anchor="middle" font-size="14" '
        f'font-weight="bold">{title}</text>',
    ]


def line_plot(
    path: str | Path,
    series: Sequence[tuple[str, np.ndarray, np.ndarray]],
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    logy: bool = False,
    size: tuple[int, int] = (720, 460),
) -> Path:
    """Write a multi-series line plot. `series` is (label, x, y) triples.

    With logy=True, non-positive y values are dropped from the plot.
    """
    width, height = size
    ml, mr, mt, mb = 72, 20, 36, 52
    pw, ph = width - ml - mr, height - mt - mb

    clean = []
    for label, x, y in series:
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        keep = np.isfinite(x) & np.isfinite(y)
        if logy:
            keep &= y > 0
        clean.append((label, x[keep], np.log10(y[keep]) if logy else y[keep]))

    xs = np.concatenate([x for _, x, _ in clean if x.size] or [np.array([0.0, 1.0])])
    ys = np.concatenate([y for _, _, y in clean if y.size] or [np.array([0.0, 1.0])])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.04 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def px(v):
        return ml + (v - x0) / (x1 - x0) * pw

    def py(v):
        return mt + ph - (v - y0) / (y1 - y0) * ph

    out = _svg_header(width, height, title)
    out.append(
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>'
    )
    for t in _nice_ticks(x0, x1):
        out.append(
            f'<line x1="{_fmt(px(t))}" y1="{mt + ph}" x2="{_fmt(px(t))}" y2="{mt + ph + 5}" stroke="#444"/>'
        )
        out.append(
            f'<text x="{_fmt(px(t))}" y="{mt + ph + 18}" text-anchor="middle" font-size="11">'
            f"{_tick_label(t)}</text>"
        )
    for t in _nice_ticks(y0, y1):
        label = _tick_label(10**t if logy else t) if not logy else f"1e{_tick_label(t)}"
        out.append(
            f'<line x1="{ml - 5}" y1="{_fmt(py(t))}" x2="{ml}" y2="{_fmt(py(t))}" stroke="#444"/>'
        )
        out.append(
            f'<text x="{ml - 8}" y="{_fmt(py(t) + 4)}" text-anchor="end" font-size="11">{label}</text>'
        )
        out.append(
            f'<line x1="{ml}" y1="{_fmt(py(t))}" x2="{ml + pw}" y2="{_fmt(py(t))}" '
            f'stroke="#ddd" stroke-width="0.5"/>'
        )
    for i, (label, x, y) in enumerate(clean):
        if not x.size:
            continue
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(x, y))
        out.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        ly = mt + 16 + 16 * i
        out.append(f'<line x1="{ml + pw - 150}" y1="{ly - 4}" x2="{ml + pw - 126}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{ml + pw - 120}" y="{ly}" font-size="11">{label}</text>')
    if xlabel:
        out.append(
            f'<text x="{ml + pw / 2}" y="{height - 12}" text-anchor="middle" font-size="12">{xlabel}</text>'
        )
    if ylabel:
        out.append(
            f'<text x="18" y="{mt + ph / 2}" text-anchor="middle" font-size="12" '
            f'transform="rotate(-90 18 {mt + ph / 2})">{ylabel}</text>'
        )
    out.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(out) + "\n")
    return path


def heatmap(
    path: str | Path,
    values: np.ndarray,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    x_ticks: Sequence[tuple[float, str]] | None = None,
    y_ticks: Sequence[tuple[float, str]] | None = None,
    vmin: float | None = None,
    vmax: float | None = None,
    cell_labels: bool = False,
    size: tuple[int, int] = (760, 420),
) -> Path:
    """Write a heatmap of a 2D array; row 0 is drawn at the top.

    `x_ticks`/`y_ticks` are (fractional position in [0,1], label) pairs.
    Non-finite cells are drawn gray. With cell_labels=True each cell prints its
    value (meant for small tables like sweep grids).
    """
    z = np.asarray(values, dtype=np.float64)
    if z.ndim != 2:
        raise ValueError(f"heatmap expects a 2D array, got shape {z.shape}")
    width, height = size
    ml, mr, mt, mb = 72, 86, 36, 52
    pw, ph = width - ml - mr, height - mt - mb
    nz, nx = z.shape

    finite = z[np.isfinite(z)]
    lo = vmin if vmin is not None else (float(finite.min()) if finite.size else 0.0)
    hi = vmax if vmax is not None else (float(finite.max()) if finite.size else 1.0)
    span = hi - lo if hi > lo else 1.0

    out = _svg_header(width, height, title)
    cw, ch = pw / nx, ph / nz
    for i in range(nz):
        for j in range(nx):
            v = z[i, j]
            color = "#bbbbbb" if not np.isfinite(v) else _ramp_color((v - lo) / span)
            x = ml + j * cw
            y = mt + i * ch
            out.append(
                f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(cw + 0.5)}" '
                f'height="{_fmt(ch + 0.5)}" fill="{color}"/>'
            )
            if cell_labels:
                text = "n/a" if not np.isfinite(v) else f"{v:.4g}"
                out.append(
                    f'<text x="{_fmt(x + cw / 2)}" y="{_fmt(y + ch / 2 + 4)}" '
                    f'text-anchor="middle" font-size="11" fill="white">{text}</text>'
                )
    out.append(f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>')

    for frac, label in x_ticks or []:
        x = ml + frac * pw
        out.append(f'<line x1="{_fmt(x)}" y1="{mt + ph}" x2="{_fmt(x)}" y2="{mt + ph + 5}" stroke="#444"/>')
        out.append(f'<text x="{_fmt(x)}" y="{mt + ph + 18}" text-anchor="middle" font-size="11">{label}</text>')
    for frac, label in y_ticks or []:
        y = mt + frac * ph
        out.append(f'<line x1="{ml - 5}" y1="{_fmt(y)}" x2="{ml}" y2="{_fmt(y)}" stroke="#444"/>')
        out.append(f'<text x="{ml - 8}" y="{_fmt(y + 4)}" text-anchor="end" font-size="11">{label}</text>')
    if xlabel:
        out.append(f'<text x="{ml + pw / 2}" y="{height - 12}" text-anchor="middle" font-size="12">{xlabel}</text>')
    if ylabel:
        out.append(
            f'<text x="18" y="{mt + ph / 2}" text-anchor="middle" font-size="12" '
            f'transform="rotate(-90 18 {mt + ph / 2})">{ylabel}</text>'
        )

    # color bar
    bx = ml + pw + 18
    nseg = 24
    for s in range(nseg):
        u = 1.0 - (s + 0.5) / nseg
        out.append(
            f'<rect x="{bx}" y="{_fmt(mt + s * ph / nseg)}" width="14" '
            f'height="{_fmt(ph / nseg + 0.5)}" fill="{_ramp_color(u)}"/>'
        )
    out.append(f'<rect x="{bx}" y="{mt}" width="14" height="{ph}" fill="none" stroke="#444"/>')
    out.append(f'<text x="{bx + 18}" y="{mt + 8}" font-size="10">{hi:.4g}</text>')
    out.append(f'<text x="{bx + 18}" y="{mt + ph}" font-size="10">{lo:.4g}</text>')
    out.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(out) + "\n")
    return path
