"""Minimal hand-emitted SVG plots (no plotting dependency).

CSV files are the canonical outputs everywhere in the package; these
plots are a convenience rendering of the same numbers.  Two layouts
are provided: a line plot with optional shaded uncertainty bands (for
regret and trade-off curves) and a unit-square region plot showing a
decision boundary with its margin cells (for the geometry rasters).
Output is a deterministic function of the inputs: no timestamps, no
randomness, stable float formatting.
"""

from __future__ import annotations

import math
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .errors import ValidationError

__all__ = ["line_plot_svg", "region_plot_svg", "write_svg"]

_PALETTE = ("#2563eb", "#dc2626", "#059669", "#7c3aed", "#d97706", "#0891b2")

_MARGIN_LEFT = 62
_MARGIN_RIGHT = 18
_MARGIN_TOP = 36
_MARGIN_BOTTOM = 48


def _fmt(value: float) -> str:
    text = f"{value:.6g}"
    return "0" if text == "-0" else text


def _nice_ticks(low: float, high: float, target: int = 5) -> list[float]:
    if not (math.isfinite(low) and math.isfinite(high)):
        raise ValidationError("axis range must be finite")
    if high <= low:
        return [low]
    raw = (high - low) / target
    magnitude = 10.0 ** math.floor(math.log10(raw))
    step = next(m * magnitude for m in (1.0, 2.0, 2.5, 5.0, 10.0) if raw <= m * magnitude)
    first = math.ceil(low / step - 1e-9) * step
    ticks = []
    value = first
    while value <= high + 1e-9 * step:
        ticks.append(0.0 if abs(value) < 1e-12 * step else value)
        value += step
    return ticks


class _Frame:
    """Maps data coordinates onto the pixel plot area."""

    def __init__(self, width, height, x_range, y_range, x_log):
        self.width = width
        self.height = height
        self.x_log = x_log
        self.plot_w = width - _MARGIN_LEFT - _MARGIN_RIGHT
        self.plot_h = height - _MARGIN_TOP - _MARGIN_BOTTOM
        x0, x1 = x_range
        if x_log:
            if x0 <= 0:
                raise ValidationError("log-scale x values must be positive")
            x0, x1 = math.log10(x0), math.log10(x1)
        self.x0, self.x1 = x0, (x1 if x1 > x0 else x0 + 1.0)
        y0, y1 = y_range
        if y1 <= y0:
            pad = max(abs(y0), 1.0) * 0.1
            y0, y1 = y0 - pad, y0 + pad
        self.y0, self.y1 = y0, y1

    def x(self, value: float) -> float:
        v = math.log10(value) if self.x_log else value
        return _MARGIN_LEFT + (v - self.x0) / (self.x1 - self.x0) * self.plot_w

    def y(self, value: float) -> float:
        return _MARGIN_TOP + (self.y1 - value) / (self.y1 - self.y0) * self.plot_h


def _axes(frame: _Frame, title: str, x_label: str, y_label: str, x_ticks, y_ticks) -> list[str]:
    left, top = _MARGIN_LEFT, _MARGIN_TOP
    right = left + frame.plot_w
    bottom = top + frame.plot_h
    parts = [
        f'<rect x="{left}" y="{top}" width="{frame.plot_w}" height="{frame.plot_h}" '
        'fill="none" stroke="#444" stroke-width="1"/>',
        f'<text x="{frame.width / 2:.1f}" y="20" text-anchor="middle" '
        f'font-size="14" fill="#111">{escape(title)}</text>',
        f'<text x="{(left + right) / 2:.1f}" y="{frame.height - 10}" text-anchor="middle" '
        f'font-size="12" fill="#111">{escape(x_label)}</text>',
        f'<text x="16" y="{(top + bottom) / 2:.1f}" text-anchor="middle" font-size="12" '
        f'fill="#111" transform="rotate(-90 16 {(top + bottom) / 2:.1f})">{escape(y_label)}</text>',
    ]
    for tick in x_ticks:
        px = frame.x(tick)
        if px < left - 0.5 or px > right + 0.5:
            continue
        parts.append(
            f'<line x1="{px:.1f}" y1="{bottom}" x2="{px:.1f}" y2="{bottom + 4}" stroke="#444"/>'
        )
        parts.append(
            f'<text x="{px:.1f}" y="{bottom + 16}" text-anchor="middle" font-size="10" '
            f'fill="#333">{_fmt(tick)}</text>'
        )
    for tick in y_ticks:
        py = frame.y(tick)
        if py < top - 0.5 or py > bottom + 0.5:
            continue
        parts.append(f'<line x1="{left - 4}" y1="{py:.1f}" x2="{left}" y2="{py:.1f}" stroke="#444"/>')
        parts.append(
            f'<text x="{left - 7}" y="{py + 3:.1f}" text-anchor="end" font-size="10" '
            f'fill="#333">{_fmt(tick)}</text>'
        )
    return parts


def line_plot_svg(
    series: list[tuple[str, np.ndarray, np.ndarray]],
    *,
    title: str,
    x_label: str,
    y_label: str,
    bands: list[tuple[np.ndarray, np.ndarray, np.ndarray]] | None = None,
    width: int = 640,
    height: int = 420,
    x_log: bool = False,
) -> str:
    """Render line series (plus optional shaded bands) as an SVG string.

    ``series`` holds (name, x, y) triples; ``bands`` holds (x, lower,
    upper) triples shaded in the matching series color.
    """

    if not series:
        raise ValidationError("at least one series is required")
    cleaned = []
    for name, x, y in series:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.shape != y.shape or x.ndim != 1 or x.size == 0:
            raise ValidationError(f"series {name!r} must have matching nonempty x and y")
        cleaned.append((str(name), x, y))
    bands = bands or []
    xs = np.concatenate([x for _, x, _ in cleaned] + [np.asarray(b[0], float) for b in bands])
    ys = np.concatenate(
        [y for _, _, y in cleaned]
        + [np.asarray(b[1], float) for b in bands]
        + [np.asarray(b[2], float) for b in bands]
    )
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise ValidationError("plot data must be finite")
    frame = _Frame(width, height, (xs.min(), xs.max()), (ys.min(), ys.max()), x_log)
    if x_log:
        lo_exp = math.floor(math.log10(xs.min()))
        hi_exp = math.ceil(math.log10(xs.max()))
        x_ticks = [10.0**e for e in range(int(lo_exp), int(hi_exp) + 1)]
    else:
        x_ticks = _nice_ticks(float(xs.min()), float(xs.max()))
    y_ticks = _nice_ticks(frame.y0, frame.y1)

    parts = [f'<rect width="{width}" height="{height}" fill="#ffffff"/>']
    parts.extend(_axes(frame, title, x_label, y_label, x_ticks, y_ticks))
    for index, (x, lower, upper) in enumerate(bands):
        x = np.asarray(x, dtype=float)
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        color = _PALETTE[index % len(_PALETTE)]
        forward = [f"{frame.x(a):.1f},{frame.y(b):.1f}" for a, b in zip(x, upper)]
        backward = [f"{frame.x(a):.1f},{frame.y(b):.1f}" for a, b in zip(x[::-1], lower[::-1])]
        parts.append(
            f'<polygon points="{" ".join(forward + backward)}" fill="{color}" '
            'fill-opacity="0.22" stroke="none"/>'
        )
    legend_y = _MARGIN_TOP + 14
    for index, (name, x, y) in enumerate(cleaned):
        color = _PALETTE[index % len(_PALETTE)]
        points = " ".join(f"{frame.x(a):.1f},{frame.y(b):.1f}" for a, b in zip(x, y))
        parts.append(
            f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="1.8"/>'
        )
        if len(cleaned) > 1 or name:
            swatch_x = width - _MARGIN_RIGHT - 130
            parts.append(
                f'<line x1="{swatch_x}" y1="{legend_y - 4}" x2="{swatch_x + 18}" '
                f'y2="{legend_y - 4}" stroke="{color}" stroke-width="2"/>'
            )
            parts.append(
                f'<text x="{swatch_x + 24}" y="{legend_y}" font-size="11" '
                f'fill="#111">{escape(name)}</text>'
            )
            legend_y += 16
    body = "\n".join(parts)
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="Helvetica, Arial, sans-serif">\n'
        f"{body}\n</svg>\n"
    )


def region_plot_svg(
    grid_axis: np.ndarray,
    in_margin: np.ndarray,
    boundary_points: list[tuple[float, float]],
    *,
    title: str,
    annotation: str = "",
    size: int = 480,
) -> str:
    """Unit-square margin/boundary picture for a square-geometry raster.

    ``in_margin`` is an (n, n) boolean mask over ``grid_axis`` x
    ``grid_axis`` (first index = u); margin cells are shaded, the
    boundary polyline is drawn over them.
    """

    axis = np.asarray(grid_axis, dtype=float)
    mask = np.asarray(in_margin, dtype=bool)
    n = axis.size
    if mask.shape != (n, n) or n < 2:
        raise ValidationError("in_margin must be (n, n) over a grid axis of length n >= 2")
    pad_top = 36
    pad = 20
    plot = size - pad - pad
    cell = plot / (n - 1)

    def px(u: float) -> float:
        return pad + u * plot

    def py(v: float) -> float:
        return pad_top + (1.0 - v) * plot

    parts = [
        f'<rect width="{size}" height="{size + pad_top - pad}" fill="#ffffff"/>',
        f'<text x="{size / 2:.1f}" y="22" text-anchor="middle" font-size="13" '
        f'fill="#111">{escape(title)}</text>',
        f'<rect x="{pad}" y="{pad_top}" width="{plot:.1f}" height="{plot:.1f}" '
        'fill="#f8fafc" stroke="#444"/>',
    ]
    half = cell / 2.0
    for i in range(n):
        for j in range(n):
            if mask[i, j]:
                parts.append(
                    f'<rect x="{px(axis[i]) - half:.1f}" y="{py(axis[j]) - half:.1f}" '
                    f'width="{cell:.1f}" height="{cell:.1f}" fill="#cbd5e1"/>'
                )
    if boundary_points:
        points = " ".join(f"{px(u):.1f},{py(v):.1f}" for u, v in boundary_points)
        parts.append(
            f'<polyline points="{points}" fill="none" stroke="#2563eb" stroke-width="2"/>'
        )
    if annotation:
        parts.append(
            f'<text x="{pad + 6}" y="{pad_top + 16}" font-size="11" '
            f'fill="#334155">{escape(annotation)}</text>'
        )
    body = "\n".join(parts)
    height = size + pad_top - pad
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{height}" '
        f'viewBox="0 0 {size} {height}" font-family="Helvetica, Arial, sans-serif">\n'
        f"{body}\n</svg>\n"
    )


def write_svg(svg_text: str, path: str | Path) -> None:
    Path(path).write_text(svg_text, encoding="utf-8")
