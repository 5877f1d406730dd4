"""Self-contained SVG line plots with one-standard-deviation bands.

No plotting dependency: the file is assembled from a handful of SVG
primitives, and identical inputs produce identical bytes.
"""

from __future__ import annotations

from pathlib import Path

from .errors import ParameterError

_WIDTH, _HEIGHT = 640, 440
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 70, 20, 30, 50
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _ticks(lo: float, hi: float, count: int = 5) -> list:
    if hi == lo:
        return [lo]
    span = hi - lo
    step = span / (count - 1)
    return [lo + i * step for i in range(count)]


def _fmt(value: float) -> str:
    return f"{value:.4g}"


def write_line_plot(path, series: dict, x_label: str = "x",
                    y_label: str = "metric", title: str = "") -> None:
    """Render one line per named series.

    ``series`` maps name -> (xs, means, stds); points must be sorted by x.
    For a single-point series only a marker is drawn (a band needs at least
    two points to interpolate between).
    """
    if not series:
        raise ParameterError("nothing to plot")
    all_x = [x for xs, _, _ in series.values() for x in xs]
    all_lo = [m - s for _, ms, ss in series.values() for m, s in zip(ms, ss)]
    all_hi = [m + s for _, ms, ss in series.values() for m, s in zip(ms, ss)]
    x_lo, x_hi = min(all_x), max(all_x)
    y_lo, y_hi = min(all_lo), max(all_hi)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 1.0, x_hi + 1.0
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    plot_w = _WIDTH - _MARGIN_L - _MARGIN_R
    plot_h = _HEIGHT - _MARGIN_T - _MARGIN_B

    def sx(x: float) -> float:
        return _MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y: float) -> float:
        return _MARGIN_T + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
    ]
    if title:
        parts.append(f'<text x="{_WIDTH / 2:.2f}" y="20" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="14">{title}</text>')
    # axes
    x0, y0 = _MARGIN_L, _MARGIN_T + plot_h
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x0 + plot_w}" y2="{y0}" stroke="black"/>')
    parts.append(f'<line x1="{x0}" y1="{_MARGIN_T}" x2="{x0}" y2="{y0}" stroke="black"/>')
    for tick in _ticks(x_lo, x_hi):
        tx = sx(tick)
        parts.append(f'<line x1="{tx:.2f}" y1="{y0}" x2="{tx:.2f}" y2="{y0 + 5}" stroke="black"/>')
        parts.append(f'<text x="{tx:.2f}" y="{y0 + 20}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="11">{_fmt(tick)}</text>')
    for tick in _ticks(y_lo, y_hi):
        ty = sy(tick)
        parts.append(f'<line x1="{x0 - 5}" y1="{ty:.2f}" x2="{x0}" y2="{ty:.2f}" stroke="black"/>')
        parts.append(f'<text x="{x0 - 8}" y="{ty + 4:.2f}" text-anchor="end" '
                     f'font-family="sans-serif" font-size="11">{_fmt(tick)}</text>')
    parts.append(f'<text x="{_MARGIN_L + plot_w / 2:.2f}" y="{_HEIGHT - 10}" '
                 f'text-anchor="middle" font-family="sans-serif" font-size="12">{x_label}</text>')
    parts.append(f'<text x="18" y="{_MARGIN_T + plot_h / 2:.2f}" text-anchor="middle" '
                 f'font-family="sans-serif" font-size="12" '
                 f'transform="rotate(-90 18 {_MARGIN_T + plot_h / 2:.2f})">{y_label}</text>')

    for i, (name, (xs, means, stds)) in enumerate(sorted(series.items())):
        color = _COLORS[i % len(_COLORS)]
        pts = [(sx(x), sy(m)) for x, m in zip(xs, means)]
        if len(xs) >= 2:
            upper = [(sx(x), sy(m + s)) for x, m, s in zip(xs, means, stds)]
            lower = [(sx(x), sy(m - s)) for x, m, s in zip(xs, means, stds)]
            band = " ".join(f"{px:.2f},{py:.2f}" for px, py in upper + lower[::-1])
            parts.append(f'<polygon points="{band}" fill="{color}" fill-opacity="0.2" '
                         f'stroke="none"/>')
            line = " ".join(f"{px:.2f},{py:.2f}" for px, py in pts)
            parts.append(f'<polyline points="{line}" fill="none" stroke="{color}" '
                         f'stroke-width="1.5"/>')
        for px, py in pts:
            parts.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="3" fill="{color}"/>')
        legend_y = _MARGIN_T + 12 + 16 * i
        parts.append(f'<rect x="{x0 + plot_w - 130}" y="{legend_y - 9}" width="10" height="10" '
                     f'fill="{color}"/>')
        parts.append(f'<text x="{x0 + plot_w - 115}" y="{legend_y}" '
                     f'font-family="sans-serif" font-size="12">{name}</text>')
    parts.append("</svg>")
    Path(path).write_bytes(("\n".join(parts) + "\n").encode("ascii"))
