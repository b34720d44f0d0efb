"""Hand-rolled deterministic SVG figures.

Every figure is a pure function of its numeric inputs: fixed canvas
geometry, fixed palette, fixed float formatting — identical inputs yield
byte-identical files.  Plots are views over numbers that always also
exist in a CSV; nothing here computes statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

PALETTE = {
    "kmeans": "#4269d0",
    "gmm": "#efb118",
    "tmm": "#3ca951",
    "leiden": "#ff585d",
}
_FALLBACK_COLORS = ("#4269d0", "#efb118", "#3ca951", "#ff585d", "#a463f2", "#97bbf5")

_PANEL_W = 420.0
_PANEL_H = 300.0
_ML, _MR, _MT, _MB = 62.0, 18.0, 34.0, 48.0


def _fnum(v: float) -> str:
    """Coordinate formatting: fixed 2 decimals keeps files deterministic."""
    return f"{v:.2f}"


def _flabel(v: float) -> str:
    """Tick/legend label formatting."""
    return f"{v:.4g}"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _nice_ticks(lo: float, hi: float, n: int = 5) -> List[float]:
    if not math.isfinite(lo) or not math.isfinite(hi):
        return [0.0, 1.0]
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(n, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    else:  # pragma: no cover - loop always breaks at 10.0
        step = 10.0 * mag
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 else t)
        t += step
    return ticks or [lo, hi]


@dataclass
class Series:
    label: str
    means: List[Optional[float]]  # aligned with the shared x values; None = gap
    sds: List[Optional[float]]
    color: str = ""


class _Panel:
    """One cartesian panel at a fixed offset inside the SVG canvas."""

    def __init__(self, ox: float, x_lo: float, x_hi: float, y_lo: float, y_hi: float):
        self.ox = ox
        self.x_lo, self.x_hi = x_lo, x_hi
        self.y_lo, self.y_hi = y_lo, y_hi
        self.elems: List[str] = []

    def px(self, x: float) -> float:
        w = _PANEL_W - _ML - _MR
        return self.ox + _ML + w * (x - self.x_lo) / (self.x_hi - self.x_lo)

    def py(self, y: float) -> float:
        h = _PANEL_H - _MT - _MB
        return _MT + h * (1.0 - (y - self.y_lo) / (self.y_hi - self.y_lo))

    def frame(self, title: str, xlabel: str, ylabel: str,
              x_ticks: Sequence[float], x_tick_labels: Sequence[str],
              y_ticks: Sequence[float]) -> None:
        left, right = self.ox + _ML, self.ox + _PANEL_W - _MR
        top, bottom = _MT, _PANEL_H - _MB
        e = self.elems
        e.append(
            f'<rect x="{_fnum(left)}" y="{_fnum(top)}" width="{_fnum(right - left)}" '
            f'height="{_fnum(bottom - top)}" fill="none" stroke="#888" stroke-width="1"/>'
        )
        e.append(
            f'<text x="{_fnum((left + right) / 2)}" y="{_fnum(top - 12)}" '
            f'text-anchor="middle" font-size="13" font-weight="bold">{_esc(title)}</text>'
        )
        for t, lab in zip(x_ticks, x_tick_labels):
            x = self.px(t)
            e.append(
                f'<line x1="{_fnum(x)}" y1="{_fnum(bottom)}" x2="{_fnum(x)}" '
                f'y2="{_fnum(bottom + 4)}" stroke="#888" stroke-width="1"/>'
            )
            e.append(
                f'<text x="{_fnum(x)}" y="{_fnum(bottom + 17)}" text-anchor="middle" '
                f'font-size="10">{_esc(lab)}</text>'
            )
        for t in y_ticks:
            y = self.py(t)
            e.append(
                f'<line x1="{_fnum(left - 4)}" y1="{_fnum(y)}" x2="{_fnum(left)}" '
                f'y2="{_fnum(y)}" stroke="#888" stroke-width="1"/>'
            )
            e.append(
                f'<line x1="{_fnum(left)}" y1="{_fnum(y)}" x2="{_fnum(right)}" '
                f'y2="{_fnum(y)}" stroke="#ddd" stroke-width="0.5"/>'
            )
            e.append(
                f'<text x="{_fnum(left - 7)}" y="{_fnum(y + 3.5)}" text-anchor="end" '
                f'font-size="10">{_flabel(t)}</text>'
            )
        e.append(
            f'<text x="{_fnum((left + right) / 2)}" y="{_fnum(bottom + 34)}" '
            f'text-anchor="middle" font-size="11">{_esc(xlabel)}</text>'
        )
        ylab_x, ylab_y = self.ox + 14, (top + bottom) / 2
        e.append(
            f'<text x="{_fnum(ylab_x)}" y="{_fnum(ylab_y)}" text-anchor="middle" '
            f'font-size="11" transform="rotate(-90 {_fnum(ylab_x)} {_fnum(ylab_y)})">'
            f"{_esc(ylabel)}</text>"
        )


def _svg_document(width: float, height: float, elems: List[str]) -> str:
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {_fnum(width)} {_fnum(height)}" '
        f'width="{_fnum(width)}" height="{_fnum(height)}" font-family="Helvetica,Arial,sans-serif">\n'
        f'<rect x="0" y="0" width="{_fnum(width)}" height="{_fnum(height)}" fill="#ffffff"/>\n'
    )
    return head + "\n".join(elems) + "\n</svg>\n"


def line_band_svg(
    title: str,
    xlabel: str,
    ylabel: str,
    xs: Sequence[float],
    series: Sequence[Series],
    log2_x: bool = True,
) -> str:
    """Mean lines with ±sd bands over a shared x grid (e.g. dimensionality)."""
    if not xs:
        raise ValueError("line_band_svg needs at least one x value")
    pos = [math.log2(x) for x in xs] if log2_x else [float(x) for x in xs]
    x_lo, x_hi = min(pos), max(pos)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5

    vals: List[float] = []
    for s in series:
        for m, sd in zip(s.means, s.sds):
            if m is not None:
                vals.append(m - (sd or 0.0))
                vals.append(m + (sd or 0.0))
    y_lo, y_hi = (min(vals), max(vals)) if vals else (0.0, 1.0)
    pad = 0.05 * (y_hi - y_lo) or 0.05
    y_lo, y_hi = y_lo - pad, y_hi + pad

    panel = _Panel(0.0, x_lo, x_hi, y_lo, y_hi)
    panel.frame(title, xlabel, ylabel, pos, [_flabel(x) for x in xs], _nice_ticks(y_lo, y_hi))

    for si, s in enumerate(series):
        color = s.color or PALETTE.get(s.label, _FALLBACK_COLORS[si % len(_FALLBACK_COLORS)])
        pts = [(panel.px(p), m, s.sds[i] or 0.0)
               for i, (p, m) in enumerate(zip(pos, s.means)) if m is not None]
        if not pts:
            continue
        upper = [f"{_fnum(x)},{_fnum(panel.py(m + sd))}" for x, m, sd in pts]
        lower = [f"{_fnum(x)},{_fnum(panel.py(m - sd))}" for x, m, sd in reversed(pts)]
        panel.elems.append(
            f'<polygon points="{" ".join(upper + lower)}" fill="{color}" fill-opacity="0.15" stroke="none"/>'
        )
        line = " ".join(f"{_fnum(x)},{_fnum(panel.py(m))}" for x, m, _ in pts)
        panel.elems.append(
            f'<polyline points="{line}" fill="none" stroke="{color}" stroke-width="1.8"/>'
        )
        for x, m, _ in pts:
            panel.elems.append(
                f'<circle cx="{_fnum(x)}" cy="{_fnum(panel.py(m))}" r="2.6" fill="{color}"/>'
            )
        ly = _MT + 14 + 14 * si
        lx = panel.ox + _PANEL_W - _MR - 104
        panel.elems.append(
            f'<line x1="{_fnum(lx)}" y1="{_fnum(ly - 3)}" x2="{_fnum(lx + 16)}" '
            f'y2="{_fnum(ly - 3)}" stroke="{color}" stroke-width="2"/>'
        )
        panel.elems.append(
            f'<text x="{_fnum(lx + 20)}" y="{_fnum(ly)}" font-size="10">{_esc(s.label)}</text>'
        )
    return _svg_document(_PANEL_W, _PANEL_H, panel.elems)


def density_svg(
    title: str,
    rho: Sequence[float],
    delta: Sequence[float],
    gamma: Sequence[float],
    top_indices: Sequence[int],
    r: float,
    percentile: float,
) -> str:
    """Two panels: the ρ–δ decision scatter (peak candidates highlighted)
    and the ranked γ bars for those candidates."""
    n = len(rho)
    top = set(int(i) for i in top_indices)

    x_hi = max(max(rho), 1e-12) * 1.05
    y_hi = max(max(delta), 1e-12) * 1.05
    left = _Panel(0.0, 0.0, x_hi, 0.0, y_hi)
    sub = f"radius {_flabel(r)} ({_flabel(percentile)}th pct)"
    left.frame(f"{title} — {sub}", "local density ρ", "distance to denser point δ",
               _nice_ticks(0.0, x_hi), [_flabel(t) for t in _nice_ticks(0.0, x_hi)],
               _nice_ticks(0.0, y_hi))
    for i in range(n):
        if i in top:
            continue
        left.elems.append(
            f'<circle cx="{_fnum(left.px(rho[i]))}" cy="{_fnum(left.py(delta[i]))}" '
            f'r="2" fill="#99a" fill-opacity="0.55"/>'
        )
    for i in sorted(top):
        left.elems.append(
            f'<circle cx="{_fnum(left.px(rho[i]))}" cy="{_fnum(left.py(delta[i]))}" '
            f'r="3.2" fill="#ff585d" stroke="#7a1f23" stroke-width="0.8"/>'
        )

    ranked = sorted(top, key=lambda i: (-gamma[i], i))
    m = len(ranked)
    g_hi = max((gamma[i] for i in ranked), default=1.0) * 1.05 or 1.0
    right = _Panel(_PANEL_W, 0.0, max(m, 1), 0.0, g_hi)
    bar_ticks = list(range(1, m + 1, max(1, m // 6 or 1)))
    right.frame("peak candidates by γ = ρ·δ", "rank", "γ",
                [t - 0.5 for t in bar_ticks], [str(t) for t in bar_ticks],
                _nice_ticks(0.0, g_hi))
    for pos, i in enumerate(ranked):
        x0 = right.px(pos + 0.12)
        x1 = right.px(pos + 0.88)
        y0 = right.py(gamma[i])
        y1 = right.py(0.0)
        right.elems.append(
            f'<rect x="{_fnum(x0)}" y="{_fnum(y0)}" width="{_fnum(x1 - x0)}" '
            f'height="{_fnum(y1 - y0)}" fill="#ff585d" fill-opacity="0.8"/>'
        )
    return _svg_document(2 * _PANEL_W, _PANEL_H, left.elems + right.elems)
