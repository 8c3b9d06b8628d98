"""Deterministic SVG box-and-whisker rendering (no timestamps, no randomness)."""

from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape

from .analysis import AnalysisError, BoxStats

MARGIN_LEFT = 70.0
MARGIN_RIGHT = 20.0
MARGIN_TOP = 40.0
MARGIN_BOTTOM = 50.0
SLOT_WIDTH = 80.0
PLOT_HEIGHT = 300.0
BOX_WIDTH = 40.0


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def render_boxplot_svg(
    stats: Sequence[BoxStats],
    title: str,
    x_label: str = "",
    y_label: str = "test perplexity",
) -> str:
    """One box glyph per group on a linear perplexity axis; byte-stable output."""
    if not stats:
        raise AnalysisError("no groups to plot")
    width = MARGIN_LEFT + MARGIN_RIGHT + SLOT_WIDTH * len(stats)
    height = MARGIN_TOP + MARGIN_BOTTOM + PLOT_HEIGHT

    lo = min(min(s.min, s.whisker_lo) for s in stats)
    hi = max(max(s.max, s.whisker_hi) for s in stats)
    if hi == lo:
        hi = lo + 1.0
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad

    def y(v: float) -> float:
        return MARGIN_TOP + PLOT_HEIGHT * (hi - v) / (hi - lo)

    parts: list[str] = []
    parts.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_fmt(width)}" height="{_fmt(height)}" '
        f'viewBox="0 0 {_fmt(width)} {_fmt(height)}">'
    )
    parts.append(
        f'<text x="{_fmt(width / 2)}" y="22" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{escape(title)}</text>'
    )
    # axes
    x0, x1 = MARGIN_LEFT, width - MARGIN_RIGHT
    y0, y1 = MARGIN_TOP, MARGIN_TOP + PLOT_HEIGHT
    parts.append(f'<line x1="{_fmt(x0)}" y1="{_fmt(y0)}" x2="{_fmt(x0)}" y2="{_fmt(y1)}" stroke="black"/>')
    parts.append(f'<line x1="{_fmt(x0)}" y1="{_fmt(y1)}" x2="{_fmt(x1)}" y2="{_fmt(y1)}" stroke="black"/>')
    # y tick labels: 5 evenly spaced values
    for i in range(5):
        v = lo + (hi - lo) * i / 4
        parts.append(
            f'<text x="{_fmt(x0 - 6)}" y="{_fmt(y(v) + 4)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{v:.4g}</text>'
        )
    if y_label:
        cy = MARGIN_TOP + PLOT_HEIGHT / 2
        parts.append(
            f'<text x="16" y="{_fmt(cy)}" text-anchor="middle" font-family="sans-serif" '
            f'font-size="12" transform="rotate(-90 16 {_fmt(cy)})">{escape(y_label)}</text>'
        )
    if x_label:
        parts.append(
            f'<text x="{_fmt((x0 + x1) / 2)}" y="{_fmt(height - 12)}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12">{escape(x_label)}</text>'
        )

    for i, s in enumerate(stats):
        cx = MARGIN_LEFT + SLOT_WIDTH * (i + 0.5)
        bx = cx - BOX_WIDTH / 2
        glyph = [f'<g class="box">']
        # whiskers and caps
        glyph.append(
            f'<line x1="{_fmt(cx)}" y1="{_fmt(y(s.whisker_hi))}" x2="{_fmt(cx)}" '
            f'y2="{_fmt(y(s.q3))}" stroke="black"/>'
        )
        glyph.append(
            f'<line x1="{_fmt(cx)}" y1="{_fmt(y(s.q1))}" x2="{_fmt(cx)}" '
            f'y2="{_fmt(y(s.whisker_lo))}" stroke="black"/>'
        )
        for wv in (s.whisker_hi, s.whisker_lo):
            glyph.append(
                f'<line x1="{_fmt(cx - BOX_WIDTH / 4)}" y1="{_fmt(y(wv))}" '
                f'x2="{_fmt(cx + BOX_WIDTH / 4)}" y2="{_fmt(y(wv))}" stroke="black"/>'
            )
        # box and median
        glyph.append(
            f'<rect x="{_fmt(bx)}" y="{_fmt(y(s.q3))}" width="{_fmt(BOX_WIDTH)}" '
            f'height="{_fmt(max(y(s.q1) - y(s.q3), 0.0))}" fill="none" stroke="black"/>'
        )
        glyph.append(
            f'<line x1="{_fmt(bx)}" y1="{_fmt(y(s.median))}" x2="{_fmt(bx + BOX_WIDTH)}" '
            f'y2="{_fmt(y(s.median))}" stroke="black" stroke-width="2"/>'
        )
        for o in s.outliers:
            glyph.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(y(o))}" r="2.5" fill="black"/>')
        glyph.append("</g>")
        parts.append("".join(glyph))
        parts.append(
            f'<text x="{_fmt(cx)}" y="{_fmt(y1 + 16)}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{escape(str(s.value))}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
