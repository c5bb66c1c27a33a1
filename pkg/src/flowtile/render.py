"""Write-only SVG rendering of tiled sections."""

from __future__ import annotations

from .pipeline import TiledSection

ALPHA_COLOR = "#1f77b4"
BETA_COLOR = "#d62728"
GAP_COLOR = "#bbbbbb"


def section_svg(t: TiledSection, width: int = 1200, height: int = 120) -> str:
    """One horizontal strip: alpha gaps blue, beta gaps red, untiled grey.

    Rank annotations are drawn under the strip at block starts.
    """
    x0 = float(t.positions[0])
    x1 = float(t.positions[-1])
    span = max(x1 - x0, 1e-9)
    pad = 10

    def sx(v: float) -> float:
        return pad + (v - x0) / span * (width - 2 * pad)

    y = height // 2
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
             f'height="{height}" viewBox="0 0 {width} {height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>']
    for i, ch in enumerate(t.letters):
        a = sx(float(t.positions[i]))
        b = sx(float(t.positions[i + 1]))
        color = {"a": ALPHA_COLOR, "b": BETA_COLOR, None: GAP_COLOR}[ch]
        parts.append(f'<line x1="{a:.2f}" y1="{y}" x2="{b:.2f}" y2="{y}" '
                     f'stroke="{color}" stroke-width="6"/>')
    for i, j in t.regular_runs():
        if j > i:
            a = sx(float(t.positions[i]))
            parts.append(f'<text x="{a:.2f}" y="{y + 24}" font-size="10" '
                         f'fill="#444">r{max(t.ranks[i:j + 1])}</text>')
    for p in t.positions:
        a = sx(float(p))
        parts.append(f'<line x1="{a:.2f}" y1="{y - 5}" x2="{a:.2f}" '
                     f'y2="{y + 5}" stroke="#333" stroke-width="0.6"/>')
    parts.append(f'<text x="{pad}" y="16" font-size="11" fill="#333">'
                 f'{len(t.positions)} points; alpha {ALPHA_COLOR}, beta '
                 f'{BETA_COLOR}</text>')
    parts.append("</svg>")
    return "\n".join(parts)
