"""SVG drawings of layouts: one grid cell per CLB, free columns shaded."""
from __future__ import annotations

from xml.sax.saxutils import escape

from .geometry import Layout, free_columns

CELL = 24
MARGIN = 4
_FILLS = ("#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5", "#d9d9d9", "#bc80bd")


def render_svg(layout: Layout, title: str | None = None) -> str:
    """SVG document for ``layout``; row 0 is drawn at the bottom."""
    W, H = layout.container.width, layout.container.height
    width, height = W * CELL + 2 * MARGIN, H * CELL + 2 * MARGIN

    def left(x: int) -> int:
        return MARGIN + x * CELL

    def top(y: int, h: int) -> int:
        return MARGIN + (H - y - h) * CELL

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">'
    ]
    if title:
        out.append(f"<title>{escape(title)}</title>")
    out.append(f'<rect class="device" x="{MARGIN}" y="{MARGIN}" width="{W * CELL}" height="{H * CELL}" fill="#ffffff"/>')
    for c in free_columns(layout)[1]:
        out.append(f'<rect class="free-column" x="{left(c)}" y="{MARGIN}" width="{CELL}" height="{H * CELL}" fill="#e8f4e8"/>')
    out.append('<g class="grid" stroke="#cccccc" stroke-width="1">')
    for x in range(W + 1):
        out.append(f'<line x1="{left(x)}" y1="{MARGIN}" x2="{left(x)}" y2="{MARGIN + H * CELL}"/>')
    for y in range(H + 1):
        out.append(f'<line x1="{MARGIN}" y1="{MARGIN + y * CELL}" x2="{MARGIN + W * CELL}" y2="{MARGIN + y * CELL}"/>')
    out.append("</g>")
    for k, (m, p) in enumerate(layout.placed()):
        x, y = left(p.x), top(p.y, m.height)
        w, h = m.width * CELL, m.height * CELL
        out.append(
            f'<rect class="module" data-id="{escape(m.id)}" x="{x}" y="{y}" width="{w}" height="{h}" '
            f'fill="{_FILLS[k % len(_FILLS)]}" stroke="#333333" stroke-width="2"/>'
        )
        out.append(
            f'<text x="{x + w // 2}" y="{y + h // 2}" text-anchor="middle" dominant-baseline="central" '
            f'font-family="sans-serif" font-size="11">{escape(m.id)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
