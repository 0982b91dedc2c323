"""Core-map rendering: ASCII for terminals, SVG for figures.

Output bytes are a pure function of (layout, style).
"""

from __future__ import annotations

from ..lattice import N_SIDE, LatticeLayout, gd_count, serialize

_LEGEND = (
    "legend: f = fuel pin, g = Gd-bearing pin, c = guide tube",
)

_SVG_FILL = {0: "#f5efdc", 1: "#31343a", 2: "#7fb8d9"}
_CELL_PX = 20


def render_ascii(layout: LatticeLayout) -> str:
    lines = [serialize(layout).rstrip("\n")]
    lines.extend(_LEGEND)
    lines.append(f"gd inventory: {gd_count(layout)}")
    return "\n".join(lines) + "\n"


def render_svg(layout: LatticeLayout) -> str:
    size = N_SIDE * _CELL_PX
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect x="0" y="0" width="{size}" height="{size}" fill="#ffffff"/>',
    ]
    for r in range(N_SIDE):
        for c in range(N_SIDE):
            fill = _SVG_FILL[int(layout.grid[r, c])]
            parts.append(
                f'<rect x="{c * _CELL_PX}" y="{r * _CELL_PX}" '
                f'width="{_CELL_PX}" height="{_CELL_PX}" '
                f'fill="{fill}" stroke="#999999" stroke-width="1"/>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_map(layout: LatticeLayout, style: str) -> str:
    if style == "ascii":
        return render_ascii(layout)
    if style == "svg":
        return render_svg(layout)
    raise ValueError(f"style must be ascii or svg, got {style!r}")
