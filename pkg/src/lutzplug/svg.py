"""Tiny deterministic SVG writer.

World coordinates go in (y up); the canvas flips and scales them into pixel
space.  All numbers are formatted "%.6g", so identical scenes render to
byte-identical files.
"""

from __future__ import annotations

import math
from pathlib import Path


def _fmt(value: float) -> str:
    out = format(float(value), ".6g")
    return "0" if out == "-0" else out


class SvgCanvas:
    """Fixed-viewport canvas mapping a world box onto a pixel box."""

    def __init__(
        self,
        world: tuple[float, float, float, float],
        width: int = 640,
        height: int | None = None,
        pad: int = 20,
        background: str = "#ffffff",
    ):
        x0, y0, x1, y1 = world
        if not (x1 > x0 and y1 > y0):
            raise ValueError("degenerate world box")
        self.world = (x0, y0, x1, y1)
        inner_w = width - 2 * pad
        if height is None:
            inner_h = inner_w * (y1 - y0) / (x1 - x0)
            height = int(math.ceil(inner_h + 2 * pad))
        else:
            inner_h = height - 2 * pad
        self.width, self.height, self.pad = width, height, pad
        self._sx = inner_w / (x1 - x0)
        self._sy = inner_h / (y1 - y0)
        self._elements: list[str] = [
            f'<rect x="0" y="0" width="{width}" height="{height}" '
            f'fill="{background}"/>'
        ]

    # -- coordinate mapping ---------------------------------------------------

    def _map(self, pt) -> tuple[float, float]:
        x0, y0, _, y1 = self.world
        px = self.pad + (pt[0] - x0) * self._sx
        py = self.pad + (y1 - pt[1]) * self._sy
        return px, py

    def _style(self, stroke, stroke_width, fill, opacity, dash) -> str:
        parts = [f'stroke="{stroke}"', f'stroke-width="{_fmt(stroke_width)}"',
                 f'fill="{fill}"']
        if opacity is not None:
            parts.append(f'opacity="{_fmt(opacity)}"')
        if dash is not None:
            parts.append(f'stroke-dasharray="{dash}"')
        return " ".join(parts)

    # -- primitives -------------------------------------------------------------

    def polyline(
        self,
        points,
        stroke: str = "#1a1a1a",
        stroke_width: float = 1.2,
        fill: str = "none",
        opacity: float | None = None,
        dash: str | None = None,
        closed: bool = False,
    ) -> None:
        mapped = [self._map(p) for p in points]
        if len(mapped) < 2:
            return
        coords = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in mapped)
        tag = "polygon" if closed else "polyline"
        style = self._style(stroke, stroke_width, fill, opacity, dash)
        self._elements.append(f'<{tag} points="{coords}" {style}/>')

    def line(self, a, b, **kw) -> None:
        self.polyline([a, b], **kw)

    def circle(
        self,
        center,
        radius: float,
        stroke: str = "#1a1a1a",
        stroke_width: float = 1.2,
        fill: str = "none",
        opacity: float | None = None,
        dash: str | None = None,
    ) -> None:
        cx, cy = self._map(center)
        style = self._style(stroke, stroke_width, fill, opacity, dash)
        self._elements.append(
            f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" '
            f'r="{_fmt(radius * self._sx)}" {style}/>'
        )

    def dot(self, center, radius_px: float = 3.0, fill: str = "#1a1a1a") -> None:
        cx, cy = self._map(center)
        self._elements.append(
            f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(radius_px)}" '
            f'stroke="none" fill="{fill}"/>'
        )

    def text(
        self,
        pos,
        content: str,
        size: int = 13,
        anchor: str = "middle",
        fill: str = "#1a1a1a",
    ) -> None:
        x, y = self._map(pos)
        self._elements.append(
            f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-size="{size}" '
            f'font-family="Helvetica, Arial, sans-serif" text-anchor="{anchor}" '
            f'fill="{fill}">{content}</text>'
        )

    def rect_world(
        self, corner_lo, corner_hi, stroke: str = "#1a1a1a",
        stroke_width: float = 1.2, fill: str = "none",
        dash: str | None = None,
    ) -> None:
        (x0, y0), (x1, y1) = corner_lo, corner_hi
        self.polyline(
            [(x0, y0), (x1, y0), (x1, y1), (x0, y1)],
            stroke=stroke, stroke_width=stroke_width, fill=fill,
            dash=dash, closed=True,
        )

    # -- output -----------------------------------------------------------------

    def render(self) -> str:
        body = "\n".join(f"  {el}" for el in self._elements)
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" '
            f'height="{self.height}" viewBox="0 0 {self.width} {self.height}">\n'
            f"{body}\n</svg>\n"
        )

    def write(self, path) -> None:
        Path(path).write_text(self.render(), encoding="utf-8")
