"""Deterministic SVG and CSV writers.

Coordinates are printed with fixed precision, so identical inputs give
byte-identical documents.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = ["Canvas", "render_portrait", "trajectory_csv", "rows_csv", "fmt"]

_STYLE = """\
.axis{stroke:#000;stroke-width:1}
.orbit{fill:none;stroke:#1f4fd8;stroke-width:1}
.separatrix{fill:none;stroke:#d81f1f;stroke-width:2}
.dirfield{stroke:#999;stroke-width:0.8}
.equilibrium{fill:#000}
.imag{fill:none;stroke:#999;stroke-width:0.8}"""


def fmt(x: float) -> str:
    """Shortest round-trip repr, with negative zero folded to zero."""
    x = float(x)
    if x == 0.0:
        return "0"
    return repr(x)


@dataclass(frozen=True)
class Canvas:
    xmin: float
    xmax: float
    ymin: float
    ymax: float
    width: int = 600
    height: int = 600

    def __post_init__(self):
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ValueError("canvas extent must be non-empty")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("canvas size must be positive")

    def px(self, z: complex) -> tuple[float, float]:
        u = (z.real - self.xmin) / (self.xmax - self.xmin) * self.width
        v = (self.ymax - z.imag) / (self.ymax - self.ymin) * self.height
        return u, v

    def inside(self, z: complex, margin: float = 0.25) -> bool:
        dx = margin * (self.xmax - self.xmin)
        dy = margin * (self.ymax - self.ymin)
        return (self.xmin - dx <= z.real <= self.xmax + dx) and (self.ymin - dy <= z.imag <= self.ymax + dy)


def _pieces(canvas: Canvas, pts: Sequence[complex]) -> list[list[complex]]:
    """Split a polyline at non-finite or far out-of-canvas samples."""
    out: list[list[complex]] = []
    cur: list[complex] = []
    for z in pts:
        z = complex(z)
        if math.isfinite(z.real) and math.isfinite(z.imag) and canvas.inside(z):
            cur.append(z)
        else:
            if len(cur) > 1:
                out.append(cur)
            cur = []
    if len(cur) > 1:
        out.append(cur)
    return out


def _polyline(canvas: Canvas, pts: list[complex], cls: str) -> str:
    # drop samples closer than half a pixel to the last kept one
    kept = [canvas.px(pts[0])]
    for z in pts[1:-1]:
        u, v = canvas.px(z)
        if abs(u - kept[-1][0]) + abs(v - kept[-1][1]) >= 0.5:
            kept.append((u, v))
    kept.append(canvas.px(pts[-1]))
    coords = " ".join(f"{u:.2f},{v:.2f}" for u, v in kept)
    return f'<polyline class="{cls}" points="{coords}"/>'


def render_portrait(
    trajectories: Iterable[Sequence[complex]],
    separatrices: Iterable[Sequence[complex]],
    equilibria: Iterable[complex],
    canvas: Canvas,
    *,
    field: Callable[[complex], complex] | None = None,
    glyphs: tuple[int, int] = (20, 20),
    imaginary: Iterable[Sequence[complex]] = (),
) -> str:
    """Phase portrait: ordinary orbits (class ``orbit``), separatrices
    (``separatrix``), unit direction glyphs of ``field`` (``dirfield``),
    equilibria as dots.  ``imaginary`` holds optional imaginary-time curves.
    """
    W, H = canvas.width, canvas.height
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}">',
        f"<style>\n{_STYLE}\n</style>",
        f'<clipPath id="frame"><rect x="0" y="0" width="{W}" height="{H}"/></clipPath>',
        '<g clip-path="url(#frame)">',
    ]
    if field is not None:
        nx, ny = glyphs
        L = 0.4 * min(W / nx, H / ny)
        for j in range(ny):
            for i in range(nx):
                z = complex(canvas.xmin + (i + 0.5) * (canvas.xmax - canvas.xmin) / nx,
                            canvas.ymin + (j + 0.5) * (canvas.ymax - canvas.ymin) / ny)
                try:
                    v = complex(field(z))
                except (ZeroDivisionError, OverflowError, ValueError):
                    continue
                if not (math.isfinite(v.real) and math.isfinite(v.imag)) or v == 0:
                    continue
                v /= abs(v)
                u0, w0 = canvas.px(z)
                parts.append(
                    f'<line class="dirfield" x1="{u0 - L * v.real:.2f}" y1="{w0 + L * v.imag:.2f}" '
                    f'x2="{u0 + L * v.real:.2f}" y2="{w0 - L * v.imag:.2f}"/>'
                )
    for tr in imaginary:
        for piece in _pieces(canvas, tr):
            parts.append(_polyline(canvas, piece, "imag"))
    for tr in trajectories:
        for piece in _pieces(canvas, tr):
            parts.append(_polyline(canvas, piece, "orbit"))
    for tr in separatrices:
        for piece in _pieces(canvas, tr):
            parts.append(_polyline(canvas, piece, "separatrix"))
    for z in equilibria:
        z = complex(z)
        if canvas.inside(z, 0.0):
            u, v = canvas.px(z)
            parts.append(f'<circle class="equilibrium" cx="{u:.2f}" cy="{v:.2f}" r="3"/>')
    parts.append("</g>")
    # axes
    if canvas.ymin <= 0 <= canvas.ymax:
        _, v = canvas.px(0j)
        parts.append(f'<line class="axis" x1="0" y1="{v:.2f}" x2="{W}" y2="{v:.2f}"/>')
    if canvas.xmin <= 0 <= canvas.xmax:
        u, _ = canvas.px(0j)
        parts.append(f'<line class="axis" x1="{u:.2f}" y1="0" x2="{u:.2f}" y2="{H}"/>')
    parts.append(f'<rect class="axis" x="0" y="0" width="{W}" height="{H}" fill="none"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def rows_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def trajectory_csv(tagged: Iterable[tuple[str, Sequence[float], Sequence[complex]]]) -> str:
    """``t, re, im, tag`` rows for each ``(tag, times, states)``."""

    def rows():
        for tag, times, states in tagged:
            for t, z in zip(times, states):
                z = complex(z)
                yield float(t), z.real, z.imag, tag

    return rows_csv(("t", "re", "im", "tag"), rows())
