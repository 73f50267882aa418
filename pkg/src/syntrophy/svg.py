"""Minimal SVG phase portraits: nullclines, equilibria, separatrix, basins."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .io import fmt


@dataclass(frozen=True)
class Style:
    gamma1: str = "#d62728"
    gamma2: str = "#2ca02c"
    separatrix: str = "#1f77b4"
    equilibrium: str = "#000000"
    region: str = "#7f7f7f"
    basins: tuple = ("#fde0dd", "#e0ecf4", "#fff7bc", "#e5f5e0")
    unresolved: str = "#ffffff"


class Canvas:
    def __init__(self, xmax, ymax, width=480, height=480, margin=40):
        self.xmax, self.ymax = float(xmax), float(ymax)
        self.w, self.h, self.m = width, height, margin
        self.items = []

    def px(self, x, y):
        sx = self.m + (self.w - 2 * self.m) * x / self.xmax
        sy = self.h - self.m - (self.h - 2 * self.m) * y / self.ymax
        return round(sx, 3), round(sy, 3)

    def polyline(self, pts, color, width=1.5):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        if len(pts) < 2:
            return
        coords = " ".join(f"{a},{b}" for a, b in (self.px(*p) for p in pts))
        self.items.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="{width}"/>')

    def rect(self, x0, y0, x1, y1, color):
        a, b = self.px(x0, y1)
        c, d = self.px(x1, y0)
        self.items.append(f'<rect x="{a}" y="{b}" width="{round(c - a, 3)}" height="{round(d - b, 3)}" '
                          f'fill="{color}" stroke="none"/>')

    def circle(self, x, y, color, r=4, title=None):
        a, b = self.px(x, y)
        tip = f"<title>{title}</title>" if title else ""
        self.items.append(f'<circle cx="{a}" cy="{b}" r="{r}" fill="{color}">{tip}</circle>')

    def text(self, x, y, s, size=11):
        self.items.append(f'<text x="{x}" y="{y}" font-size="{size}" font-family="sans-serif">{s}</text>')

    def render(self) -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.w}" height="{self.h}" '
                f'viewBox="0 0 {self.w} {self.h}">')
        return "\n".join([head, *self.items, "</svg>"]) + "\n"


def phase_portrait(config, D, nullclines, equilibria, separatrix=None, grid=None,
                   style: Style = Style()) -> str:
    """SVG text of the admissible region at dilution rate ``D``.

    ``nullclines`` maps 1 and 2 to ``(k, 2)`` polylines; ``grid`` is an
    optional BasinGrid drawn underneath.
    """
    s1, s2 = config.s1_in, config.s2_in
    cv = Canvas(s1, s1 + s2)
    if grid is not None:
        kinds = sorted(grid.label_set())
        colors = {k: style.basins[i % len(style.basins)] for i, k in enumerate(kinds)}
        h1 = s1 / grid.resolution[0]
        h2 = (s1 + s2) / grid.resolution[1]
        for a, b, lab in grid.rows():
            if lab == "outside":
                continue
            cv.rect(a - h1 / 2, b - h2 / 2, a + h1 / 2, b + h2 / 2, colors.get(lab, style.unresolved))
    cv.polyline([(0, 0), (s1, 0), (s1, s1 + s2), (0, s2), (0, 0)], style.region, 1.0)
    cv.polyline(nullclines.get(1, []), style.gamma1)
    cv.polyline(nullclines.get(2, []), style.gamma2)
    if separatrix is not None:
        cv.polyline(separatrix.polyline, style.separatrix, 2.0)
    for e in equilibria:
        cv.circle(e.x1, e.x2, style.equilibrium,
                  title=f"{e.kind} {e.stability} ({fmt(e.x1)}, {fmt(e.x2)})")
    cv.text(cv.m, cv.m - 12, f"D = {fmt(D)}")
    cv.text(cv.w - cv.m - 20, cv.h - cv.m + 18, "x1")
    cv.text(8, cv.m, "x2")
    return cv.render()
