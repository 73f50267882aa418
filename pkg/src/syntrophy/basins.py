"""Separatrices and basins of attraction of the reduced system.

The separatrix of a saddle is its stable manifold, traced by integrating
backwards in time from two seeds placed a small distance ``eps`` either side
of the saddle along the stable eigenvector.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _core
from .dynamics import ATOL, RTOL, max_step, settle_targets
from .equilibria import EquilibriumRecord, all_equilibria
from .growth import ChemostatConfig, GrowthModel
from .planar import in_region

UNRESOLVED = "unresolved"
OUTSIDE = "outside"


@dataclass(frozen=True)
class Separatrix:
    """Stable manifold of ``saddle``; ``plus`` and ``minus`` start at the saddle."""

    saddle: EquilibriumRecord
    plus: np.ndarray
    minus: np.ndarray
    direction: tuple

    @property
    def polyline(self) -> np.ndarray:
        """Both branches joined through the saddle, shape (n, 2)."""
        return np.vstack([self.minus[::-1], self.plus])

    def rows(self):
        for name, arr in (("plus", self.plus), ("minus", self.minus)):
            for x1, x2 in arr:
                yield x1, x2, name

    def distance(self, point) -> float:
        """Euclidean distance from ``point`` to the polyline."""
        return float(_segment_distances(self.polyline, np.asarray(point, dtype=float)).min())


def _segment_distances(poly, p):
    a, b = poly[:-1], poly[1:]
    ab = b - a
    L2 = np.einsum("ij,ij->i", ab, ab)
    t = np.where(L2 > 0, np.einsum("ij,ij->i", p - a, ab) / np.where(L2 > 0, L2, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    q = a + t[:, None] * ab
    return np.hypot(*(q - p).T)


def stable_direction(J: np.ndarray) -> tuple[float, np.ndarray]:
    """Negative eigenvalue and unit eigenvector of a saddle Jacobian."""
    tr = J[0, 0] + J[1, 1]
    det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    if det >= 0:
        raise ValueError("matrix is not a saddle (determinant must be negative)")
    lam = 0.5 * tr - math.sqrt(0.25 * tr * tr - det)
    u = np.array([J[0, 1], lam - J[0, 0]])
    w = np.array([lam - J[1, 1], J[1, 0]])
    v = u if np.linalg.norm(u) >= np.linalg.norm(w) else w
    return lam, v / np.linalg.norm(v)


def compute_separatrix(model: GrowthModel, config: ChemostatConfig, D: float,
                       saddle: EquilibriumRecord, *, t_max: Optional[float] = None) -> Separatrix:
    """Trace the stable manifold of ``saddle`` in reversed time.

    Each half-branch stops on leaving the closed admissible region, after
    arc length ``4 (s1_in + s2_in)``, or at ``t_max`` (default ``500 / D``).
    """
    if saddle.stability != "saddle":
        raise ValueError(f"{saddle.kind} at ({saddle.x1}, {saddle.x2}) is {saddle.stability}, not a saddle")
    _, v = stable_direction(np.asarray(saddle.jacobian))
    # orient the eigenvector so that "plus" points to increasing x1
    if v[0] < 0 or (v[0] == 0 and v[1] < 0):
        v = -v
    p = np.array([saddle.x1, saddle.x2])
    eps = 1e-7 * (1.0 + np.linalg.norm(p))
    t_max = 500.0 / D if t_max is None else t_max
    cap = 4.0 * (config.s1_in + config.s2_in)
    branches = []
    for sign in (1.0, -1.0):
        seed = p + sign * eps * v
        ts, ys, _status, _hit, _sp = _core.integrate(
            model, config, D, list(seed), t_max, RTOL, ATOL, direction=-1.0,
            region=True, arc_cap=cap, clip=False, max_step=max_step(D))
        branches.append(np.asarray(ys, dtype=float).reshape(-1, 2))
    return Separatrix(saddle, branches[0], branches[1], (float(v[0]), float(v[1])))


@dataclass
class BasinGrid:
    """Attractor labels at cell centres; ``labels[i, j]`` belongs to ``(x1[i], x2[j])``."""

    resolution: tuple
    x1: np.ndarray
    x2: np.ndarray
    labels: np.ndarray
    D: float
    config: ChemostatConfig

    def label_set(self) -> set:
        return {str(v) for v in np.unique(self.labels)} - {OUTSIDE, UNRESOLVED}

    def fraction(self, label: str) -> float:
        """Share of in-region cells carrying ``label``."""
        inside = self.labels != OUTSIDE
        n = int(inside.sum())
        return float((self.labels[inside] == label).sum()) / n if n else 0.0

    def rows(self):
        for i, a in enumerate(self.x1):
            for j, b in enumerate(self.x2):
                yield float(a), float(b), str(self.labels[i, j])


def cell_centres(config: ChemostatConfig, resolution) -> tuple[np.ndarray, np.ndarray]:
    n1, n2 = resolution
    h1 = config.s1_in / n1
    h2 = (config.s1_in + config.s2_in) / n2
    return (np.arange(n1) + 0.5) * h1, (np.arange(n2) + 0.5) * h2


def attractors(equilibria) -> list:
    return [e for e in equilibria if e.stability == "stable_node"]


def settle_points(model, config, D, points, equilibria, *, threads: Optional[int] = None,
                  t_end: Optional[float] = None, chunk: int = 256) -> list:
    """Label each planar point by the stable node it settles on, or ``unresolved``."""
    stable = attractors(equilibria)
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        return []
    if not stable:
        return [UNRESOLVED] * len(pts)
    targets, radii, speeds = settle_targets(stable, D)
    t_end = 500.0 / D if t_end is None else t_end

    def run(block):
        _, status, hit, _, _ = _core.integrate_batch(
            model, config, D, block, t_end, RTOL, ATOL,
            targets=targets, radii=radii, speeds=speeds, max_step=max_step(D))
        return [stable[h].kind if s == _core.EXIT_CONVERGED and h >= 0 else UNRESOLVED
                for s, h in zip(status, hit)]

    blocks = [pts[k:k + chunk] for k in range(0, len(pts), chunk)]
    workers = threads or os.cpu_count() or 1
    if workers == 1 or len(blocks) == 1:
        out = [run(b) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            out = list(ex.map(run, blocks))
    return [lab for block in out for lab in block]


def classify_basins(model: GrowthModel, config: ChemostatConfig, D: float, resolution=(100, 100),
                    *, threads: Optional[int] = None, equilibria=None) -> BasinGrid:
    """Label the centre of every cell of ``[0, s1_in] x [0, s1_in + s2_in]``.

    Centres outside the admissible region are labelled ``outside``; the
    others are integrated until they settle on a stable node, or labelled
    ``unresolved`` if they have not by ``t = 500 / D``.
    """
    n1, n2 = (int(r) for r in resolution)
    if n1 < 1 or n2 < 1:
        raise ValueError("resolution must be positive")
    eqs = all_equilibria(model, config, D) if equilibria is None else equilibria
    x1, x2 = cell_centres(config, (n1, n2))
    labels = np.full((n1, n2), OUTSIDE, dtype=object)
    idx = [(i, j) for i in range(n1) for j in range(n2) if in_region(config, (x1[i], x2[j]))]
    pts = np.array([(x1[i], x2[j]) for i, j in idx]).reshape(-1, 2)
    for (i, j), lab in zip(idx, settle_points(model, config, D, pts, eqs, threads=threads)):
        labels[i, j] = lab
    return BasinGrid((n1, n2), x1, x2, labels, D, config)


@dataclass(frozen=True)
class ProbeResult:
    points_plus: np.ndarray
    points_minus: np.ndarray
    labels_plus: list
    labels_minus: list

    @property
    def consistent(self) -> bool:
        """One label per side, different across sides, nothing unresolved."""
        a, b = set(self.labels_plus), set(self.labels_minus)
        return len(a) == 1 and len(b) == 1 and a != b and UNRESOLVED not in a | b


def probe_separatrix(model, config, D, separatrix: Separatrix, equilibria, *, n: int = 50,
                     offset: float = 1e-3, seed: int = 0, threads: Optional[int] = None) -> ProbeResult:
    """Start trajectories at ``offset`` either side of random separatrix points.

    Base points are drawn uniformly by arc length; pairs with a probe outside
    the region are redrawn.
    """
    poly = separatrix.polyline
    seg = np.diff(poly, axis=0)
    seglen = np.hypot(*seg.T)
    keep = seglen > 0
    poly_a, seg, seglen = poly[:-1][keep], seg[keep], seglen[keep]
    cum = np.concatenate([[0.0], np.cumsum(seglen)])
    rng = np.random.default_rng(seed)
    plus, minus = [], []
    tries = 0
    while len(plus) < n and tries < 100 * n:
        tries += 1
        s = rng.uniform(0.0, cum[-1])
        k = min(int(np.searchsorted(cum, s, side="right")) - 1, len(seg) - 1)
        t = (s - cum[k]) / seglen[k]
        base = poly_a[k] + t * seg[k]
        normal = np.array([-seg[k][1], seg[k][0]]) / seglen[k]
        a, b = base + offset * normal, base - offset * normal
        if in_region(config, a) and in_region(config, b):
            plus.append(a)
            minus.append(b)
    P, M = np.array(plus).reshape(-1, 2), np.array(minus).reshape(-1, 2)
    labels = settle_points(model, config, D, np.vstack([P, M]), equilibria, threads=threads)
    return ProbeResult(P, M, labels[:len(P)], labels[len(P):])
