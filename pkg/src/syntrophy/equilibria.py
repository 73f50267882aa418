"""Thresholds, equilibria, their stability and the regime taxonomy.

Four threshold dilution rates organise the equilibria of the reduced system:

``D1 = Phi1(0, 0)``, ``D2 = Phi2(0, 0)``; when ``D1 > D2`` the crossing
``Phi1(xi1, 0) = Phi2(xi1, 0) = D3`` exists, when ``D2 > D1`` the crossing
``Phi1(0, xi2) = Phi2(0, xi2) = D4`` does.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import planar
from .errors import AtBifurcationError, HypothesisError, ResidualError
from .growth import ChemostatConfig, GrowthModel, check_hypotheses, default_grid

KINDS = ("F0", "F1_boundary", "F2_boundary", "F_star")
STABILITIES = ("stable_node", "unstable_node", "saddle", "nonhyperbolic")

SCAN_SAMPLES = 2000
HYPERBOLIC_TOL = 1e-9
RESIDUAL_TOL = 1e-9
NEAR_DEGENERATE_TOL = 1e-8
THRESHOLD_TIE = 1e-12
BIFURCATION_TOL = 1e-9


@dataclass(frozen=True)
class Thresholds:
    D1: float
    D2: float
    D3: Optional[float] = None
    D4: Optional[float] = None
    xi1: Optional[float] = None
    xi2: Optional[float] = None

    def named(self) -> dict:
        return {k: v for k, v in (("D1", self.D1), ("D2", self.D2), ("D3", self.D3),
                                  ("D4", self.D4)) if v is not None}

    def to_dict(self) -> dict:
        return {"D1": self.D1, "D2": self.D2, "D3": self.D3, "D4": self.D4,
                "xi1": self.xi1, "xi2": self.xi2}


@dataclass(frozen=True)
class EquilibriumRecord:
    """An equilibrium of the reduced system.

    ``jacobian``, ``eigenvalues`` and ``stability`` are filled in by
    :func:`classify_equilibrium`.  For positive equilibria ``slopes`` holds
    the nullcline slopes ``(F1', F2')`` at the point.
    """

    kind: str
    x1: float
    x2: float
    jacobian: Optional[np.ndarray] = field(default=None, compare=False)
    eigenvalues: Optional[tuple] = None
    stability: Optional[str] = None
    slopes: Optional[tuple] = None
    near_degenerate: bool = False

    @property
    def location(self) -> planar.PlanarState:
        return planar.PlanarState(self.x1, self.x2)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "x1": self.x1, "x2": self.x2,
             "eigenvalues": [[float(ev.real), float(ev.imag)] for ev in (self.eigenvalues or ())],
             "stability": self.stability}
        if self.near_degenerate:
            d["near_degenerate"] = True
        return d


@dataclass(frozen=True)
class RegimeReport:
    D: float
    thresholds: Thresholds
    case_label: str
    equilibria: tuple
    predicted_attractors: tuple

    @property
    def positive(self) -> list:
        return [e for e in self.equilibria if e.kind == "F_star"]

    def find(self, kind: str) -> Optional[EquilibriumRecord]:
        for e in self.equilibria:
            if e.kind == kind:
                return e
        return None

    def to_dict(self) -> dict:
        return {"D": self.D, "thresholds": self.thresholds.to_dict(), "case": self.case_label,
                "equilibria": [e.to_dict() for e in self.equilibria],
                "predicted_attractors": list(self.predicted_attractors)}


def _bisect(fn, lo, hi):
    """Root of ``fn`` on ``[lo, hi]`` given a sign change, to float resolution."""
    flo = fn(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = fn(mid)
        if fm == 0.0:
            return mid
        if (fm > 0.0) == (flo > 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def compute_thresholds(model: GrowthModel, config: ChemostatConfig, *,
                       check: bool = True) -> Thresholds:
    """``D1``-``D4`` and the crossing points ``xi1``, ``xi2``."""
    if check:
        report = check_hypotheses(model, default_grid(config, 20))
        if not report.passed:
            h, pt, v = report.violations[0]
            raise HypothesisError(f"{h} violated at s={pt} (value {v})")
    s1in, s2in = config.s1_in, config.s2_in
    D1 = model.rate(1, s1in, s2in)
    D2 = model.rate(2, s1in, s2in)
    if abs(D1 - D2) <= THRESHOLD_TIE:
        return Thresholds(D1, D2)
    if D1 > D2:
        diff = lambda x: model.rate(1, s1in - x, s2in + x) - model.rate(2, s1in - x, s2in + x)
        xi1 = _bisect(diff, 0.0, s1in)
        return Thresholds(D1, D2, D3=model.rate(1, s1in - xi1, s2in + xi1), xi1=xi1)
    diff = lambda x: model.rate(1, s1in, s2in - x) - model.rate(2, s1in, s2in - x)
    xi2 = _bisect(diff, 0.0, s2in)
    return Thresholds(D1, D2, D4=model.rate(1, s1in, s2in - xi2), xi2=xi2)


def find_boundary_F1(model: GrowthModel, config: ChemostatConfig,
                     D: float) -> Optional[EquilibriumRecord]:
    """``(xbar1, 0)`` with ``Phi1(xbar1, 0) = D``; exists iff ``D < D1``."""
    s1in, s2in = config.s1_in, config.s2_in
    psi = lambda x: model.rate(1, s1in - x, s2in + x) - D
    if not psi(0.0) > 0.0:
        return None
    return EquilibriumRecord("F1_boundary", _bisect(psi, 0.0, s1in), 0.0)


def find_boundary_F2(model: GrowthModel, config: ChemostatConfig,
                     D: float) -> Optional[EquilibriumRecord]:
    """``(0, xtilde2)`` with ``Phi2(0, xtilde2) = D``; exists iff ``D < D2``."""
    s1in, s2in = config.s1_in, config.s2_in
    psi = lambda x: model.rate(2, s1in, s2in - x) - D
    if not psi(0.0) > 0.0:
        return None
    return EquilibriumRecord("F2_boundary", 0.0, _bisect(psi, 0.0, s2in))


def _golden_min(fn, a, b, iters=80):
    g = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - g * (b - a)
    d = a + g * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = fn(d)
        if b - a < 1e-15 * (1.0 + abs(a)):
            break
    return (c, fc) if fc < fd else (d, fd)


def _graph_or_edge(model, config, which, D, x1, dom) -> float:
    """Graph value, or the boundary value it tends to at the ends of ``dom``.

    At an end of its domain a graph meets ``x2 = 0`` or ``x2 = x1 + s2_in``,
    where the bisection bracket can miss ``D`` by round-off.
    """
    v = planar.graph_value(model, config, which, D, x1)
    if v is not None:
        return v
    tol = 1e-12 * (1.0 + abs(x1))
    if not (abs(x1 - dom[0]) <= tol or abs(x1 - dom[1]) <= tol):
        return math.nan
    s1 = config.s1_in - x1
    top = x1 + config.s2_in
    r_bottom = abs(model.rate(which, s1, top) - D)
    r_top = abs(model.rate(which, s1, 0.0) - D)
    return 0.0 if r_bottom <= r_top else top


def find_positive_equilibria(model: GrowthModel, config: ChemostatConfig, D: float,
                             samples: int = SCAN_SAMPLES) -> list:
    """Intersections of the two nullcline graphs inside the region.

    ``g = F1 - F2`` is sampled at ``samples`` points of the common domain of
    the graphs and every sign change is bisected.  Local minima of ``|g|``
    without a sign change are searched for a hidden pair of roots; when none
    is found but ``|g| < 1e-8`` a single record flagged ``near_degenerate`` is
    returned at the minimiser.  Results are sorted by ``x1``.
    """
    d1 = planar.graph_domain(model, config, 1, D)
    d2 = planar.graph_domain(model, config, 2, D)
    if d1 is None or d2 is None:
        return []
    lo, hi = max(d1[0], d2[0]), min(d1[1], d2[1])
    if lo > hi:
        return []
    xs = np.linspace(lo, hi, samples) if hi > lo else np.array([lo])
    g1 = planar.graph_values(model, config, 1, D, xs)
    g2 = planar.graph_values(model, config, 2, D, xs)
    for k in {0, len(xs) - 1}:
        g1[k] = _graph_or_edge(model, config, 1, D, float(xs[k]), d1)
        g2[k] = _graph_or_edge(model, config, 2, D, float(xs[k]), d2)
    g = g1 - g2

    def gfun(x):
        return (_graph_or_edge(model, config, 1, D, x, d1)
                - _graph_or_edge(model, config, 2, D, x, d2))

    roots = [float(x) for x in xs[g == 0.0]]
    finite = ~np.isnan(g)
    pos = g > 0.0
    nz = finite & (g != 0.0)
    change = nz[:-1] & nz[1:] & (pos[:-1] != pos[1:])
    for i in np.flatnonzero(change):
        roots.append(_bisect(gfun, float(xs[i]), float(xs[i + 1])))
    a, b, c = g[:-2], g[1:-1], g[2:]
    same = nz[:-2] & nz[1:-1] & nz[2:] & (pos[:-2] == pos[1:-1]) & (pos[2:] == pos[1:-1])
    dip = same & (np.abs(b) <= np.abs(a)) & (np.abs(b) <= np.abs(c))
    flagged = []
    for i in np.flatnonzero(dip) + 1:
        sgn = 1.0 if g[i] > 0 else -1.0
        xm, vm = _golden_min(lambda x: sgn * gfun(x), float(xs[i - 1]), float(xs[i + 1]))
        if vm < 0.0:
            roots.append(_bisect(gfun, float(xs[i - 1]), xm))
            roots.append(_bisect(gfun, xm, float(xs[i + 1])))
        elif vm < NEAR_DEGENERATE_TOL:
            flagged.append(xm)

    out = []
    for x, degenerate in [(r, False) for r in roots] + [(r, True) for r in flagged]:
        x2 = _graph_or_edge(model, config, 1, D, x, d1)
        if math.isnan(x2):
            continue
        if planar.in_region(config, (x, x2)):
            out.append(EquilibriumRecord("F_star", x, x2, near_degenerate=degenerate))
    out.sort(key=lambda e: e.x1)
    # drop duplicates from roots hit exactly on a sample
    uniq = []
    for e in out:
        if uniq and abs(e.x1 - uniq[-1].x1) <= 1e-12 * (1.0 + abs(e.x1)):
            continue
        uniq.append(e)
    return uniq


def eigenvalues_2x2(J) -> tuple:
    """Eigenvalues of a real 2x2 matrix from its trace and determinant.

    Triangular matrices return their diagonal exactly.  Real pairs are
    sorted ascending.
    """
    a, b = float(J[0][0]), float(J[0][1])
    c, d = float(J[1][0]), float(J[1][1])
    if b == 0.0 or c == 0.0:
        return tuple(sorted((complex(a), complex(d)), key=lambda z: z.real))
    tr = a + d
    det = a * d - b * c
    disc = tr * tr - 4.0 * det
    if disc >= 0.0:
        sq = math.sqrt(disc)
        q = 0.5 * (tr + sq) if tr >= 0.0 else 0.5 * (tr - sq)
        other = det / q if q != 0.0 else 0.0
        return tuple(sorted((complex(q), complex(other)), key=lambda z: z.real))
    im = 0.5 * math.sqrt(-disc)
    return (complex(0.5 * tr, -im), complex(0.5 * tr, im))


def stability_from_eigenvalues(eigs) -> str:
    re = [z.real for z in eigs]
    if any(abs(r) < HYPERBOLIC_TOL for r in re):
        return "nonhyperbolic"
    if all(r < 0 for r in re):
        return "stable_node"
    if all(r > 0 for r in re):
        return "unstable_node"
    return "saddle"


def residual(model, config, D, record) -> float:
    """Largest defect of the equations defining ``record``."""
    x1, x2 = record.x1, record.x2
    if record.kind == "F0":
        return max(abs(x1), abs(x2))
    p1 = planar.phi(model, config, 1, (x1, x2)) - D
    p2 = planar.phi(model, config, 2, (x1, x2)) - D
    if record.kind == "F1_boundary":
        return max(abs(p1), abs(x2))
    if record.kind == "F2_boundary":
        return max(abs(p2), abs(x1))
    return max(abs(p1), abs(p2))


def classify_equilibrium(model: GrowthModel, config: ChemostatConfig, D: float,
                         record: EquilibriumRecord) -> EquilibriumRecord:
    """Attach Jacobian, eigenvalues and stability to ``record``."""
    if not record.near_degenerate:
        r = residual(model, config, D, record)
        if not r <= RESIDUAL_TOL:
            raise ResidualError(f"{record.kind} at ({record.x1}, {record.x2}) has residual {r:.3g}")
    J = planar.jacobian(model, config, D, (record.x1, record.x2))
    eigs = eigenvalues_2x2(J)
    slopes = None
    if record.kind == "F_star":
        slopes = (planar.slope_at(model, config, 1, record.x1, record.x2),
                  planar.slope_at(model, config, 2, record.x1, record.x2))
    return replace(record, jacobian=J, eigenvalues=eigs,
                   stability=stability_from_eigenvalues(eigs), slopes=slopes)


def case_label(th: Thresholds, D: float) -> str:
    lo, hi = min(th.D1, th.D2), max(th.D1, th.D2)
    if D < lo:
        return "case1"
    if D > hi:
        return "case3"
    if th.D1 < th.D2:
        return "case2a" if th.D4 is None or D < th.D4 else "case2b"
    return "case2c" if th.D3 is None or D < th.D3 else "case2d"


# Global attractor when there is at most one positive equilibrium.
_PREDICTED = {
    "case1": "F_star", "case2a": "F_star", "case2b": "F2_boundary",
    "case2c": "F_star", "case2d": "F1_boundary", "case3": "F0",
}


def nearest_threshold(th: Thresholds, D: float, tol: float = BIFURCATION_TOL):
    for name, value in th.named().items():
        if abs(D - value) <= tol:
            return name, value
    return None


def all_equilibria(model, config, D, samples: int = SCAN_SAMPLES) -> list:
    """Every equilibrium at ``D``, classified: F0, F1, F2, then positive ones."""
    recs = [EquilibriumRecord("F0", 0.0, 0.0)]
    for finder in (find_boundary_F1, find_boundary_F2):
        r = finder(model, config, D)
        if r is not None:
            recs.append(r)
    recs.extend(find_positive_equilibria(model, config, D, samples))
    return [classify_equilibrium(model, config, D, r) for r in recs]


def classify_regime(model: GrowthModel, config: ChemostatConfig, D: Optional[float] = None, *,
                    thresholds: Optional[Thresholds] = None) -> RegimeReport:
    """Case label, classified equilibria and predicted attractors at ``D``.

    Raises :class:`AtBifurcationError` when ``D`` is within 1e-9 of a
    threshold.
    """
    D = config.D if D is None else D
    th = thresholds or compute_thresholds(model, config)
    hit = nearest_threshold(th, D)
    if hit is not None:
        raise AtBifurcationError(*hit)
    eqs = all_equilibria(model, config, D)
    label = case_label(th, D)
    positive = [e for e in eqs if e.kind == "F_star" and not e.near_degenerate]
    if len(positive) <= 1:
        attractors = (_PREDICTED[label],)
    else:
        attractors = tuple(e.kind for e in eqs if e.stability == "stable_node")
    return RegimeReport(D, th, label, tuple(eqs), attractors)
