"""Dilution-rate sweeps and bifurcation events.

A regime signature is the multiset of ``(kind, stability)`` over the
non-degenerate equilibria.  Changes of signature between adjacent samples are
refined by bisection; events closer than ``MERGE_WIDTH`` (the two sides of a
sample that falls on a threshold) are merged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .equilibria import (EquilibriumRecord, all_equilibria, case_label,
                         compute_thresholds, nearest_threshold)
from .growth import ChemostatConfig, GrowthModel

SAMPLES_PER_UNIT = 400
# half of the 1e-8 target, so that two halves merged around a sample that
# falls on a threshold still span at most 1e-8
REFINE_WIDTH = 5e-9
TANGENCY_WIDTH = 1e-9
MERGE_WIDTH = 1e-6
WITNESS_OFFSET = 1e-6


def signature(equilibria) -> tuple:
    return tuple(sorted((e.kind, e.stability) for e in equilibria if not e.near_degenerate))


@dataclass
class Event:
    D: float
    kind: str
    bracket: tuple
    left: tuple
    right: tuple
    witnesses: list = field(default_factory=list)
    separation: Optional[float] = None

    def to_dict(self) -> dict:
        return {"D": self.D, "kind": self.kind,
                "witnesses": [w.to_dict() for w in self.witnesses]}


@dataclass
class BranchDiagram:
    model: GrowthModel
    config: ChemostatConfig
    D_samples: np.ndarray
    branches: list
    events: list

    def to_dict(self) -> dict:
        th = compute_thresholds(self.model, self.config, check=False)
        samples = []
        for D, eqs in zip(self.D_samples, self.branches):
            label = None if nearest_threshold(th, D) else case_label(th, D)
            samples.append({"D": float(D), "case": label, "equilibria": [e.to_dict() for e in eqs]})
        return {"samples": samples, "events": [e.to_dict() for e in self.events]}

    def rows(self):
        """``(D, kind, x1, x2, stability)`` for every branch point."""
        for D, eqs in zip(self.D_samples, self.branches):
            for e in eqs:
                yield float(D), e.kind, e.x1, e.x2, e.stability


def _event_kind(left: tuple, right: tuple) -> str:
    def by_kind(sig):
        d = {}
        for k, s in sig:
            d.setdefault(k, []).append(s)
        return d
    a, b = by_kind(left), by_kind(right)
    for k, vanish, exch in (("F1_boundary", "F1_vanishes", "F1_exchanges_stability"),
                            ("F2_boundary", "F2_vanishes", "F2_exchanges_stability")):
        if (k in a) != (k in b):
            return vanish
    for k, exch in (("F1_boundary", "F1_exchanges_stability"),
                    ("F2_boundary", "F2_exchanges_stability")):
        if a.get(k) != b.get(k):
            return exch
    if len(a.get("F_star", [])) != len(b.get("F_star", [])):
        return "saddle_node"
    if a.get("F0") != b.get("F0"):
        return "F0_exchanges"
    return "saddle_node"


def _refine(model, config, a, b, sig_a, sig_b, width):
    while b - a > width:
        mid = 0.5 * (a + b)
        s = signature(all_equilibria(model, config, mid))
        if s == sig_a:
            a = mid
        else:
            b, sig_b = mid, s
    return a, b, sig_b


def witnesses(model, config, D, offset=WITNESS_OFFSET):
    """Closest pair of equilibria at ``D - offset`` or ``D + offset``.

    Returns ``(pair, separation)``; the pair is sorted by kind order and
    position.
    """
    best = None
    for Dx in (D - offset, D + offset):
        if Dx <= 0:
            continue
        eqs = [e for e in all_equilibria(model, config, Dx) if not e.near_degenerate]
        for i in range(len(eqs)):
            for j in range(i + 1, len(eqs)):
                d = math.hypot(eqs[i].x1 - eqs[j].x1, eqs[i].x2 - eqs[j].x2)
                if best is None or d < best[0]:
                    best = (d, [eqs[i], eqs[j]])
    if best is None:
        return [], None
    return best[1], best[0]


def sweep(model: GrowthModel, config: ChemostatConfig, D_min: float, D_max: float,
          n_samples: Optional[int] = None) -> BranchDiagram:
    """Classify equilibria on a grid of ``D`` and locate the events between samples."""
    if not (0 < D_min < D_max):
        raise ValueError("need 0 < D_min < D_max")
    if n_samples is None:
        n_samples = max(2, int(math.ceil(SAMPLES_PER_UNIT * (D_max - D_min))) + 1)
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    Ds = np.linspace(D_min, D_max, n_samples)
    branches = [all_equilibria(model, config, float(D)) for D in Ds]
    sigs = [signature(b) for b in branches]
    raw = []
    for i in range(n_samples - 1):
        if sigs[i] != sigs[i + 1]:
            a, b, _ = _refine(model, config, float(Ds[i]), float(Ds[i + 1]),
                              sigs[i], sigs[i + 1], REFINE_WIDTH)
            raw.append([a, b, sigs[i], sigs[i + 1]])
    # the far side of the bracket may itself sit on a threshold
    merged = []
    for ev in raw:
        if merged and ev[0] - merged[-1][1] <= MERGE_WIDTH:
            merged[-1][1] = ev[1]
            merged[-1][3] = ev[3]
        else:
            merged.append(ev)
    events = []
    for a, b, left, right in merged:
        if left == right:
            continue
        D = 0.5 * (a + b)
        pair, sep = witnesses(model, config, D)
        events.append(Event(D, _event_kind(left, right), (a, b), left, right, pair, sep))
    return BranchDiagram(model, config, Ds, branches, events)


def coalescence_witnesses(diagram: BranchDiagram, offset: float = WITNESS_OFFSET) -> list:
    """``(event, pair)`` for each event: the equilibria that merge there."""
    out = []
    for ev in diagram.events:
        pair, _ = witnesses(diagram.model, diagram.config, ev.D, offset)
        out.append((ev, pair))
    return out


@dataclass(frozen=True)
class Tangency:
    D: float
    bracket: tuple
    point: tuple
    pair: tuple


def _positive(model, config, D):
    return [e for e in all_equilibria(model, config, D)
            if e.kind == "F_star" and not e.near_degenerate]


def find_tangency(model: GrowthModel, config: ChemostatConfig, D_bracket) -> Optional[Tangency]:
    """Dilution rate where two positive equilibria coalesce inside ``D_bracket``.

    Bisects on the number of positive equilibria down to a bracket of 1e-9.
    ``point`` is the midpoint of the closest pair on the side that still has
    them.  Returns None when the count is the same at both ends.
    """
    a, b = (float(v) for v in D_bracket)
    na, nb = len(_positive(model, config, a)), len(_positive(model, config, b))
    if na == nb:
        return None
    while b - a > TANGENCY_WIDTH:
        mid = 0.5 * (a + b)
        if len(_positive(model, config, mid)) == na:
            a = mid
        else:
            b = mid
    side = a if na > nb else b
    eqs = _positive(model, config, side)
    best = None
    for i in range(len(eqs) - 1):
        d = math.hypot(eqs[i + 1].x1 - eqs[i].x1, eqs[i + 1].x2 - eqs[i].x2)
        if best is None or d < best[0]:
            best = (d, eqs[i], eqs[i + 1])
    if best is None:
        e = eqs[0]
        return Tangency(0.5 * (a + b), (a, b), (e.x1, e.x2), (e,))
    _, e1, e2 = best
    point = (0.5 * (e1.x1 + e2.x1), 0.5 * (e1.x2 + e2.x2))
    return Tangency(0.5 * (a + b), (a, b), point, (e1, e2))
