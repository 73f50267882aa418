"""The reduced planar system on the invariant set.

On the invariant set the substrates are determined by the biomasses,
``s1 = s1_in - x1`` and ``s2 = s2_in + x1 - x2``, and the dynamics reduce to::

    x1' = (Phi1(x1, x2) - D) x1
    x2' = (Phi2(x1, x2) - D) x2

with ``Phi_i(x1, x2) = f_i(s1_in - x1, s2_in + x1 - x2)``.  The nullcline
graph ``x2 = F_i(x1)`` solves ``Phi_i(x1, x2) = D``; positive equilibria are
the intersections of the two graphs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _core
from .errors import OutOfRegionError
from .growth import ChemostatConfig, GrowthModel


@dataclass(frozen=True)
class PlanarState:
    x1: float
    x2: float

    def __iter__(self):
        yield self.x1
        yield self.x2

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.x2])


def substrates(config: ChemostatConfig, x1: float, x2: float) -> tuple[float, float]:
    """Substrate concentrations on the invariant set."""
    return config.s1_in - x1, config.s2_in + x1 - x2


def _checked_substrates(config, x1, x2):
    s1, s2 = substrates(config, x1, x2)
    # tolerate round-off on the region edges
    tol = 1e-12 * (1.0 + config.s1_in + config.s2_in)
    if s1 < -tol or s2 < -tol or x1 < -tol or x2 < -tol:
        raise OutOfRegionError(f"state ({x1}, {x2}) gives negative concentrations ({s1}, {s2})")
    return max(s1, 0.0), max(s2, 0.0)


def phi(model: GrowthModel, config: ChemostatConfig, which: int, state) -> float:
    """``Phi_which`` at a planar state."""
    x1, x2 = state
    s1, s2 = _checked_substrates(config, x1, x2)
    return model.rate(which, s1, s2)


def vector_field(model: GrowthModel, config: ChemostatConfig, D: float, state) -> np.ndarray:
    x1, x2 = state
    s1, s2 = substrates(config, x1, x2)
    f1, f2 = model.rates(s1, s2)
    return np.array([(f1 - D) * x1, (f2 - D) * x2])


def jacobian(model: GrowthModel, config: ChemostatConfig, D: float, state) -> np.ndarray:
    """Analytic Jacobian of the reduced vector field."""
    x1, x2 = state
    s1, s2 = _checked_substrates(config, x1, x2)
    f1, f2 = model.rates(s1, s2)
    a1, b1 = model.partials(1, s1, s2)
    a2, b2 = model.partials(2, s1, s2)
    return np.array([
        [(-a1 + b1) * x1 + f1 - D, -b1 * x1],
        [(-a2 + b2) * x2, -b2 * x2 + f2 - D],
    ])


def graph_value(model: GrowthModel, config: ChemostatConfig, which: int, D: float,
                x1: float) -> Optional[float]:
    """The ``x2`` on the nullcline graph ``Phi_which(x1, x2) = D``, or None.

    Bisection over ``[0, x1 + s2_in]``, where ``Phi_1`` increases and
    ``Phi_2`` decreases with ``x2``; absolute tolerance 1e-12.
    """
    if not (-1e-15 <= x1 <= config.s1_in * (1 + 1e-15)):
        raise OutOfRegionError(f"x1={x1} outside [0, s1_in]")
    v = _core.graph_value(model, config, which, D, min(max(x1, 0.0), config.s1_in))
    return None if math.isnan(v) else v


def graph_values(model, config, which, D, xs) -> np.ndarray:
    """Vectorised :func:`graph_value`; ``nan`` marks absent points."""
    return _core.graph_values(model, config, which, D, xs)


def graph_slope(model: GrowthModel, config: ChemostatConfig, which: int, D: float,
                x1: float) -> Optional[float]:
    """Slope ``1 - (df/ds1)/(df/ds2)`` of the nullcline graph at ``x1``."""
    x2 = graph_value(model, config, which, D, x1)
    if x2 is None:
        return None
    return slope_at(model, config, which, x1, x2)


def slope_at(model, config, which, x1, x2) -> float:
    s1, s2 = _checked_substrates(config, x1, x2)
    a, b = model.partials(which, s1, s2)
    return 1.0 - a / b


def in_region(config: ChemostatConfig, state) -> bool:
    """Membership in ``0 < x1 <= s1_in, 0 < x2 <= x1 + s2_in``."""
    x1, x2 = state
    return 0.0 < x1 <= config.s1_in and 0.0 < x2 <= x1 + config.s2_in


def _bisect_decreasing(fn, lo, hi, target):
    """x in [lo, hi] with fn(x) = target for decreasing fn, to float resolution."""
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if fn(mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def graph_domain(model: GrowthModel, config: ChemostatConfig, which: int,
                 D: float) -> Optional[tuple[float, float]]:
    """Interval of ``x1`` on which the nullcline graph exists, or None.

    Graph 1 exists where ``Phi1(x1, 0) <= D <= f1(s1_in - x1, 0)``; both
    bounds decrease with ``x1``.  Graph 2 exists where ``Phi2(x1, 0) >= D``,
    which increases with ``x1``.
    """
    s1in, s2in = config.s1_in, config.s2_in
    if which == 1:
        bottom = lambda x: model.rate(1, s1in - x, s2in + x)
        top = lambda x: model.rate(1, s1in - x, 0.0)
        if top(0.0) < D:
            return None
        lo = 0.0 if bottom(0.0) <= D else _bisect_decreasing(bottom, 0.0, s1in, D)
        hi = s1in if top(s1in) >= D else _bisect_decreasing(top, 0.0, s1in, D)
        return (lo, hi) if lo <= hi else None
    bottom = lambda x: model.rate(2, s1in - x, s2in + x)
    if bottom(s1in) < D:
        return None
    if bottom(0.0) >= D:
        return 0.0, s1in
    neg = lambda x: -bottom(x)
    return _bisect_decreasing(neg, 0.0, s1in, -D), s1in


def nullcline_polyline(model, config, which, D, n: int = 400) -> np.ndarray:
    """Sampled points ``(x1, F_which(x1))`` of a nullcline graph, shape (k, 2)."""
    dom = graph_domain(model, config, which, D)
    if dom is None:
        return np.empty((0, 2))
    xs = np.linspace(dom[0], dom[1], n)
    ys = graph_values(model, config, which, D, xs)
    keep = ~np.isnan(ys)
    return np.column_stack([xs[keep], ys[keep]])
