"""Integration of the full and reduced systems and attractor detection.

Full system in scaled variables::

    s1' = D (s1_in - s1) - f1 x1
    x1' = (f1 - D) x1
    s2' = D (s2_in - s2) - f2 x2 + f1 x1
    x2' = (f2 - D) x2

``z1 = s1 + x1`` and ``z2 = s2 + x2 - x1`` relax exponentially at rate ``D``
to ``s1_in`` and ``s2_in``; see :func:`conservation_defect`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _core
from .errors import OutOfRegionError
from .growth import ChemostatConfig, GrowthModel
from .planar import PlanarState

RTOL = 1e-8
ATOL = 1e-10
# transverse modes decay at rate D; keeping h*D at most this value stays well
# inside the stability interval of the explicit pair
STEP_D = 1.0

TERMINATION = {
    _core.EXIT_T_END: "t_end",
    _core.EXIT_CONVERGED: "converged",
    _core.EXIT_FAILED: "blowup_guard",
    _core.EXIT_LEFT_REGION: "left_region",
    _core.EXIT_ARC_CAP: "arc_cap",
}


@dataclass(frozen=True)
class FullState:
    s1: float
    x1: float
    s2: float
    x2: float

    def __iter__(self):
        yield from (self.s1, self.x1, self.s2, self.x2)

    def project(self) -> PlanarState:
        return PlanarState(self.x1, self.x2)


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution.  ``states`` has shape ``(n, 2)`` or ``(n, 4)``."""

    times: np.ndarray
    states: np.ndarray
    termination: str
    D: float
    final_speed: float

    @property
    def reduced(self) -> bool:
        return self.states.shape[1] == 2

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def planar(self) -> np.ndarray:
        """``(x1, x2)`` columns."""
        return self.states if self.reduced else self.states[:, [1, 3]]

    @property
    def header(self) -> str:
        return "t,x1,x2" if self.reduced else "t,s1,x1,s2,x2"


def default_t_end(D: float) -> float:
    return 200.0 / D


def max_step(D: float) -> float:
    return STEP_D / D


def default_radius(point) -> float:
    return 1e-5 * (1.0 + math.hypot(*point))


def _trajectory(result, D) -> Trajectory:
    ts, ys, status, _hit, speed = result
    dim = len(ys[0]) if ys else 0
    return Trajectory(np.asarray(ts, dtype=float), np.asarray(ys, dtype=float).reshape(-1, dim),
                      TERMINATION[status], D, float(speed))


def integrate_full(model: GrowthModel, config: ChemostatConfig, initial, t_end: Optional[float] = None,
                   rtol: float = RTOL, atol: float = ATOL, *, D: Optional[float] = None,
                   t_eval: Optional[Sequence[float]] = None, stop_speed: float = 0.0) -> Trajectory:
    """Integrate the four-dimensional system from ``initial = (s1, x1, s2, x2)``.

    Without ``t_eval`` every accepted step is returned; otherwise the dense
    output is sampled at the requested times.
    """
    D = config.D if D is None else D
    y0 = [float(v) for v in initial]
    if len(y0) != 4 or min(y0) < 0 or not all(map(math.isfinite, y0)):
        raise ValueError(f"initial state must be four nonnegative numbers, got {initial!r}")
    t_end = default_t_end(D) if t_end is None else t_end
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    res = _core.integrate(model, config, D, y0, t_end, rtol, atol, t_eval=t_eval,
                          stop_speed=stop_speed, max_step=max_step(D))
    return _trajectory(res, D)


def _check_closure(config, x1, x2):
    tol = 1e-12 * (1.0 + config.s1_in + config.s2_in)
    if not (-tol <= x1 <= config.s1_in + tol and -tol <= x2 <= x1 + config.s2_in + tol):
        raise OutOfRegionError(f"({x1}, {x2}) is outside the closed admissible region")


def integrate_reduced(model: GrowthModel, config: ChemostatConfig, initial, t_end: Optional[float] = None,
                      rtol: float = RTOL, atol: float = ATOL, *, D: Optional[float] = None,
                      t_eval: Optional[Sequence[float]] = None, stop_speed: float = 0.0) -> Trajectory:
    """Integrate the planar system from ``initial = (x1, x2)`` in the closed region."""
    D = config.D if D is None else D
    x1, x2 = (float(v) for v in initial)
    _check_closure(config, x1, x2)
    t_end = default_t_end(D) if t_end is None else t_end
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    res = _core.integrate(model, config, D, [max(x1, 0.0), max(x2, 0.0)], t_end, rtol, atol,
                          t_eval=t_eval, stop_speed=stop_speed, max_step=max_step(D))
    return _trajectory(res, D)


def lift_to_full(config: ChemostatConfig, planar_state) -> FullState:
    """The point of the invariant set above ``(x1, x2)``."""
    x1, x2 = planar_state
    _check_closure(config, x1, x2)
    return FullState(config.s1_in - x1, x1, config.s2_in + x1 - x2, x2)


def conservation_defect(config: ChemostatConfig, trajectory: Trajectory) -> tuple[float, float]:
    """Max deviation of ``z1``, ``z2`` from their closed-form exponentials."""
    if trajectory.reduced:
        raise ValueError("conservation laws concern the full system")
    t = trajectory.times
    s1, x1, s2, x2 = trajectory.states.T
    D = trajectory.D
    decay = np.exp(-D * t)
    z1 = s1 + x1
    z2 = s2 + x2 - x1
    z1_exact = config.s1_in + (z1[0] - config.s1_in) * decay
    z2_exact = config.s2_in + (z2[0] - config.s2_in) * decay
    return float(np.max(np.abs(z1 - z1_exact))), float(np.max(np.abs(z2 - z2_exact)))


def omega_deviation(config: ChemostatConfig, trajectory: Trajectory) -> float:
    """Max distance of the full trajectory from the invariant set."""
    s1, x1, s2, x2 = trajectory.states.T
    return float(max(np.max(np.abs(s1 + x1 - config.s1_in)),
                     np.max(np.abs(s2 + x2 - x1 - config.s2_in))))


def settled_equilibrium(trajectory: Trajectory, equilibria, radius: Optional[float] = None):
    """The equilibrium record the trajectory has settled on, or None."""
    x = trajectory.planar()[-1]
    best = None
    for eq in equilibria:
        r = default_radius((eq.x1, eq.x2)) if radius is None else radius
        d = math.hypot(x[0] - eq.x1, x[1] - eq.x2)
        if d < r and trajectory.final_speed < r * trajectory.D:
            if best is None or d < best[0]:
                best = (d, eq)
    return None if best is None else best[1]


def detect_attractor(trajectory: Trajectory, equilibria, radius: Optional[float] = None) -> Optional[str]:
    """Kind of the equilibrium the trajectory has converged to, or None.

    Settled means the final state is within ``radius`` of the equilibrium
    and the vector-field norm there is below ``radius * D``.  The default
    radius is ``1e-5 * (1 + |equilibrium|)``.
    """
    eq = settled_equilibrium(trajectory, equilibria, radius)
    return None if eq is None else eq.kind


def settle_targets(equilibria, D: float):
    """Target arrays for the integrators' convergence stop."""
    pts = np.array([[e.x1, e.x2] for e in equilibria], dtype=float).reshape(-1, 2)
    radii = np.array([default_radius(p) for p in pts])
    return pts, radii, radii * D


def run_to_attractor(model, config, D, initial, equilibria, t_end: Optional[float] = None,
                     rtol: float = RTOL, atol: float = ATOL) -> Trajectory:
    """Integrate (full or reduced, by the length of ``initial``) until settled on one of ``equilibria``."""
    t_end = 500.0 / D if t_end is None else t_end
    pts, radii, speeds = settle_targets(equilibria, D)
    res = _core.integrate(model, config, D, [float(v) for v in initial], t_end, rtol, atol,
                          targets=pts, radii=radii, speeds=speeds, record=False,
                          max_step=max_step(D))
    return _trajectory(res, D)
