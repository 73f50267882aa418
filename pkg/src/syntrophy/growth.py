"""Growth-rate families, their partial derivatives and the hypothesis checks.

A growth model is a pair of response functions ``(f1, f2)`` of the two
substrate concentrations ``(s1, s2)``.  Species 1 needs ``s1`` and is inhibited
by ``s2``; species 2 needs ``s2`` and is inhibited by ``s1``.  The sign
conditions are checked by :func:`check_hypotheses`:

* H1: both rates are nonnegative and finite,
* H2: ``f1(0, s2) = 0`` and ``f2(s1, 0) = 0``,
* H3: ``df1/ds1 > 0`` and ``df1/ds2 < 0``,
* H4: ``df2/ds1 < 0`` and ``df2/ds2 > 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError

PARAM_NAMES = ("m1", "K1", "L1", "m2", "K2", "L2")

_FD_REL_STEP = 1e-6
_MAX_LISTED_VIOLATIONS = 50


@dataclass(frozen=True)
class GrowthFamily:
    """A registered growth family.

    ``value(which, s1, s2, params)`` returns the rate of species ``which``.
    ``partials(which, s1, s2, params)`` returns ``(df/ds1, df/ds2)``; when it
    is ``None`` central finite differences are used instead and hypothesis
    reports are flagged accordingly.
    """

    name: str
    value: Callable[[int, float, float, tuple], float]
    partials: Optional[Callable[[int, float, float, tuple], tuple]] = None
    description: str = ""


_FAMILIES: dict[str, GrowthFamily] = {}


def register_family(family: GrowthFamily, *, replace: bool = False) -> None:
    """Make a growth family available under ``family.name``."""
    if family.name in _FAMILIES and not replace:
        raise ValueError(f"growth family {family.name!r} already registered")
    _FAMILIES[family.name] = family


def get_family(name: str) -> GrowthFamily:
    try:
        return _FAMILIES[name]
    except KeyError:
        raise ConfigError(
            f"unknown growth family {name!r}; registered: {sorted(_FAMILIES)}"
        ) from None


def registered_families() -> list[str]:
    return sorted(_FAMILIES)


# Monod-type product family: a Monod term in the limiting substrate times a
# hyperbolic inhibition term in the other one.

def _monod_value(which, s1, s2, p):
    m1, K1, L1, m2, K2, L2 = p
    if which == 1:
        return m1 * s1 / ((K1 + s1) * (L1 + s2))
    return m2 * s2 / ((K2 + s2) * (L2 + s1))


def _monod_partials(which, s1, s2, p):
    m1, K1, L1, m2, K2, L2 = p
    if which == 1:
        a = K1 + s1
        b = L1 + s2
        return m1 * K1 / (a * a * b), -m1 * s1 / (a * b * b)
    a = K2 + s2
    b = L2 + s1
    return -m2 * s2 / (a * b * b), m2 * K2 / (a * a * b)


# Negative control: both rates Monod in s1 and inhibited by s2.  The second
# rate then grows with s1 and does not vanish at s2 = 0, so H2 and H4 fail.

def _shared_s1_value(which, s1, s2, p):
    m1, K1, L1, m2, K2, L2 = p
    if which == 1:
        return m1 * s1 / ((K1 + s1) * (L1 + s2))
    return m2 * s1 / ((K2 + s1) * (L2 + s2))


def _shared_s1_partials(which, s1, s2, p):
    m1, K1, L1, m2, K2, L2 = p
    if which == 1:
        return _monod_partials(1, s1, s2, p)
    a = K2 + s1
    b = L2 + s2
    return m2 * K2 / (a * a * b), -m2 * s1 / (a * b * b)


register_family(GrowthFamily(
    "monod_product", _monod_value, _monod_partials,
    "f1 = m1 s1/((K1+s1)(L1+s2)), f2 = m2 s2/((K2+s2)(L2+s1))",
))
register_family(GrowthFamily(
    "monod_shared_s1", _shared_s1_value, _shared_s1_partials,
    "f1 = m1 s1/((K1+s1)(L1+s2)), f2 = m2 s1/((K2+s1)(L2+s2)); violates H2/H4",
))


@dataclass(frozen=True)
class GrowthModel:
    """A growth family together with its six positive parameters."""

    family: str = "monod_product"
    m1: float = 8.0
    K1: float = 1.0
    L1: float = 2.0
    m2: float = 4.0
    K2: float = 2.0
    L2: float = 1.0

    def __post_init__(self):
        get_family(self.family)
        for name in PARAM_NAMES:
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ConfigError(f"growth parameter {name} must be a positive number, got {v!r}")

    @property
    def params(self) -> tuple:
        return tuple(float(getattr(self, n)) for n in PARAM_NAMES)

    @property
    def has_analytic_partials(self) -> bool:
        return get_family(self.family).partials is not None

    # Unchecked evaluation used by the numerical kernels; callers guarantee
    # the arguments are meaningful.
    def rate(self, which: int, s1: float, s2: float) -> float:
        return get_family(self.family).value(which, s1, s2, self.params)

    def rates(self, s1: float, s2: float) -> tuple[float, float]:
        fam = get_family(self.family)
        p = self.params
        return fam.value(1, s1, s2, p), fam.value(2, s1, s2, p)

    def partials(self, which: int, s1: float, s2: float) -> tuple[float, float]:
        fam = get_family(self.family)
        if fam.partials is not None:
            return fam.partials(which, s1, s2, self.params)
        return _fd_partials(self, which, s1, s2)


def _fd_partials(model, which, s1, s2):
    out = []
    for axis, s in enumerate((s1, s2)):
        h = _FD_REL_STEP * (1.0 + abs(s))
        lo = max(s - h, 0.0)
        hi = s + h
        if axis == 0:
            d = (model.rate(which, hi, s2) - model.rate(which, lo, s2)) / (hi - lo)
        else:
            d = (model.rate(which, s1, hi) - model.rate(which, s1, lo)) / (hi - lo)
        out.append(d)
    return tuple(out)


@dataclass(frozen=True)
class ChemostatConfig:
    """Operating conditions of the (scaled) chemostat.

    ``s1_in`` and ``s2_in`` are the scaled inflow concentrations.  When the
    configuration was read with yields, ``yields`` holds ``(k1, k2, k3)``.
    """

    D: float
    s1_in: float
    s2_in: float
    yields: Optional[tuple] = None

    def __post_init__(self):
        for name in ("D", "s1_in", "s2_in"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be a positive number, got {v!r}")
        if self.yields is not None:
            if len(self.yields) != 3 or any(not (k > 0) for k in self.yields):
                raise ConfigError(f"yields must be three positive numbers, got {self.yields!r}")

    def with_D(self, D: float) -> "ChemostatConfig":
        return ChemostatConfig(D, self.s1_in, self.s2_in, self.yields)


@dataclass
class HypothesisReport:
    """Outcome of :func:`check_hypotheses`.

    ``violations`` lists at most 50 ``(hypothesis, (s1, s2), value)`` entries
    per hypothesis; ``counts`` holds the full tallies.
    """

    violations: list = field(default_factory=list)
    counts: dict = field(default_factory=dict)
    finite_difference: bool = False
    n_points: int = 0

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "pass": self.passed,
            "violations": [
                {"hypothesis": h, "s1": p[0], "s2": p[1], "value": v}
                for h, p, v in self.violations
            ],
            "counts": dict(self.counts),
            "finite_difference": self.finite_difference,
            "n_points": self.n_points,
        }


def _check_nonneg(s1, s2):
    if not (s1 >= 0 and s2 >= 0):
        raise ValueError(f"substrate concentrations must be nonnegative, got ({s1}, {s2})")


def eval_growth(model: GrowthModel, which: int, s1: float, s2: float) -> float:
    """Growth rate of species ``which`` (1 or 2) at ``(s1, s2)``."""
    if which not in (1, 2):
        raise ValueError("which must be 1 or 2")
    _check_nonneg(s1, s2)
    return model.rate(which, float(s1), float(s2))


def eval_partials(model: GrowthModel, which: int, s1: float, s2: float) -> tuple[float, float]:
    """``(df/ds1, df/ds2)`` of species ``which`` at ``(s1, s2)``."""
    if which not in (1, 2):
        raise ValueError("which must be 1 or 2")
    _check_nonneg(s1, s2)
    return model.partials(which, float(s1), float(s2))


def default_grid(config: ChemostatConfig, n: int = 50) -> tuple:
    return (2.0 * config.s1_in, 2.0 * (config.s1_in + config.s2_in), n, n)


def check_hypotheses(model: GrowthModel, grid_spec: tuple) -> HypothesisReport:
    """Sample H1-H4 on a rectangular grid.

    Parameters
    ----------
    grid_spec : tuple
        ``(s1_max, s2_max, n1, n2)``; the grid is ``linspace(0, s1_max, n1)``
        by ``linspace(0, s2_max, n2)``.  H2 is checked exactly on the axes,
        H3/H4 at every point with both coordinates positive.
    """
    s1_max, s2_max, n1, n2 = grid_spec
    s1s = np.linspace(0.0, s1_max, int(n1)) if n1 > 1 else np.array([0.0])
    s2s = np.linspace(0.0, s2_max, int(n2)) if n2 > 1 else np.array([0.0])
    report = HypothesisReport(finite_difference=not model.has_analytic_partials)
    counts = {"H1": 0, "H2": 0, "H3": 0, "H4": 0}

    def flag(h, s1, s2, v):
        counts[h] += 1
        if counts[h] <= _MAX_LISTED_VIOLATIONS:
            report.violations.append((h, (float(s1), float(s2)), float(v)))

    for s1 in s1s:
        for s2 in s2s:
            s1 = float(s1)
            s2 = float(s2)
            report.n_points += 1
            f1, f2 = model.rates(s1, s2)
            for v in (f1, f2):
                if not (math.isfinite(v) and v >= 0):
                    flag("H1", s1, s2, v)
            if s1 == 0.0 and f1 != 0.0:
                flag("H2", s1, s2, f1)
            if s2 == 0.0 and f2 != 0.0:
                flag("H2", s1, s2, f2)
            if s1 > 0.0 and s2 > 0.0:
                d11, d12 = model.partials(1, s1, s2)
                d21, d22 = model.partials(2, s1, s2)
                if not d11 > 0:
                    flag("H3", s1, s2, d11)
                if not d12 < 0:
                    flag("H3", s1, s2, d12)
                if not d21 < 0:
                    flag("H4", s1, s2, d21)
                if not d22 > 0:
                    flag("H4", s1, s2, d22)
    report.counts = counts
    return report


def scale_parameters(S1_in: float, S2_in: float, k1: float, k2: float, k3: float) -> tuple[float, float]:
    """Scaled inflow concentrations ``(k1/k3 * S1_in, S2_in)``.

    ``k2`` only rescales the second biomass and leaves the inflows unchanged.
    """
    for name, v in (("k1", k1), ("k2", k2), ("k3", k3)):
        if not v > 0:
            raise ValueError(f"yield {name} must be positive, got {v!r}")
    if not (S1_in > 0 and S2_in > 0):
        raise ValueError("inflow concentrations must be positive")
    return k1 / k3 * S1_in, float(S2_in)


def monod_vector(model: GrowthModel, config: ChemostatConfig) -> np.ndarray:
    """Packed ``[m1, K1, L1, m2, K2, L2, s1_in, s2_in]`` for the compiled kernels."""
    return np.array(model.params + (config.s1_in, config.s2_in), dtype=np.float64)
