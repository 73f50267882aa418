import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from oracles import FSTAR_05
from syntrophy.dynamics import (FullState, conservation_defect, detect_attractor, integrate_full,
                                integrate_reduced, lift_to_full, omega_deviation, run_to_attractor)
from syntrophy.equilibria import all_equilibria
from syntrophy.errors import OutOfRegionError
from syntrophy.growth import ChemostatConfig, GrowthModel
from syntrophy.planar import PlanarState


def full_rhs(model, config, D):
    def f(t, y):
        s1, x1, s2, x2 = y
        f1, f2 = model.rates(max(s1, 0.0), max(s2, 0.0))
        return [D * (config.s1_in - s1) - f1 * x1, (f1 - D) * x1,
                D * (config.s2_in - s2) - f2 * x2 + f1 * x1, (f2 - D) * x2]
    return f


def test_matches_reference_solver(p10, cfg):
    y0 = [1.0, 0.5, 1.0, 0.2]
    t = np.linspace(0, 40, 81)
    tr = integrate_full(p10, cfg, y0, 40.0, t_eval=t)
    ref = solve_ivp(full_rhs(p10, cfg, 0.5), (0, 40), y0, method="DOP853", t_eval=t,
                    rtol=1e-12, atol=1e-14)
    assert np.max(np.abs(tr.states - ref.y.T)) < 1e-7
    assert np.array_equal(tr.times, t)


def test_conservation_random_starts(p10):
    rng = np.random.default_rng(7)
    for D in (0.5, 0.95, 1.3):
        c = ChemostatConfig(D, 3, 3)
        for _ in range(10):
            y0 = rng.uniform(0, 6, 4)
            tr = integrate_full(p10, c, y0)
            assert tr.termination == "t_end"
            assert max(conservation_defect(c, tr)) <= 1e-8
            assert np.all(tr.states >= 0)


def test_washout_start(p10, cfg):
    tr = integrate_full(p10, cfg, [0, 0, 0, 0])
    assert max(conservation_defect(cfg, tr)) <= 1e-8
    assert np.allclose(tr.final, [3, 0, 3, 0], atol=1e-8)
    assert np.all(tr.states[:, [1, 3]] == 0)


def test_stays_on_invariant_set(p10, cfg):
    y0 = list(lift_to_full(cfg, (1.0, 2.0)))
    tr = integrate_full(p10, cfg, y0, 50.0)
    assert omega_deviation(cfg, tr) <= 1e-8


def test_zero_biomass_stays_zero(p10, cfg):
    tr = integrate_full(p10, cfg, [1.0, 0.7, 2.0, 0.0], 50.0)
    assert np.all(tr.states[:, 3] == 0.0)
    tr = integrate_reduced(p10, cfg, (0.0, 1.5), 50.0)
    assert np.all(tr.states[:, 0] == 0.0)


def test_equilibrium_is_stationary(p10, cfg):
    tr = integrate_reduced(p10, cfg, FSTAR_05, 100.0)
    assert np.max(np.abs(tr.states - np.array(FSTAR_05))) <= 1e-9


def test_reduced_converges_to_positive(p10, cfg):
    tr = integrate_reduced(p10, cfg, (0.1, 0.1))
    assert np.allclose(tr.final, FSTAR_05, atol=1e-7)
    assert detect_attractor(tr, all_equilibria(p10, cfg, 0.5)) == "F_star"


def test_axis_flow_to_boundary_equilibrium(p10, cfg):
    eqs = all_equilibria(p10, cfg, 0.95)
    f1 = [e for e in eqs if e.kind == "F1_boundary"][0]
    tr = integrate_reduced(p10, cfg, (2.9, 0.0), D=0.95, t_eval=np.linspace(0, 100, 101))
    assert np.all(np.diff(tr.states[:, 0]) <= 0)
    assert tr.final[0] == pytest.approx(f1.x1, abs=1e-7)


@pytest.mark.parametrize("D,start,kind", [
    (0.5, (1.5, 2.0), "F_star"),
    (1.3, (1.5, 2.0), "F0"),
])
def test_detect_attractor_p10(p10, cfg, D, start, kind):
    tr = integrate_reduced(p10, cfg, start, D=D)
    assert detect_attractor(tr, all_equilibria(p10, cfg, D)) == kind


def test_detect_attractor_p11(p11, cfg):
    eqs = all_equilibria(p11, cfg, 1.5)
    assert detect_attractor(integrate_reduced(p11, cfg, (0.05, 0.05), D=1.5), eqs) == "F0"
    assert detect_attractor(integrate_reduced(p11, cfg, (2.5, 4.0), D=1.5), eqs) == "F_star"


def test_unsettled_is_none(p10, cfg):
    tr = integrate_reduced(p10, cfg, (0.1, 0.1), 1.0)
    assert detect_attractor(tr, all_equilibria(p10, cfg, 0.5)) is None


def test_run_to_attractor_stops_early(p10, cfg):
    eqs = [e for e in all_equilibria(p10, cfg, 0.5) if e.stability == "stable_node"]
    tr = run_to_attractor(p10, cfg, 0.5, (0.1, 0.1), eqs)
    assert tr.termination == "converged" and tr.times[-1] < 1000.0
    assert detect_attractor(tr, eqs) == "F_star"


def test_lift(cfg):
    assert tuple(lift_to_full(cfg, (0, 0))) == (3, 0, 3, 0)
    s = lift_to_full(cfg, FSTAR_05)
    assert s.s1 == pytest.approx(3 - 2 * math.sqrt(2), abs=1e-15)
    assert s.s2 == pytest.approx(6 - 4 * math.sqrt(2), abs=1e-14)
    assert s.project() == PlanarState(*FSTAR_05)
    with pytest.raises(OutOfRegionError):
        lift_to_full(cfg, (3.5, 0))


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 3), st.floats(0, 1))
def test_lift_project_identity(x1, u):
    c = ChemostatConfig(0.5, 3, 3)
    x2 = u * (x1 + 3)
    assert tuple(lift_to_full(c, (x1, x2)).project()) == (x1, x2)


def test_input_validation(p10, cfg):
    with pytest.raises(ValueError):
        integrate_full(p10, cfg, [-1, 0, 0, 0])
    with pytest.raises(ValueError):
        integrate_full(p10, cfg, [1, 1, 1, 1], t_end=0)
    with pytest.raises(OutOfRegionError):
        integrate_reduced(p10, cfg, (1.0, 4.5))


def test_headers(p10, cfg):
    assert integrate_full(p10, cfg, [1, 1, 1, 1], 1.0).header == "t,s1,x1,s2,x2"
    assert integrate_reduced(p10, cfg, (1, 1), 1.0).header == "t,x1,x2"


def _halving_errors(model, y0, D, T=5.0, levels=6):
    """Final-state error at each tolerance of a halving ladder, each against a
    run at a quarter of that tolerance."""
    c = ChemostatConfig(D, 3, 3)
    out = []
    for k in range(levels):
        r = 1e-4 / 2 ** k
        ref = integrate_full(model, c, y0, T, rtol=r / 4, atol=r / 400).final
        out.append(np.max(np.abs(integrate_full(model, c, y0, T, rtol=r, atol=r / 100).final - ref)))
    return np.array(out)


def _starts():
    rng = np.random.default_rng(11)
    return [list(rng.uniform(0, 5, 4)) for _ in range(20)]


@pytest.mark.parametrize("D", [0.5, 0.95])
def test_tolerance_halving_aggregate(p10, D):
    total = sum(_halving_errors(p10, y0, D) for y0 in _starts())
    assert np.all(np.diff(total) <= 0)


@pytest.mark.xfail(strict=True, reason="adaptive embedded pairs are not tolerance-proportional "
                                       "trajectory by trajectory; see the decisions ledger")
def test_tolerance_halving_every_trajectory(p10):
    for D in (0.5, 0.95):
        for y0 in _starts():
            assert np.all(np.diff(_halving_errors(p10, y0, D)) <= 0)


def test_full_and_reduced_agree_on_invariant_set(p10, cfg):
    p = (1.0, 2.0)
    t = np.linspace(0, 20, 21)
    a = integrate_full(p10, cfg, list(lift_to_full(cfg, p)), 20.0, t_eval=t).planar()
    b = integrate_reduced(p10, cfg, p, 20.0, t_eval=t).planar()
    assert np.max(np.abs(a - b)) < 1e-7
