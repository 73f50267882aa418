import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from syntrophy.errors import OutOfRegionError
from syntrophy.growth import ChemostatConfig
from syntrophy.planar import (graph_domain, graph_slope, graph_value, graph_values, in_region,
                              jacobian, nullcline_polyline, phi, vector_field)

R2 = math.sqrt(2)
XBAR = (37 - math.sqrt(649)) / 6


def test_phi_values(p10, cfg):
    assert phi(p10, cfg, 1, (0, 0)) == pytest.approx(1.2, abs=1e-15)
    assert phi(p10, cfg, 1, (3, 0)) == 0.0
    assert phi(p10, cfg, 1, (1, 0)) == pytest.approx(8 / 9, abs=1e-15)
    assert phi(p10, cfg, 2, (1, 0)) == pytest.approx(8 / 9, abs=1e-15)


def test_phi_out_of_region(p10, cfg):
    with pytest.raises(OutOfRegionError):
        phi(p10, cfg, 1, (3.5, 0))
    with pytest.raises(OutOfRegionError):
        phi(p10, cfg, 2, (1, 4.5))


def test_graph_values(p10, cfg):
    assert graph_value(p10, cfg, 1, 0.6, XBAR) == pytest.approx(0.0, abs=1e-10)
    assert graph_value(p10, cfg, 2, 0.5, 0.0) == pytest.approx(1.0, abs=1e-11)
    assert graph_value(p10, cfg, 1, 0.5, 2 * R2) == pytest.approx(6 * R2 - 3, abs=1e-11)


def test_graph_absent(p10, cfg):
    # f1(s1, 0) never exceeds 3, so graph 1 is empty above it
    assert graph_domain(p10, cfg, 1, 3.5) is None
    assert graph_value(p10, cfg, 1, 3.5, 0.5) is None
    v = graph_values(p10, cfg, 1, 3.5, np.array([0.5, 1.0]))
    assert np.isnan(v).all()
    # left of its domain graph 1 would need x2 < 0
    assert graph_value(p10, cfg, 1, 0.5, 1.0) is None


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, 1.15), st.floats(0.0, 1.0))
def test_graph_residual_and_slope(D, u):
    from syntrophy.growth import GrowthModel
    m, c = GrowthModel(), ChemostatConfig(0.5, 3, 3)
    for which in (1, 2):
        dom = graph_domain(m, c, which, D)
        if dom is None:
            continue
        x1 = dom[0] + u * (dom[1] - dom[0])
        x2 = graph_value(m, c, which, D, x1)
        if x2 is None:
            continue
        assert abs(phi(m, c, which, (x1, x2)) - D) <= 1e-10 * (1 + D)
        assert graph_slope(m, c, which, D, x1) > 1


def test_slope_matches_finite_difference(p10, cfg):
    for which, D, x1 in ((1, 0.5, 2.5), (2, 0.5, 1.5), (1, 0.95, 1.0), (2, 0.95, 2.5)):
        h = 1e-5
        fd = (graph_value(p10, cfg, which, D, x1 + h) - graph_value(p10, cfg, which, D, x1 - h)) / (2 * h)
        assert graph_slope(p10, cfg, which, D, x1) == pytest.approx(fd, rel=1e-5)


def test_monotonicity(p10, cfg):
    xs = np.linspace(0, 3, 200)
    a = [phi(p10, cfg, 1, (x, 0)) for x in xs]
    b = [phi(p10, cfg, 2, (x, 0)) for x in xs]
    assert np.all(np.diff(a) < 0) and np.all(np.diff(b) > 0)
    ys = np.linspace(0, 3, 200)
    c = [phi(p10, cfg, 2, (0, y)) for y in ys]
    assert np.all(np.diff(c) < 0)
    # phi1 rises with x2 at fixed x1, phi2 falls
    for x1 in (0.5, 1.5, 2.5):
        ys = np.linspace(0, x1 + 3, 100)
        p1 = [phi(p10, cfg, 1, (x1, y)) for y in ys]
        p2 = [phi(p10, cfg, 2, (x1, y)) for y in ys]
        assert np.all(np.diff(p1) > 0) and np.all(np.diff(p2) < 0)


def test_graphs_avoid_boundaries(p10, cfg):
    for D in (0.3, 0.5, 0.7, 0.95, 1.1):
        g1 = nullcline_polyline(p10, cfg, 1, D)
        if len(g1):
            assert g1[:, 0].max() < cfg.s1_in
        g2 = nullcline_polyline(p10, cfg, 2, D)
        if len(g2):
            assert np.all(g2[:, 1] < g2[:, 0] + cfg.s2_in)


def test_in_region(cfg):
    assert in_region(cfg, (3, 6))
    assert not in_region(cfg, (0, 1))
    assert not in_region(cfg, (1, 0))
    assert in_region(cfg, (2 * R2, 6 * R2 - 3))
    assert not in_region(cfg, (1, 4.5))


def test_jacobian_matches_finite_differences(p10, cfg):
    for D, p in ((0.5, (1.0, 2.0)), (0.95, (2.0, 1.0)), (0.7, (2.5, 4.0))):
        J = jacobian(p10, cfg, D, p)
        h = 1e-6
        fd = np.empty((2, 2))
        for k in range(2):
            e = np.zeros(2)
            e[k] = h
            fd[:, k] = (vector_field(p10, cfg, D, np.add(p, e)) - vector_field(p10, cfg, D, np.subtract(p, e))) / (2 * h)
        assert np.allclose(J, fd, rtol=1e-6, atol=1e-9)
