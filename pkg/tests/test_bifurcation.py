import math

import numpy as np
import pytest

from syntrophy.bifurcation import (coalescence_witnesses, find_tangency, signature, sweep,
                                   witnesses)
from syntrophy.equilibria import all_equilibria
from syntrophy.schema import BRANCH_SCHEMA, validate


@pytest.fixture(scope="module")
def diagram10():
    from syntrophy.growth import ChemostatConfig, GrowthModel
    return sweep(GrowthModel(), ChemostatConfig(0.5, 3, 3), 0.1, 1.5)


def test_p10_events(diagram10):
    ev = diagram10.events
    assert len(ev) == 4
    for e, target in zip(ev, (0.6, 8 / 9, 1.0, 1.2)):
        assert abs(e.D - target) < 1e-6
        assert e.bracket[1] - e.bracket[0] <= 1e-8
    assert [e.kind for e in ev] == ["F2_vanishes", "F1_exchanges_stability", "saddle_node",
                                    "F1_vanishes"]


def test_p10_witnesses(diagram10):
    pairs = {round(e.D, 4): tuple(sorted(w.kind for w in ws)) for e, ws in coalescence_witnesses(diagram10)}
    assert pairs[0.6] == ("F0", "F2_boundary")
    assert pairs[round(8 / 9, 4)] == ("F1_boundary", "F_star")
    assert pairs[1.0] == ("F_star", "F_star")
    assert pairs[1.2] == ("F0", "F1_boundary")
    for e in diagram10.events:
        if e.kind != "saddle_node":
            assert e.separation < 1e-4


def test_constant_between_events(diagram10):
    edges = [0.0] + [e.D for e in diagram10.events] + [math.inf]
    for a, b in zip(edges, edges[1:]):
        sigs = {signature(eqs) for D, eqs in zip(diagram10.D_samples, diagram10.branches)
                if a + 1e-6 < D < b - 1e-6}
        assert len(sigs) <= 1


def test_no_events_single_regime(p10, cfg):
    assert sweep(p10, cfg, 0.1, 0.5).events == []


def test_p11_events(p11, cfg):
    d = sweep(p11, cfg, 1.2, 1.6)
    Ds = [e.D for e in d.events]
    assert any(abs(D - 21 / 16) < 1e-6 for D in Ds)
    assert any(abs(D - 4 / 3) < 1e-6 for D in Ds)
    # the third event is the D3 crossing, which exists because D1 > D2
    from syntrophy.equilibria import compute_thresholds
    th = compute_thresholds(p11, cfg)
    extra = [e for e in d.events if abs(e.D - 21 / 16) > 1e-6 and abs(e.D - 4 / 3) > 1e-6]
    assert len(extra) == 1 and abs(extra[0].D - th.D3) < 1e-6
    assert extra[0].kind == "F1_exchanges_stability"


def test_doubling_samples_same_events(p11, cfg):
    a = sweep(p11, cfg, 1.2, 1.6)
    b = sweep(p11, cfg, 1.2, 1.6, n_samples=2 * len(a.D_samples))
    assert [e.kind for e in a.events] == [e.kind for e in b.events]
    assert np.allclose([e.D for e in a.events], [e.D for e in b.events], atol=1e-7)


def test_tangency_p10(p10, cfg):
    t = find_tangency(p10, cfg, (0.95, 1.05))
    assert abs(t.D - 1.0) < 1e-6
    assert t.bracket[1] - t.bracket[0] <= 1e-9
    # at D = 1 the tangency point is (2, 3)
    assert np.allclose(t.point, (2.0, 3.0), atol=1e-3)


def test_tangency_none(p10, cfg):
    assert find_tangency(p10, cfg, (0.3, 0.5)) is None


def test_tangency_p11_against_direct_solve(p11, cfg):
    """Cross-check against a Newton solve of F1 = F2, F1' = F2' in (x1, x2, D)."""
    from scipy.optimize import fsolve
    from syntrophy.planar import phi, jacobian
    t = find_tangency(p11, cfg, (1.5, 1.7))
    assert t is not None and 1.5 < t.D < 1.7

    def eqs(v):
        x1, x2, D = v
        J = jacobian(p11, cfg, D, (x1, x2))
        return [phi(p11, cfg, 1, (x1, x2)) - D, phi(p11, cfg, 2, (x1, x2)) - D, np.linalg.det(J)]

    sol = fsolve(eqs, [t.point[0], t.point[1], t.D], xtol=1e-12)
    assert abs(sol[2] - t.D) < 1e-6
    assert np.allclose(sol[:2], t.point, atol=1e-3)


def test_det_scales_like_sqrt_offset(p10, cfg):
    """Near the fold det(J*) vanishes like sqrt(1 - D)."""
    dets = []
    for off in (1e-4, 1e-6, 1e-8):
        pos = [e for e in all_equilibria(p10, cfg, 1.0 - off) if e.kind == "F_star"]
        dets.append(max(abs(np.linalg.det(e.jacobian)) for e in pos))
    assert dets[0] > dets[1] > dets[2]
    ratios = [dets[0] / dets[1], dets[1] / dets[2]]
    assert all(5 < r < 20 for r in ratios)


def test_export(diagram10):
    doc = diagram10.to_dict()
    validate(doc, BRANCH_SCHEMA)
    rows = list(diagram10.rows())
    assert rows[0][1] == "F0" and len(rows[0]) == 5
    assert len(doc["samples"]) == len(diagram10.D_samples)


def test_sweep_input_errors(p10, cfg):
    with pytest.raises(ValueError):
        sweep(p10, cfg, 0.5, 0.5)
    with pytest.raises(ValueError):
        sweep(p10, cfg, 0.1, 0.5, n_samples=1)
