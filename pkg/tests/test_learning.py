import csv

import numpy as np
import pytest

from ccg import instances
from ccg.deviations import Preset, constant_rows, presets
from ccg.game import ConstrainedGame, GameError
from ccg.learning import TRACE_HEADER, checkpoint_rounds, phi_regret, regret_slope, run_dynamics, write_trace
from ccg.special import safe_polytope


def test_checkpoint_rounds():
    assert checkpoint_rounds(1) == [1]
    assert checkpoint_rounds(8) == [1, 2, 4, 8]
    assert checkpoint_rounds(10) == [1, 2, 4, 8, 10]


def test_one_player_converges_to_boundary():
    g = ConstrainedGame((2,), np.array([[1.0, 0.0]]), np.array([[[1.0, -1.0]]]))
    tr = run_dynamics(g, presets(g, "CCE"), 10_000)
    assert g.utilities[0] @ tr.zbar == pytest.approx(0.5, abs=0.02)


def test_constant_utilities_have_zero_regret():
    g = ConstrainedGame((2, 3), np.full((2, 6), 0.7), np.zeros((2, 0, 6)))
    tr = run_dynamics(g, presets(g, "CCE"), 64)
    for c in tr.checkpoints:
        assert np.abs(c.regret).max() <= 1e-12


@pytest.fixture(scope="module")
def trace():
    g = instances.random_marginal_instance(2, 3, 2, 4)
    return run_dynamics(g, presets(g, "CCE"), 512, seed=4, verify_checkpoints=True)


def test_trace_invariants(trace):
    g = trace.game
    from ccg.game import product_strategy

    for t in (0, 17, 511):
        np.testing.assert_allclose(trace.z[t], product_strategy([trace.x[i][t] for i in range(g.n)]), atol=1e-15)
    incremental = np.zeros(g.num_profiles)
    for t, z in enumerate(trace.z, 1):
        incremental += (z - incremental) / t
    assert np.abs(incremental - trace.zbar).max() <= 1e-12
    assert all(c.verified for c in trace.checkpoints)
    assert max(c.max_cost_residual for c in trace.checkpoints) <= 1e-9


def test_iterates_stay_in_safe_polytope(trace):
    from ccg.deviations import contains

    for i, poly in enumerate(trace.polys):
        for phi in trace.phis[i][::37]:
            assert contains(poly, phi, 1e-8)


def test_phi_regret_matches_vertex_hindsight(trace):
    from ccg.brute import safe_vertices
    from ccg.game import Deviation, apply_deviation

    g = trace.game
    for i in range(g.n):
        V = safe_vertices(g, presets(g, "CCE")[i], i)
        best = max(
            sum(g.utilities[i] @ apply_deviation(g, z, Deviation(i, constant_rows(np.clip(h, 0, None) / np.clip(h, 0, None).sum()))) for z in trace.z)
            for h in V
        )
        direct = best - trace.utilities[:, i].sum()
        assert phi_regret(trace, trace.polys[i], i) == pytest.approx(direct, abs=1e-7)
        assert trace.checkpoints[-1].regret[i] == pytest.approx(direct, abs=1e-7)


def test_single_vertex_regret(trace):
    g = trace.game
    from ccg.deviations import DeviationPolytope
    from ccg.game import Deviation, apply_deviation

    s = g.actions[0]
    h = np.eye(s)[0]
    # pin phi to the constant row e_0 with equality pairs on every entry
    base = presets(g, "CCE")[0]
    M, d = [], []
    for a in range(s):
        E = np.zeros((s, s))
        E[0, a] = 1.0
        M += [E, -E]
        d += [h[a], -h[a]]
    poly = base.with_rows(np.array(M), np.array(d))
    direct = sum(g.utilities[0] @ apply_deviation(g, z, Deviation(0, constant_rows(h))) - g.utilities[0] @ z
                 for z in trace.z)
    assert phi_regret(trace, poly, 0) == pytest.approx(direct, abs=1e-9)
    assert isinstance(poly, DeviationPolytope) and poly.tag is Preset.CCE


def test_determinism_and_trace_file(tmp_path):
    g = instances.random_marginal_instance(2, 2, 1, 8)
    a = run_dynamics(g, presets(g, "CCE"), 200, seed=1)
    b = run_dynamics(g, presets(g, "CCE"), 200, seed=1)
    assert np.array_equal(a.z, b.z) and all(np.array_equal(x, y) for x, y in zip(a.phis, b.phis))
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_trace(a, p1)
    write_trace(b, p2)
    assert p1.read_bytes() == p2.read_bytes()
    rows = list(csv.reader(p1.open()))
    assert tuple(rows[0]) == TRACE_HEADER
    assert len(rows) - 1 == len(checkpoint_rounds(200)) * g.n
    for r in rows[1:]:
        assert float(r[3]) == pytest.approx(float(r[2]) / int(r[0]), abs=1e-12)


def test_one_round_trace(tmp_path):
    g = instances.random_marginal_instance(2, 2, 1, 8)
    tr = run_dynamics(g, presets(g, "CCE"), 1)
    write_trace(tr, tmp_path / "t.csv")
    assert len((tmp_path / "t.csv").read_text().splitlines()) == 1 + g.n


def test_slope_needs_two_checkpoints(trace):
    with pytest.raises(GameError):
        regret_slope(trace, t_min=512)
    assert regret_slope(trace, t_min=64) <= 1.0


def test_refuses_z_dependent_sets(ex1):
    with pytest.raises(GameError):
        run_dynamics(ex1.game, presets(ex1.game, "ALL"), 10)
    g = instances.random_marginal_instance(2, 2, 1, 8)
    with pytest.raises(GameError):
        run_dynamics(g, presets(g, "CCE"), 0)


def test_safe_polytope_members_are_safe(rng):
    g = instances.random_marginal_instance(2, 3, 2, 6)
    from ccg.deviations import contains, tilde_cost

    poly = safe_polytope(g, presets(g, "CCE")[1], 1)
    for _ in range(200):
        phi = constant_rows(rng.dirichlet(np.ones(3)))
        assert contains(poly, phi) == bool(np.all(tilde_cost(g, 1, phi) <= 1e-9))
