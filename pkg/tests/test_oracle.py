import numpy as np
import pytest
from conftest import deterministic_deviations, scipy_best_deviation

from ccg import instances
from ccg.deviations import presets
from ccg.game import ConstrainedGame, Deviation, apply_deviation, expected_costs, expected_utility
from ccg.oracle import AssumptionViolated, best_safe_deviation, strict_feasibility


def _det_enum(game, z, i):
    """Best safe deterministic deviation (a lower bound on the LP value)."""
    best = -np.inf
    for phi in deterministic_deviations(game.actions[i]):
        dz = apply_deviation(game, z, Deviation(i, phi))
        if np.all(expected_costs(game, dz, i) <= 1e-12):
            best = max(best, expected_utility(game, dz, i))
    return best


def test_example1_player2(ex1):
    polys = presets(ex1.game, "ALL")
    r = best_safe_deviation(ex1.game, polys[1], ex1.z3, 1)
    assert r.best_value == pytest.approx(0.5, abs=1e-9)
    assert r.gap == pytest.approx(1 / 3, abs=1e-9)
    assert r.best_value == pytest.approx(_det_enum(ex1.game, ex1.z3, 1), abs=1e-9)
    r1 = best_safe_deviation(ex1.game, polys[1], ex1.z1, 1)
    assert r1.best_value == pytest.approx(1 / 3, abs=1e-9) and abs(r1.gap) <= 1e-9
    assert r1.best_value == pytest.approx(_det_enum(ex1.game, ex1.z1, 1), abs=1e-9)


def test_constant_utility_has_zero_gap(rng):
    g = ConstrainedGame((2, 3), np.full((2, 6), 0.4), rng.uniform(-1, -0.1, size=(2, 1, 6)))
    z = rng.dirichlet(np.ones(6))
    for i, p in enumerate(presets(g, "ALL")):
        assert abs(best_safe_deviation(g, p, z, i).gap) <= 1e-12


@pytest.mark.parametrize("seed", range(30))
def test_agrees_with_highs_and_dominates_enumeration(seed):
    rng = np.random.default_rng(seed)
    g = instances.random_game(2, 2 + seed % 2, 1 + seed % 2, seed)
    tag = "CCE" if seed % 4 == 0 else "ALL"
    polys = presets(g, tag)
    z = rng.dirichlet(np.ones(g.num_profiles))
    for i in range(2):
        ref = scipy_best_deviation(g, polys[i], z, i)
        if ref is None:
            with pytest.raises(AssumptionViolated):
                best_safe_deviation(g, polys[i], z, i)
            continue
        r = best_safe_deviation(g, polys[i], z, i)
        assert r.best_value == pytest.approx(ref, abs=1e-7)
        assert r.safety_residuals.max() <= 1e-8
        if tag == "ALL":
            assert r.best_value >= _det_enum(g, z, i) - 1e-7


def test_monotone_in_cost_bound(rng):
    g = instances.random_game(2, 3, 2, 3)
    polys = presets(g, "ALL")
    for _ in range(10):
        z = rng.dirichlet(np.ones(9))
        try:
            tight = best_safe_deviation(g, polys[0], z, 0).best_value
        except AssumptionViolated:
            continue
        assert best_safe_deviation(g, polys[0], z, 0, cost_bound=1.0).best_value >= tight - 1e-12


def test_infeasible_reports_assumption(ex1):
    g = ConstrainedGame((2, 2), np.zeros((2, 4)), np.full((2, 1, 4), 0.5))
    with pytest.raises(AssumptionViolated, match="no safe deviation"):
        best_safe_deviation(g, presets(g, "ALL")[0], np.full(4, 0.25), 0)


def test_strict_feasibility_examples(ex1, rng):
    polys = presets(ex1.game, "ALL")
    for _ in range(50):
        z = rng.dirichlet(np.ones(4))
        for i in range(2):
            assert strict_feasibility(ex1.game, polys[i], z, i).rho >= 0.5 - 1e-9
    g = ConstrainedGame((2, 2), np.zeros((2, 4)), np.zeros((2, 2, 4)))
    assert strict_feasibility(g, presets(g, "ALL")[0], np.full(4, 0.25), 0).rho == pytest.approx(0.0, abs=1e-12)
    g0 = ConstrainedGame((2, 2), np.zeros((2, 4)), np.zeros((2, 0, 4)))
    assert strict_feasibility(g0, presets(g0, "ALL")[0], np.full(4, 0.25), 0).rho == np.inf


def test_gadget_margin_from_free_action():
    from ccg.selftest import gadget_graph

    graph = gadget_graph()
    params = instances.GadgetParams(0.5, 1 / 3, 8)
    g = instances.hardness_gadget(graph, params)
    z = instances.completeness_strategy(graph, params, graph.independent_set)
    polys = presets(g, "ALL")
    for i in range(2):
        f = strict_feasibility(g, polys[i], z, i)
        assert f.rho >= 1 / (4 * 64) - 1e-12
        assert expected_costs(g, apply_deviation(g, z, f.witness), i).max() <= -f.rho + 1e-9
