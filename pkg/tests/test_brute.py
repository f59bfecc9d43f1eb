import math

import numpy as np
import pytest

from ccg import instances
from ccg.brute import brute_oracle, enumerate_vertices, grid_size, product_grid_search
from ccg.deviations import presets
from ccg.game import ConstrainedGame
from ccg.verify import verify


def test_example1_grid(ex1):
    res = brute_oracle(ex1.game, presets(ex1.game, "ALL"), ex1.game.utilities[1], 60, 1e-3)
    assert res.found and not res.partial
    assert res.value >= 1 / 3  # z1 lies on the grid for k divisible by 3
    assert res.points == grid_size(60, 4) == math.comb(63, 3)
    assert verify(ex1.game, presets(ex1.game, "ALL"), res.z, eps=1e-3).verdict


def test_empty_safe_grid():
    g = ConstrainedGame((1, 2), np.zeros((2, 2)), np.full((2, 1, 2), 0.5))
    res = brute_oracle(g, presets(g, "ALL"), np.ones(2), 10, 1e-3)
    assert not res.found and res.safe_points == 0


def test_budget_flags_partial():
    g = instances.random_marginal_instance(2, 2, 1, 0)
    res = brute_oracle(g, presets(g, "CCE"), np.ones(4), 200, 1e-3, budget=0.0)
    assert res.partial and res.points < grid_size(200, 4)


def test_threads_do_not_change_result():
    g = instances.random_marginal_instance(2, 2, 2, 1)
    obj = instances.social_welfare(g)
    a = brute_oracle(g, presets(g, "CCE"), obj, 80, 1e-3)
    b = brute_oracle(g, presets(g, "CCE"), obj, 80, 1e-3, threads=3)
    assert a.value == b.value and np.array_equal(a.z, b.z) and a.equilibria == b.equilibria


def test_fixed_and_general_paths_agree():
    """The fixed-set scan and the per-point vertex scan answer the same question."""
    from ccg import brute

    g = instances.random_marginal_instance(2, 2, 1, 5)
    polys = presets(g, "CCE")
    obj = instances.social_welfare(g)
    fixed = brute_oracle(g, polys, obj, 30, 1e-3)
    general = brute._general_scan(g, polys, obj, 30, 1e-3, None, 1e-9)
    assert fixed.value == pytest.approx(general.value, abs=1e-12)


def test_vertex_enumeration_square():
    V = enumerate_vertices(np.zeros((0, 2)), np.zeros(0), np.vstack([np.eye(2), -np.eye(2)]), np.ones(4))
    assert {tuple(v) for v in V} == {(1, 1), (1, -1), (-1, 1), (-1, -1)}


def test_product_search_finds_pure_nash():
    # prisoner's dilemma, harmless cost: (defect, defect) is the only equilibrium
    u = np.array([[0.6, 0.0, 1.0, 0.2], [0.6, 1.0, 0.0, 0.2]])
    g = ConstrainedGame((2, 2), u, np.full((2, 1, 4), -0.5))
    res = product_grid_search(g, presets(g, "ALL"), 10)
    assert res.gap <= 1e-12
    np.testing.assert_allclose(res.z, [0, 0, 0, 1])
