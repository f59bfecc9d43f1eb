import numpy as np
import pytest

from ccg import instances
from ccg.brute import brute_oracle
from ccg.deviations import presets
from ccg.game import ConstrainedGame, GameError
from ccg.special import check_fixed_safe_set, solve_special
from ccg.verify import verify


def one_player_game():
    # a0: u=1, c=+1 ; a1: u=0, c=-1
    return ConstrainedGame((2,), np.array([[1.0, 0.0]]), np.array([[[1.0, -1.0]]]))


def test_fixed_safe_set_detection(ex1):
    g = instances.random_marginal_instance(2, 3, 2, 0)
    assert check_fixed_safe_set(g, presets(g, "CCE"))
    check = check_fixed_safe_set(ex1.game, presets(ex1.game, "ALL"))
    assert not check and check.player == 0 and "ALL" in check.reason
    assert not check_fixed_safe_set(ex1.game, presets(ex1.game, "CCE"))
    single = ConstrainedGame((1, 1), np.zeros((2, 1)), np.zeros((2, 1, 1)))
    assert check_fixed_safe_set(single, presets(single, "ALL"))


def test_one_player_boundary():
    g = one_player_game()
    rep = solve_special(g, presets(g, "CCE"), g.utilities[0])
    assert rep.z[0] == pytest.approx(0.5, abs=1e-9)
    assert rep.value == pytest.approx(0.5, abs=1e-9)
    brute = brute_oracle(g, presets(g, "CCE"), g.utilities[0], 100, 1e-3)
    assert brute.value == pytest.approx(0.5, abs=1 / 100)


def test_zero_objective():
    g = instances.random_marginal_instance(2, 2, 1, 3)
    rep = solve_special(g, presets(g, "CCE"), np.zeros(4))
    assert rep.value == 0.0 and rep.max_gap <= 1e-6


def test_refuses_z_dependent_sets(ex1):
    with pytest.raises(GameError, match="run_dynamics"):
        solve_special(ex1.game, presets(ex1.game, "ALL"), ex1.game.utilities[1])


def test_three_action_instance_against_grid():
    g = instances.random_marginal_instance(2, 3, 1, 11)
    polys = presets(g, "CCE")
    obj = instances.social_welfare(g)
    rep = solve_special(g, polys, obj)
    # 9 profiles: the 1/200 grid has ~2.7e13 points, so a 1/20 grid is used here
    brute = brute_oracle(g, polys, obj, 20, 1e-3)
    assert brute.found
    assert rep.value >= brute.value - 2e-2


@pytest.mark.parametrize("seed", range(8))
def test_cut_loop_invariants(seed):
    rng = np.random.default_rng(seed)
    g = instances.random_marginal_instance(2, 2 + seed % 3, 1 + seed % 2, 50 + seed)
    polys = presets(g, "CCE")
    rep = solve_special(g, polys, rng.normal(size=g.num_profiles))
    assert all(b <= a + 1e-9 for a, b in zip(rep.history, rep.history[1:]))
    v = verify(g, polys, rep.z)
    assert v.verdict and v.max_gap <= 1e-6 and v.safety.max_residual <= 1e-9
    assert rep.iterations == len(rep.history)
