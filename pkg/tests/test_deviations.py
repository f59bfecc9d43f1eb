import numpy as np
import pytest

from ccg import instances
from ccg.brute import enumerate_vertices
from ccg.deviations import (
    DeviationPolytope,
    Preset,
    constant_rows,
    contains,
    own_action_costs,
    preset,
    tilde_cost,
)
from ccg.game import GameError, apply_deviation, expected_costs


def _vertices(poly):
    s = poly.size
    E = np.kron(np.eye(s), np.ones((1, s)))
    G = np.vstack([-np.eye(s * s), poly.M.reshape(poly.num_rows, s * s)])
    h = np.concatenate([np.zeros(s * s), poly.d])
    return enumerate_vertices(E, np.ones(s), G, h)


def _as_set(V):
    return {tuple(np.round(v, 9)) for v in V}


def test_all_preset_vertices_are_deterministic_matrices():
    from conftest import deterministic_deviations

    V = _vertices(preset(0, 2, Preset.ALL))
    assert _as_set(V) == _as_set([p.ravel() for p in deterministic_deviations(2)])


def test_cce_preset_has_constant_row_vertices():
    V = _vertices(preset(0, 2, "CCE"))
    want = [constant_rows(np.eye(2)[a]).ravel() for a in range(2)]
    assert _as_set(V) == _as_set(want)


def test_cce_single_action_is_identity():
    p = preset(0, 1, "CCE")
    assert p.num_rows == 0 and contains(p, np.eye(1))


def test_membership():
    assert contains(preset(0, 3, "ALL"), np.eye(3))
    assert not contains(preset(0, 3, "CCE"), np.eye(3))
    assert not contains(preset(0, 2, "ALL"), np.array([[0.5, 0.4], [0.0, 1.0]]))
    assert contains(preset(0, 3, "ALL"), constant_rows(np.array([0.2, 0.3, 0.5])))


def test_custom_rows_and_cap():
    M = np.zeros((1, 2, 2))
    M[0, 0, 1] = 1.0  # phi[0, 1] <= 0.25
    p = DeviationPolytope(0, 2, M, [0.25])
    assert contains(p, np.eye(2))
    assert not contains(p, np.array([[0.5, 0.5], [0, 1]]))
    with pytest.raises(GameError):
        DeviationPolytope(0, 1, np.zeros((10_001, 1, 1)), np.zeros(10_001))


def test_tilde_cost_cases(rng):
    g = instances.random_marginal_instance(2, 3, 2, 5)
    own = own_action_costs(g, 0)
    assert np.allclose(tilde_cost(g, 0, constant_rows(np.eye(3)[1])), own[:, 1])
    assert np.allclose(tilde_cost(g, 0, constant_rows(np.full(3, 1 / 3))), own.mean(axis=1))
    for _ in range(20):
        h = rng.dirichlet(np.ones(3))
        z = rng.dirichlet(np.ones(g.num_profiles))
        phi = constant_rows(h)
        from ccg.game import Deviation

        direct = expected_costs(g, apply_deviation(g, z, Deviation(0, phi)), 0)
        assert np.abs(direct - tilde_cost(g, 0, phi)).max() <= 1e-12


def test_non_marginal_costs_name_profiles(ex1):
    with pytest.raises(GameError, match=r"profiles \(0, \d\) and \(0, \d\)"):
        own_action_costs(ex1.game, 0)


def test_convexity_and_inclusion(rng):
    for tag in ("ALL", "CCE"):
        p = preset(0, 3, tag)
        for _ in range(20):
            if tag == "ALL":
                a, b = (rng.dirichlet(np.ones(3), size=3) for _ in range(2))
            else:
                a, b = (constant_rows(rng.dirichlet(np.ones(3))) for _ in range(2))
            t = rng.uniform()
            assert contains(p, t * a + (1 - t) * b)
            assert contains(preset(0, 3, "ALL"), a)
