import itertools

import numpy as np
import pytest
from scipy.optimize import linprog

from ccg import instances
from ccg.game import deviation_gradient


@pytest.fixture
def ex1():
    return instances.example1()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def deterministic_deviations(s):
    """All s**s deterministic row-stochastic matrices."""
    for targets in itertools.product(range(s), repeat=s):
        phi = np.zeros((s, s))
        phi[np.arange(s), targets] = 1.0
        yield phi


def scipy_best_deviation(game, poly, z, i, cost_bound=0.0):
    """Independent LP oracle (HiGHS) for max u_i(phi <> z) over safe phi in poly."""
    s = poly.size
    grad = deviation_gradient(game, game.utilities[i], z, i).ravel()
    K = [deviation_gradient(game, game.costs[i, j], z, i).ravel() for j in range(game.m)]
    A = [poly.M.reshape(poly.num_rows, s * s)] + ([np.array(K)] if K else [])
    b = [poly.d] + ([np.full(game.m, cost_bound)] if K else [])
    E = np.kron(np.eye(s), np.ones((1, s)))
    res = linprog(-grad, A_ub=np.vstack(A), b_ub=np.concatenate(b), A_eq=E, b_eq=np.ones(s),
                  bounds=(0, None), method="highs")
    if res.status == 2:
        return None
    assert res.status == 0
    return -res.fun
