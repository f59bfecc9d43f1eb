"""Randomized invariants of the core operations."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from ccg import instances
from ccg.deviations import constant_rows, contains, preset, tilde_cost
from ccg.game import Deviation, apply_deviation, expected_costs, pushed_payoff
from ccg.numeric import project_onto
from ccg.special import safe_polytope

seeds = st.integers(0, 2**31 - 1)


def _setup(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    actions = tuple(int(a) for a in rng.integers(1, 4, size=n))
    g = instances.random_game(n, actions, int(rng.integers(0, 3)), seed)
    return rng, g


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_deviation_preserves_simplex_and_is_linear(seed):
    rng, g = _setup(seed)
    i = int(rng.integers(g.n))
    s = g.actions[i]
    z = rng.dirichlet(np.ones(g.num_profiles))
    phi, psi = rng.dirichlet(np.ones(s), size=(2, s))
    a = rng.uniform()
    out = apply_deviation(g, z, Deviation(i, phi))
    assert abs(out.sum() - 1) <= 1e-9 and out.min() >= 0
    mix = apply_deviation(g, z, Deviation(i, a * phi + (1 - a) * psi))
    sep = a * out + (1 - a) * apply_deviation(g, z, Deviation(i, psi))
    assert np.abs(mix - sep).max() <= 1e-12


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_two_ways_to_evaluate_a_deviation(seed):
    rng, g = _setup(seed)
    i = int(rng.integers(g.n))
    s = g.actions[i]
    dev = Deviation(i, rng.dirichlet(np.ones(s), size=s))
    z = rng.dirichlet(np.ones(g.num_profiles))
    moved = apply_deviation(g, z, dev)
    assert abs(g.utilities[i] @ moved - pushed_payoff(g, g.utilities[i], dev) @ z) <= 1e-12
    for j in range(g.m):
        assert abs(g.costs[i, j] @ moved - pushed_payoff(g, g.costs[i, j], dev) @ z) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_marginal_cost_invariance(seed):
    rng = np.random.default_rng(seed)
    g = instances.random_marginal_instance(2, int(rng.integers(2, 4)), int(rng.integers(1, 3)), seed)
    i = int(rng.integers(2))
    phi = constant_rows(rng.dirichlet(np.ones(g.actions[i])))
    z, z2 = rng.dirichlet(np.ones(g.num_profiles), size=2)
    a = expected_costs(g, apply_deviation(g, z, Deviation(i, phi)), i)
    b = expected_costs(g, apply_deviation(g, z2, Deviation(i, phi)), i)
    assert np.abs(a - b).max() <= 1e-12
    assert np.abs(a - tilde_cost(g, i, phi)).max() <= 1e-12


@settings(max_examples=40, deadline=None)
@given(seeds, st.sampled_from(["ALL", "CCE"]))
def test_projection_feasible_and_idempotent(seed, tag):
    rng = np.random.default_rng(seed)
    s = int(rng.integers(1, 5))
    poly = preset(0, s, tag)
    if tag == "CCE" and s > 1:
        g = instances.random_marginal_instance(2, s, 2, seed)
        poly = safe_polytope(g, poly, 0)
    p = project_onto(poly, rng.normal(scale=2, size=(s, s))).phi
    assert contains(poly, p, 1e-8)
    assert np.abs(project_onto(poly, p).phi - p).max() <= 1e-8
