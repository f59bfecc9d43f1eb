"""Best safe deviation and strict-feasibility margin of a single player."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .deviations import DeviationPolytope
from .game import (
    ConstrainedGame,
    Deviation,
    DimensionError,
    apply_deviation,
    deviation_gradient,
    expected_costs,
    expected_utility,
)
from .numeric import LinearProgram, LpStatus, NumericError, lp_solve


class AssumptionViolated(NumericError):
    """No deviation of the player keeps its own costs nonpositive."""


@dataclass(frozen=True)
class OracleResult:
    player: int
    best_value: float
    witness: Deviation
    gap: float
    safety_residuals: np.ndarray


def _check(game: ConstrainedGame, poly: DeviationPolytope, i: int) -> int:
    s = game.actions[game._player(i)]
    if poly.owner != i or poly.size != s:
        raise DimensionError(
            f"polytope for player {poly.owner} (size {poly.size}) used for player {i} with {s} actions",
            player=i,
        )
    return s


def _deviation_rows(poly):
    """Row-sum equalities and polytope rows, flattened over phi."""
    s = poly.size
    E = np.zeros((s, s * s))
    for b in range(s):
        E[b, b * s:(b + 1) * s] = 1.0
    return E, np.ones(s), poly.M.reshape(poly.num_rows, s * s), poly.d


def safety_rows(game: ConstrainedGame, z: np.ndarray, i: int) -> np.ndarray:
    """K with K[j] . phi.ravel() == c_{i,j}(phi <> z)."""
    return np.stack(
        [deviation_gradient(game, game.costs[i, j], z, i).reshape(-1) for j in range(game.m)]
    ).reshape(game.m, -1)


def best_safe_deviation(
    game: ConstrainedGame,
    poly: DeviationPolytope,
    z: np.ndarray,
    i: int,
    cost_bound: float = 0.0,
) -> OracleResult:
    """Maximize u_i(phi <> z) over phi in poly with c_i(phi <> z) <= cost_bound.

    Raises AssumptionViolated when no deviation in ``poly`` is safe at z.
    """
    s = _check(game, poly, i)
    z = np.asarray(z, dtype=np.float64)
    E, f, M, d = _deviation_rows(poly)
    K = safety_rows(game, z, i)
    grad = deviation_gradient(game, game.utilities[i], z, i).reshape(-1)
    lp = LinearProgram(
        grad,
        A_ub=np.vstack([M, K]),
        b_ub=np.concatenate([d, np.full(game.m, cost_bound)]),
        A_eq=E,
        b_eq=f,
    )
    sol = lp_solve(lp)
    if sol.status is LpStatus.INFEASIBLE:
        raise AssumptionViolated(f"strict feasibility violated at z: player {i} has no safe deviation")
    if sol.status is not LpStatus.OPTIMAL:  # bounded feasible region, cannot happen
        raise NumericError(f"oracle LP for player {i} returned {sol.status.value}")
    phi = np.clip(sol.x.reshape(s, s), 0.0, 1.0)
    phi /= phi.sum(axis=1, keepdims=True)
    witness = Deviation(i, phi)
    value = expected_utility(game, apply_deviation(game, z, witness), i)
    resid = expected_costs(game, apply_deviation(game, z, witness), i)
    return OracleResult(i, value, witness, value - expected_utility(game, z, i), resid)


@dataclass(frozen=True)
class Feasibility:
    rho: float
    witness: Deviation | None


def strict_feasibility(
    game: ConstrainedGame, poly: DeviationPolytope, z: np.ndarray, i: int
) -> Feasibility:
    """Largest margin rho with max_j c_{i,j}(phi <> z) <= -rho for some phi in poly."""
    s = _check(game, poly, i)
    z = np.asarray(z, dtype=np.float64)
    if game.m == 0:
        return Feasibility(float("inf"), Deviation.identity(i, s) if poly.num_rows == 0 else None)
    E, f, M, d = _deviation_rows(poly)
    K = safety_rows(game, z, i)
    n = s * s
    # variables: phi (n), rho (free)
    c = np.zeros(n + 1)
    c[-1] = 1.0
    A_ub = np.zeros((M.shape[0] + game.m, n + 1))
    A_ub[: M.shape[0], :n] = M
    A_ub[M.shape[0]:, :n] = K
    A_ub[M.shape[0]:, -1] = 1.0
    b_ub = np.concatenate([d, np.zeros(game.m)])
    E1 = np.hstack([E, np.zeros((E.shape[0], 1))])
    lo = np.zeros(n + 1)
    lo[-1] = -np.inf
    sol = lp_solve(LinearProgram(c, A_ub, b_ub, E1, f, lo=lo))
    if sol.status is not LpStatus.OPTIMAL:
        raise NumericError(f"margin LP for player {i} returned {sol.status.value}")
    phi = np.clip(sol.x[:n].reshape(s, s), 0.0, 1.0)
    phi /= phi.sum(axis=1, keepdims=True)
    return Feasibility(float(sol.x[-1]), Deviation(i, phi))
