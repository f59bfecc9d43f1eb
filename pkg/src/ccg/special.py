"""Optimal equilibria when safe-deviation sets do not depend on the strategy.

With own-action costs and CCE deviations, Phi_i^S is a fixed polytope and
the optimal-equilibrium problem is an LP whose incentive rows are generated
lazily by the best-safe-deviation oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .deviations import DeviationPolytope, own_action_costs
from .game import ConstrainedGame, GameError, as_strategy, pushed_payoff
from .numeric import LinearProgram, LpStatus, NumericError, lp_solve
from .oracle import AssumptionViolated, best_safe_deviation
from .verify import GAP_TOL, verify

CUT_TOL = 1e-9
MAX_ITER = 100_000


@dataclass(frozen=True)
class FixedSetCheck:
    ok: bool
    player: int | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def check_fixed_safe_set(game: ConstrainedGame, polys: Sequence[DeviationPolytope]) -> FixedSetCheck:
    """True when every player's safe deviations are the same for all strategies."""
    for i in range(game.n):
        if not polys[i].is_cce:
            return FixedSetCheck(False, i, f"player {i} uses {polys[i].tag.value} deviations, not CCE")
        try:
            own_action_costs(game, i)
        except GameError as exc:
            return FixedSetCheck(False, i, str(exc))
    return FixedSetCheck(True)


def safe_polytope(game: ConstrainedGame, poly: DeviationPolytope, i: int) -> DeviationPolytope:
    """Phi_i^S as an explicit polytope (fixed-safe-set case only)."""
    s = poly.size
    own = own_action_costs(game, i)  # (m, s)
    # on constant-row phi, sum_{b,a} (c[a] / s) phi[b, a] = c . h
    M = np.repeat(own[:, None, :] / s, s, axis=1)
    return poly.with_rows(M, np.zeros(game.m))


@dataclass
class SolveReport:
    z: np.ndarray
    value: float
    iterations: int
    cuts: list[int]
    max_gap: float
    history: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "z": self.z.tolist(),
            "value": self.value,
            "iterations": self.iterations,
            "cuts": self.cuts,
            "max_gap": self.max_gap,
            "history": self.history,
        }


def solve_special(
    game: ConstrainedGame,
    polys: Sequence[DeviationPolytope],
    objective,
    tol: float = GAP_TOL,
    max_iter: int = MAX_ITER,
) -> SolveReport:
    """Maximize objective . z over constrained Phi-equilibria by cutting planes."""
    check = check_fixed_safe_set(game, polys)
    if not check:
        raise GameError(
            f"safe-deviation sets depend on z ({check.reason}); "
            "use run_dynamics for one equilibrium or brute_oracle at small scale"
        )
    obj = np.asarray(objective, dtype=np.float64).reshape(-1)
    if obj.shape != (game.num_profiles,) or not np.all(np.isfinite(obj)):
        raise GameError("objective needs one finite coefficient per profile")
    P = game.num_profiles
    safety = game.costs.reshape(-1, P)
    cuts: list[np.ndarray] = []
    seen: set[tuple] = set()
    per_player = [0] * game.n
    history: list[float] = []
    for it in range(1, max_iter + 1):
        A_ub = np.vstack([safety] + cuts) if cuts else safety
        sol = lp_solve(
            LinearProgram(obj, A_ub, np.zeros(A_ub.shape[0]), np.ones((1, P)), np.ones(1))
        )
        if sol.status is LpStatus.INFEASIBLE:
            raise AssumptionViolated("equilibrium LP infeasible: strict feasibility does not hold")
        if sol.status is not LpStatus.OPTIMAL:
            raise NumericError(f"equilibrium LP returned {sol.status.value}")
        z = np.clip(sol.x, 0.0, None)
        z /= z.sum()
        history.append(float(obj @ z))
        added = 0
        for i in range(game.n):
            res = best_safe_deviation(game, polys[i], z, i)
            if res.gap <= CUT_TOL:
                continue
            key = (i,) + tuple(np.round(res.witness.phi.ravel() * 1e12).astype(np.int64))
            if key in seen:
                continue
            seen.add(key)
            cuts.append(pushed_payoff(game, game.utilities[i], res.witness) - game.utilities[i])
            per_player[i] += 1
            added += 1
        if not added:
            break
    else:
        raise NumericError(f"cutting-plane cap of {max_iter} iterations reached")
    z = as_strategy(game, z)
    report = verify(game, polys, z, eps=0.0, tol=tol)
    return SolveReport(z, float(obj @ z), it, per_player, report.max_gap, history)
