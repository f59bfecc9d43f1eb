"""Decentralized no-regret dynamics over fixed safe-deviation sets.

Each player runs projected online gradient descent over its safe CCE
polytope, plays the stationary distribution of its current deviation, and
the running average of the product strategies approaches a constrained
equilibrium.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .deviations import DeviationPolytope
from .game import (
    ConstrainedGame,
    GameError,
    deviation_gradient,
    is_safe,
    product_strategy,
)
from .numeric import LinearProgram, LpStatus, NumericError, lp_solve, project_onto, stationary
from .special import check_fixed_safe_set, safe_polytope
from .verify import verify

TRACE_HEADER = ("t", "player", "regret", "gap_bound", "max_cost_residual", "utility_avg")


def checkpoint_rounds(T: int) -> list[int]:
    rounds = [1 << k for k in range(T.bit_length()) if (1 << k) <= T]
    if rounds[-1] != T:
        rounds.append(T)
    return rounds


@dataclass
class RegretMinimizer:
    """Projected online gradient ascent on a polytope of deviations."""

    poly: DeviationPolytope
    phi: np.ndarray
    diameter: float
    grad_bound: float
    t: int = 0
    grad_sum: np.ndarray = field(default=None)
    reward_sum: float = 0.0

    @classmethod
    def start(cls, poly: DeviationPolytope) -> "RegretMinimizer":
        s = poly.size
        phi = project_onto(poly, np.eye(s)).phi
        return cls(poly, phi, math.sqrt(2 * s), math.sqrt(s), grad_sum=np.zeros((s, s)))

    def observe(self, grad: np.ndarray, reward: float) -> None:
        if not np.all(np.isfinite(grad)):
            raise NumericError(f"non-finite gradient for player {self.poly.owner}")
        self.t += 1
        self.grad_sum += grad
        self.reward_sum += reward
        eta = self.diameter / (self.grad_bound * math.sqrt(self.t))
        self.phi = project_onto(self.poly, self.phi + eta * grad).phi


@dataclass(frozen=True)
class Checkpoint:
    t: int
    regret: np.ndarray  # (n,)
    max_cost_residual: float
    utility_avg: np.ndarray  # (n,)
    verified: bool | None = None

    @property
    def gap_bound(self) -> np.ndarray:
        return self.regret / self.t


@dataclass
class LearningTrace:
    game: ConstrainedGame
    polys: list[DeviationPolytope]  # safe polytopes the minimizers ran on
    T: int
    seed: int | None
    x: list[np.ndarray]  # per player (T, s_i)
    phis: list[np.ndarray]  # per player (T, s_i, s_i)
    z: np.ndarray  # (T, P)
    utilities: np.ndarray  # (T, n)
    costs: np.ndarray  # (T, n, m)
    grad_sum: list[np.ndarray]
    checkpoints: list[Checkpoint]
    zsum: np.ndarray

    @property
    def zbar(self) -> np.ndarray:
        return self.zsum / self.T

    def regret_constant(self) -> float:
        """Smallest C with regret_i(t) <= C sqrt(t) over all checkpoints."""
        return max(float(c.regret.max()) / math.sqrt(c.t) for c in self.checkpoints)


def _hindsight(poly: DeviationPolytope, grad_sum: np.ndarray) -> float:
    s = poly.size
    E = np.kron(np.eye(s), np.ones((1, s)))
    sol = lp_solve(
        LinearProgram(grad_sum.ravel(), poly.M.reshape(poly.num_rows, s * s), poly.d, E, np.ones(s))
    )
    if sol.status is not LpStatus.OPTIMAL:
        raise NumericError(f"hindsight LP returned {sol.status.value}")
    return sol.objective


def phi_regret(trace: LearningTrace, poly: DeviationPolytope, i: int) -> float:
    """Best fixed deviation in ``poly`` in hindsight minus realized utility of player i."""
    return _hindsight(poly, trace.grad_sum[i]) - float(trace.utilities[:, i].sum())


def run_dynamics(
    game: ConstrainedGame,
    polys: Sequence[DeviationPolytope],
    T: int,
    seed: int | None = None,
    verify_checkpoints: bool = False,
) -> LearningTrace:
    """Run T rounds. The dynamics are deterministic; ``seed`` is only recorded."""
    if T < 1:
        raise GameError("T must be at least 1")
    check = check_fixed_safe_set(game, polys)
    if not check:
        raise GameError(f"learning needs fixed safe-deviation sets: {check.reason}")
    safe = [safe_polytope(game, polys[i], i) for i in range(game.n)]
    learners = [RegretMinimizer.start(p) for p in safe]
    x = [np.empty((T, s)) for s in game.actions]
    phis = [np.empty((T, s, s)) for s in game.actions]
    Z = np.empty((T, game.num_profiles))
    U = np.empty((T, game.n))
    Cst = np.empty((T, game.n, game.m))
    zsum = np.zeros(game.num_profiles)
    marks = set(checkpoint_rounds(T))
    checkpoints = []
    for t in range(T):
        for i, lr in enumerate(learners):
            phis[i][t] = lr.phi
            x[i][t] = stationary(lr.phi)
        z = product_strategy([x[i][t] for i in range(game.n)])
        Z[t] = z
        U[t] = game.utilities @ z
        Cst[t] = game.costs @ z
        zsum += z
        for i, lr in enumerate(learners):
            lr.observe(deviation_gradient(game, game.utilities[i], z, i), U[t, i])
        if t + 1 in marks:
            checkpoints.append(_checkpoint(game, polys, safe, learners, zsum, t + 1, verify_checkpoints))
    return LearningTrace(
        game, safe, T, seed, x, phis, Z, U, Cst, [lr.grad_sum.copy() for lr in learners], checkpoints, zsum
    )


def _checkpoint(game, polys, safe, learners, zsum, t, do_verify) -> Checkpoint:
    regret = np.array([_hindsight(p, lr.grad_sum) - lr.reward_sum for p, lr in zip(safe, learners)])
    zbar = zsum / t
    resid = is_safe(game, zbar).max_residual
    verdict = None
    if do_verify:
        eps = max(float(regret.max()) / t, 0.0)
        verdict = verify(game, polys, zbar, eps=eps).verdict
    util = np.array([lr.reward_sum / t for lr in learners])
    return Checkpoint(t, regret, resid, util, verdict)


def regret_slope(trace: LearningTrace, t_min: int = 256, floor: float = 1e-12) -> float:
    """Least-squares slope of log(max regret) against log(t) over checkpoints >= t_min."""
    pts = [(c.t, max(float(c.regret.max()), floor)) for c in trace.checkpoints if c.t >= t_min]
    if len(pts) < 2:
        raise GameError("need at least two checkpoints to fit a slope")
    t, r = np.log(np.array(pts)).T
    return float(np.polyfit(t, r, 1)[0])


def write_trace(trace: LearningTrace, path) -> None:
    """Checkpoint rows, one per player, in the CSV layout of TRACE_HEADER."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for c in trace.checkpoints:
            for i in range(trace.game.n):
                w.writerow(
                    [c.t, i, repr(float(c.regret[i])), repr(float(c.gap_bound[i])),
                     repr(float(c.max_cost_residual)), repr(float(c.utility_avg[i]))]
                )
