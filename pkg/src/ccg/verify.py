"""Equilibrium verification."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .deviations import DeviationPolytope
from .game import FEAS_TOL, ConstrainedGame, Deviation, GameError, Safety, as_strategy, is_safe
from .oracle import best_safe_deviation

GAP_TOL = 1e-6


@dataclass(frozen=True)
class EquilibriumReport:
    safety: Safety
    gaps: np.ndarray
    best_values: np.ndarray
    witnesses: list[Deviation]
    eps: float
    tol: float

    @property
    def max_gap(self) -> float:
        return float(self.gaps.max())

    @property
    def verdict(self) -> bool:
        return self.safety.safe and self.max_gap <= self.eps + self.tol

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "eps": self.eps,
            "tol": self.tol,
            "safe": self.safety.safe,
            "max_safety_residual": self.safety.max_residual,
            "safety_residuals": self.safety.residuals.tolist(),
            "gaps": self.gaps.tolist(),
            "max_gap": self.max_gap,
            "best_values": self.best_values.tolist(),
            "witnesses": [w.phi.tolist() for w in self.witnesses],
        }


def verify(
    game: ConstrainedGame,
    polys: Sequence[DeviationPolytope],
    z,
    eps: float = 0.0,
    tol: float = GAP_TOL,
    feas_tol: float = FEAS_TOL,
) -> EquilibriumReport:
    """Check that z is safe and no safe deviation gains more than eps.

    Gaps are computed even for unsafe z; the verdict is then False.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    z = as_strategy(game, z)
    safety = is_safe(game, z, feas_tol)
    results = [best_safe_deviation(game, polys[i], z, i) for i in range(game.n)]
    return EquilibriumReport(
        safety,
        np.array([r.gap for r in results]),
        np.array([r.best_value for r in results]),
        [r.witness for r in results],
        float(eps),
        float(tol),
    )


def expectation_ic(
    game: ConstrainedGame,
    polys: Sequence[DeviationPolytope],
    strategies: Sequence,
    weights: Sequence[float] | None = None,
    feas_tol: float = FEAS_TOL,
) -> np.ndarray:
    """Per-player expected best-safe-deviation gain over a distribution of strategies."""
    if weights is None:
        weights = np.full(len(strategies), 1.0 / len(strategies))
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (len(strategies),) or w.min() < 0 or abs(w.sum() - 1.0) > FEAS_TOL:
        raise GameError("weights must form a distribution over the strategies")
    total = np.zeros(game.n)
    for wk, z in zip(w, strategies):
        rep = verify(game, polys, z, feas_tol=feas_tol)
        if not rep.safety.safe:
            raise GameError("every strategy in the support must be safe")
        total += wk * rep.gaps
    return total
