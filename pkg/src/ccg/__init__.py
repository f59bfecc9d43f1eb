"""Constrained Phi-equilibria of cost-constrained normal-form games."""

from .brute import BruteResult, brute_oracle, product_grid_search
from .deviations import DeviationPolytope, Preset, contains, preset, presets, tilde_cost
from .game import (
    ConstrainedGame,
    Deviation,
    DimensionError,
    GameError,
    apply_deviation,
    expected_costs,
    expected_utility,
    is_safe,
)
from .learning import LearningTrace, phi_regret, run_dynamics
from .numeric import LinearProgram, LpSolution, LpStatus, NumericError, lp_solve, project_onto, stationary
from .oracle import AssumptionViolated, best_safe_deviation, strict_feasibility
from .special import SolveReport, check_fixed_safe_set, solve_special
from .verify import EquilibriumReport, expectation_ic, verify

__all__ = [
    "AssumptionViolated", "BruteResult", "ConstrainedGame", "Deviation", "DeviationPolytope",
    "DimensionError", "EquilibriumReport", "GameError", "LearningTrace", "LinearProgram",
    "LpSolution", "LpStatus", "NumericError", "Preset", "SolveReport", "apply_deviation",
    "best_safe_deviation", "brute_oracle", "check_fixed_safe_set", "contains", "expected_costs",
    "expected_utility", "expectation_ic", "is_safe", "lp_solve", "phi_regret", "preset", "presets",
    "product_grid_search", "project_onto", "run_dynamics", "solve_special", "stationary",
    "strict_feasibility", "tilde_cost", "verify",
]
