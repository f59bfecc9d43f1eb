"""Acceptance criteria and cross-module property checks as plain functions.

Each check returns a :class:`CaseResult`; ``run_all`` runs them in order under
a wall-clock budget. The test suite calls the same functions.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import instances as inst
from .brute import _VertexGaps, brute_oracle, product_grid_search
from .deviations import constant_rows, presets
from .game import (
    ConstrainedGame,
    Deviation,
    apply_deviation,
    expected_costs,
    expected_utility,
)
from .io import game_from_dict, game_to_dict
from .learning import regret_slope, run_dynamics
from .numeric import project_onto, stationary
from .oracle import AssumptionViolated, best_safe_deviation, strict_feasibility
from .special import safe_polytope, solve_special
from .verify import expectation_ic, verify


@dataclass
class CaseResult:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0
    budget_exhausted: bool = False

    def line(self) -> str:
        tag = "PASS" if self.passed else ("SKIP" if self.budget_exhausted else "FAIL")
        return f"[{tag}] {self.name} ({self.seconds:.2f}s) {json.dumps(self.detail, default=float)}"


def _timed(name: str, fn: Callable[[], tuple[bool, dict]]) -> CaseResult:
    t0 = time.perf_counter()
    ok, detail = fn()
    return CaseResult(name, bool(ok), detail, time.perf_counter() - t0)


# -- acceptance criteria --------------------------------------------------------


def example1_reproduction(seed: int = 0, quick: bool = False) -> CaseResult:
    def run():
        ex = inst.example1()
        g = ex.game
        polys = presets(g, "ALL")
        r1, r2, r3 = (verify(g, polys, z) for z in (ex.z1, ex.z2, ex.z3))
        dz = apply_deviation(g, ex.z3, ex.phi2)
        u = expected_utility(g, dz, 1)
        c = float(expected_costs(g, dz, 1)[0])
        ok = (
            r1.verdict and r2.verdict
            and r1.max_gap <= 1e-6 and r2.max_gap <= 1e-6
            and not r3.verdict and abs(r3.gaps[1] - 1 / 3) <= 1e-6
            and abs(u - 0.5) <= 1e-9 and abs(c) <= 1e-9
        )
        return ok, {
            "gap_z1": r1.max_gap, "gap_z2": r2.max_gap, "gap_z3_player2": float(r3.gaps[1]),
            "u2_dev": u, "c2_dev": c,
        }

    res = _timed("example1_reproduction", run)
    res.passed = res.passed and res.seconds < 1.0
    return res


def expectation_ic_weakness(seed: int = 0, quick: bool = False) -> CaseResult:
    def run():
        ex = inst.example1()
        polys = presets(ex.game, "ALL")
        ic = expectation_ic(ex.game, polys, [ex.z1, ex.z2])
        gap = float(verify(ex.game, polys, 0.5 * (ex.z1 + ex.z2)).gaps.max())
        return bool(ic.max() <= 1e-6 and gap >= 1 / 3 - 1e-6), {
            "expected_gain": ic.tolist(), "average_gap": gap,
        }

    res = _timed("expectation_ic_weakness", run)
    res.passed = res.passed and res.seconds < 1.0
    return res


def special_vs_oracle(seed: int = 0, quick: bool = False) -> CaseResult:
    count = 4 if quick else 20
    k = 60 if quick else 200

    def run():
        worst_margin, worst_gap, worst_res = np.inf, -np.inf, -np.inf
        found = 0
        for t in range(count):
            g = inst.random_marginal_instance(2, 2, 1 + t % 2, seed + t)
            polys = presets(g, "CCE")
            obj = inst.social_welfare(g)
            rep = solve_special(g, polys, obj)
            brute = brute_oracle(g, polys, obj, k, 1e-3)
            v = verify(g, polys, rep.z)
            found += brute.found  # an empty grid makes the comparison vacuous
            worst_margin = min(worst_margin, rep.value - brute.value)
            worst_gap = max(worst_gap, v.max_gap)
            worst_res = max(worst_res, v.safety.max_residual)
        ok = worst_margin >= -2e-2 and worst_gap <= 1e-6 and worst_res <= 1e-9
        return ok, {
            "instances": count, "grid_k": k, "brute_found": found, "min_value_minus_brute": worst_margin,
            "max_gap": worst_gap, "max_safety_residual": worst_res,
        }

    res = _timed("special_vs_oracle", run)
    res.passed = res.passed and res.seconds < 180
    return res


def learning_convergence(seed: int = 0, quick: bool = False) -> CaseResult:
    count = 2 if quick else 5
    T = 2 ** 10 if quick else 2 ** 14

    def run():
        slopes, worst_res, all_verified = [], -np.inf, True
        for t in range(count):
            g = inst.random_marginal_instance(2, 3, 2, seed + t)
            tr = run_dynamics(g, presets(g, "CCE"), T, seed + t, verify_checkpoints=True)
            worst_res = max(worst_res, max(c.max_cost_residual for c in tr.checkpoints))
            all_verified &= all(c.verified for c in tr.checkpoints)
            slopes.append(regret_slope(tr, t_min=2 ** 8))
        ok = worst_res <= 1e-9 and all_verified and max(slopes) <= 0.6
        return ok, {
            "rounds": T, "max_cost_residual": worst_res, "all_checkpoints_verified": all_verified,
            "slopes": slopes,
        }

    res = _timed("learning_convergence", run)
    res.passed = res.passed and res.seconds < 300
    return res


def fixed_point_fidelity(seed: int = 0, quick: bool = False) -> CaseResult:
    T = 256 if quick else 1024

    def run():
        rng = np.random.default_rng(seed)
        traces = []
        for t in range(3):
            g = inst.random_marginal_instance(2, (2, 3), 2, seed + 100 + t)
            traces.append(run_dynamics(g, presets(g, "CCE"), T, seed))
        worst_push, worst_stat = 0.0, 0.0
        for _ in range(100):
            tr = traces[rng.integers(len(traces))]
            t = int(rng.integers(T))
            i = int(rng.integers(tr.game.n))
            phi = tr.phis[i][t]
            x = tr.x[i][t]
            pushed = apply_deviation(tr.game, tr.z[t], Deviation(i, phi))
            worst_push = max(worst_push, float(np.abs(pushed - tr.z[t]).max()))
            worst_stat = max(worst_stat, float(np.abs(phi.T @ x - x).max()))
        return worst_push <= 1e-9 and worst_stat <= 1e-10, {
            "samples": 100, "max_push_residual": worst_push, "max_stationary_residual": worst_stat,
        }

    return _timed("fixed_point_fidelity", run)


def gadget_graph() -> inst.GraphInstance:
    """8-cycle plus chords among odd vertices; the even vertices stay independent."""
    edges = [(v, (v + 1) % 8) for v in range(8)] + [(1, 5), (3, 7), (1, 3)]
    return inst.GraphInstance(8, frozenset(edges), (0, 2, 4, 6))


def gadget_completeness(seed: int = 0, quick: bool = False) -> CaseResult:
    def run():
        graph = gadget_graph()
        params = inst.GadgetParams(alpha=0.5, delta=1 / 3, ell=8)
        g = inst.hardness_gadget(graph, params)
        z = inst.completeness_strategy(graph, params, graph.independent_set)
        rep = verify(g, presets(g, "ALL"), z)
        welfare = float(inst.social_welfare(g) @ z)
        ok = rep.verdict and rep.max_gap <= 1e-6 and rep.safety.max_residual <= 1e-9 and welfare >= 1 - 1e-9
        return ok, {
            "actions": list(g.actions), "m": g.m, "max_gap": rep.max_gap,
            "max_safety_residual": rep.safety.max_residual, "welfare": welfare,
        }

    res = _timed("gadget_completeness", run)
    res.passed = res.passed and res.seconds < 10
    return res


def convexity_fixed_sets(seed: int = 0, quick: bool = False) -> CaseResult:
    n_inst, per = (4, 3) if quick else (20, 5)
    eps = 1e-3

    def run():
        rng = np.random.default_rng(seed)
        worst, failures, total = -np.inf, 0, 0
        for t in range(n_inst):
            g = inst.random_marginal_instance(2, 2 + t % 2, 1 + t % 2, seed + 200 + t)
            polys = presets(g, "CCE")
            for _ in range(per):
                za = solve_special(g, polys, rng.normal(size=g.num_profiles)).z
                zb = solve_special(g, polys, rng.normal(size=g.num_profiles)).z
                if not (verify(g, polys, za, eps).verdict and verify(g, polys, zb, eps).verdict):
                    failures += 1
                    continue
                rep = verify(g, polys, 0.5 * (za + zb), eps)
                total += 1
                worst = max(worst, rep.max_gap)
                failures += not rep.verdict
        return failures == 0, {"midpoints": total, "failures": failures, "max_gap": worst}

    return _timed("convexity_fixed_sets", run)


def marginal_invariance(seed: int = 0, quick: bool = False) -> CaseResult:
    count = 100 if quick else 1000

    def run():
        rng = np.random.default_rng(seed)
        worst = 0.0
        games = [
            inst.random_marginal_instance(n, s, m, seed + 300 + k)
            for k, (n, s, m) in enumerate([(2, 2, 1), (2, 3, 2), (3, 2, 2), (2, 4, 3), (3, 3, 1)])
        ]
        for _ in range(count):
            g = games[rng.integers(len(games))]
            i = int(rng.integers(g.n))
            phi = Deviation(i, constant_rows(rng.dirichlet(np.ones(g.actions[i]))))
            z, z2 = rng.dirichlet(np.ones(g.num_profiles), size=2)
            a = expected_costs(g, apply_deviation(g, z, phi), i)
            b = expected_costs(g, apply_deviation(g, z2, phi), i)
            worst = max(worst, float(np.abs(a - b).max()))
        return worst <= 1e-12, {"triples": count, "max_difference": worst}

    return _timed("marginal_invariance", run)


def strictly_feasible_tiny_games(count: int, seed: int, samples: int = 200, margin: float = 0.1):
    """Random n=2, s=2, m=1 games whose margin is at least ``margin`` at sampled z."""
    rng = np.random.default_rng(seed)
    out = []
    k = 0
    while len(out) < count:
        g = inst.random_game(2, 2, 1, seed + 1000 + k)
        k += 1
        polys = presets(g, "ALL")
        zs = rng.dirichlet(np.ones(g.num_profiles), size=samples)
        if all(strict_feasibility(g, polys[i], z, i).rho >= margin for z in zs for i in range(g.n)):
            out.append(g)
    return out


def existence_smoke(seed: int = 0, quick: bool = False) -> CaseResult:
    count = 3 if quick else 10

    def run():
        games = strictly_feasible_tiny_games(count, seed, samples=50 if quick else 200)
        gaps, lp_gaps = [], []
        for g in games:
            polys = presets(g, "ALL")
            found = product_grid_search(g, polys, 100, target=0.0)
            gaps.append(found.gap)
            if found.found:
                lp_gaps.append(verify(g, polys, found.z).max_gap)
        ok = len(lp_gaps) == count and max(gaps) <= 0.02 and max(lp_gaps) <= 0.02 + 1e-6
        return ok, {"games": count, "grid_step": 0.01, "max_gap": max(gaps), "max_lp_gap": max(lp_gaps, default=None)}

    return _timed("existence_smoke", run)


ACCEPTANCE = (
    example1_reproduction,
    expectation_ic_weakness,
    special_vs_oracle,
    learning_convergence,
    fixed_point_fidelity,
    gadget_completeness,
    convexity_fixed_sets,
    marginal_invariance,
    existence_smoke,
)


# -- cross-module properties --------------------------------------------------------


def oracle_agreement(seed: int = 0, quick: bool = False) -> CaseResult:
    """LP oracle against vertex enumeration on random two-player games."""

    def run():
        rng = np.random.default_rng(seed)
        worst, checked = 0.0, 0
        for t in range(5 if quick else 20):
            g = inst.random_game(2, 2 + t % 2, 1, seed + 400 + t)
            polys = presets(g, "ALL" if t % 3 else "CCE")
            enum = _VertexGaps(g, polys)
            z = rng.dirichlet(np.ones(g.num_profiles))
            gaps = enum.gaps(z, 1e-9)
            for i in range(g.n):
                try:
                    lp = best_safe_deviation(g, polys[i], z, i).gap
                except AssumptionViolated:
                    lp = None
                if (gaps is None) != (lp is None) and gaps is not None:
                    return False, {"mismatch": "feasibility", "instance": t}
                if gaps is not None and lp is not None:
                    worst = max(worst, abs(lp - gaps[i]))
                    checked += 1
        return worst <= 1e-7, {"checked": checked, "max_difference": worst}

    return _timed("oracle_agreement", run)


def numeric_properties(seed: int = 0, quick: bool = False) -> CaseResult:
    def run():
        rng = np.random.default_rng(seed)
        worst_stat, worst_idem = 0.0, 0.0
        for _ in range(100 if quick else 1000):
            s = int(rng.integers(1, 11))
            phi = rng.dirichlet(np.ones(s) * rng.uniform(0.1, 2), size=s)
            x = stationary(phi)
            worst_stat = max(worst_stat, float(np.abs(phi.T @ x - x).max()))
        g = inst.random_marginal_instance(2, 3, 2, seed)
        for i in range(g.n):
            poly = safe_polytope(g, presets(g, "CCE")[i], i)
            for _ in range(20):
                p1 = project_onto(poly, rng.normal(size=(3, 3))).phi
                p2 = project_onto(poly, p1).phi
                worst_idem = max(worst_idem, float(np.abs(p1 - p2).max()))
        return worst_stat <= 1e-10 and worst_idem <= 1e-8, {
            "max_stationary_residual": worst_stat, "max_projection_drift": worst_idem,
        }

    return _timed("numeric_properties", run)


def io_round_trip(seed: int = 0, quick: bool = False) -> CaseResult:
    def run():
        ok = True
        for k in range(10):
            g = inst.random_game(2 + k % 2, 2 + k % 3, k % 3, seed + 500 + k)
            back = game_from_dict(json.loads(json.dumps(game_to_dict(g))))
            ok &= back == g and np.array_equal(back.utilities, g.utilities) and np.array_equal(back.costs, g.costs)
        return ok, {"games": 10}

    return _timed("io_round_trip", run)


def nonconvexity_mutation(seed: int = 0, quick: bool = False) -> CaseResult:
    """Making (a0, a1) cheap removes the non-convexity witness of the two-by-two example."""

    def run():
        ex = inst.example1()
        costs = ex.game.costs.copy()
        costs[:, 0, 1] = -1.0
        mutated = ConstrainedGame(ex.game.actions, ex.game.utilities, costs)

        def witness(g):
            polys = presets(g, "ALL")
            v = [verify(g, polys, z).verdict for z in (ex.z1, ex.z2, ex.z3)]
            return v[0] and v[1] and not v[2], v

        before, v0 = witness(ex.game)
        after, v1 = witness(mutated)
        return before and not after, {"original_verdicts": v0, "mutated_verdicts": v1}

    return _timed("nonconvexity_mutation", run)


PROPERTIES = (oracle_agreement, numeric_properties, io_round_trip, nonconvexity_mutation)


@dataclass
class Summary:
    seed: int
    results: list[CaseResult]
    seconds: float

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "passed": self.passed,
            "seconds": self.seconds,
            "cases": [
                {"name": r.name, "passed": r.passed, "seconds": r.seconds,
                 "budget_exhausted": r.budget_exhausted, "detail": r.detail}
                for r in self.results
            ],
        }


def run_all(seed: int = 0, budget: float = 300.0, quick: bool = False, echo=None) -> Summary:
    """Run properties then acceptance criteria; cases past the budget are flagged."""
    t0 = time.perf_counter()
    results = []
    for case in PROPERTIES + ACCEPTANCE:
        if time.perf_counter() - t0 > budget:
            res = CaseResult(case.__name__, False, {"reason": "budget exhausted"}, 0.0, True)
        else:
            res = case(seed=seed, quick=quick)
        results.append(res)
        if echo is not None:
            echo(res.line())
    return Summary(seed, results, time.perf_counter() - t0)
