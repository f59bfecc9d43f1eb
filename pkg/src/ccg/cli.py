"""``ccg`` command line.

Exit codes: 0 success, 1 ``verify`` verdict false, 2 bad input, 3 solver failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import instances
from .brute import brute_oracle
from .game import GameError
from .io import (
    InputError,
    dumps,
    load_game,
    load_objective,
    load_strategy,
    resolve_polytopes,
    save_game,
    save_strategy,
    write_json,
)
from .learning import run_dynamics, write_trace
from .numeric import NumericError
from .oracle import best_safe_deviation, strict_feasibility
from .special import solve_special
from .verify import GAP_TOL, verify

EXIT_OK, EXIT_FALSE, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def _positive(kind):
    def parse(text):
        val = kind(text)
        if val <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return val
    return parse


def _nonneg_float(text):
    val = float(text)
    if not val >= 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative, got {text}")
    return val


def _emit(args, doc) -> None:
    if getattr(args, "out", None):
        write_json(args.out, doc)
    else:
        print(dumps(doc))


def _game_args(p, strategy=False, phi_default=None):
    p.add_argument("--game", required=True, help="game JSON file")
    if strategy:
        p.add_argument("--strategy", required=True, help='strategy JSON file {"z": [...]}')
    p.add_argument(
        "--phi", default=phi_default, required=phi_default is None,
        help="deviation sets: ALL, CCE or file:PATH",
    )
    p.add_argument("--out", help="write the JSON report here instead of stdout")


# -- subcommands ----------------------------------------------------------------


def cmd_gen(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if args.kind == "example1":
        ex = instances.example1()
        save_game(out / "game.json", ex.game)
        for name in ("z1", "z2", "z3"):
            save_strategy(out / f"{name}.json", getattr(ex, name))
        write_json(out / "phi2.json", {"owner": ex.phi2.owner, "phi": ex.phi2.phi.tolist()})
        written = ["game.json", "z1.json", "z2.json", "z3.json", "phi2.json"]
    elif args.kind == "hardness":
        if not args.graph:
            raise InputError("gen hardness needs --graph")
        try:
            text = Path(args.graph).read_text()
        except OSError as exc:
            raise InputError(f"cannot read {args.graph}: {exc.strerror}") from None
        graph = instances.read_edge_list(text, args.vertices)
        params = instances.GadgetParams(args.alpha, args.delta, graph.num_vertices)
        save_game(out / "game.json", instances.hardness_gadget(graph, params))
        written = ["game.json"]
        if args.independent:
            ind = [int(v) for v in args.independent.split(",")]
            save_strategy(out / "z.json", instances.completeness_strategy(graph, params, ind))
            written.append("z.json")
    else:
        maker = instances.random_marginal_instance if args.marginal else instances.random_game
        game = maker(args.players, args.actions, args.constraints, args.seed)
        save_game(out / "game.json", game)
        written = ["game.json"]
    _emit(args, {"out_dir": str(out), "files": written})
    return EXIT_OK


def cmd_verify(args) -> int:
    game = load_game(args.game)
    z = load_strategy(args.strategy, game)
    rep = verify(game, resolve_polytopes(game, args.phi), z, eps=args.eps, tol=args.tol)
    _emit(args, rep.to_dict())
    return EXIT_OK if rep.verdict else EXIT_FALSE


def _players(args, game):
    if args.player is None:
        return range(game.n)
    if not 0 <= args.player < game.n:
        raise InputError(f"--player {args.player} out of range for {game.n} players")
    return [args.player]


def cmd_best_dev(args) -> int:
    game = load_game(args.game)
    z = load_strategy(args.strategy, game)
    polys = resolve_polytopes(game, args.phi)
    docs = []
    for i in _players(args, game):
        r = best_safe_deviation(game, polys[i], z, i)
        docs.append({
            "player": i,
            "best_value": r.best_value,
            "gap": r.gap,
            "witness": r.witness.phi.tolist(),
            "safety_residuals": r.safety_residuals.tolist(),
        })
    _emit(args, {"players": docs})
    return EXIT_OK


def cmd_strict_feas(args) -> int:
    game = load_game(args.game)
    z = load_strategy(args.strategy, game)
    polys = resolve_polytopes(game, args.phi)
    docs = []
    for i in _players(args, game):
        f = strict_feasibility(game, polys[i], z, i)
        docs.append({
            "player": i,
            "rho": f.rho if np.isfinite(f.rho) else None,
            "witness": None if f.witness is None else f.witness.phi.tolist(),
        })
    _emit(args, {"players": docs})
    return EXIT_OK


def cmd_solve_special(args) -> int:
    game = load_game(args.game)
    polys = resolve_polytopes(game, args.phi)
    rep = solve_special(game, polys, load_objective(args.objective, game), tol=args.tol)
    if args.z_out:
        save_strategy(args.z_out, rep.z)
    _emit(args, rep.to_dict())
    return EXIT_OK


def cmd_learn(args) -> int:
    game = load_game(args.game)
    polys = resolve_polytopes(game, args.phi)
    trace = run_dynamics(game, polys, args.rounds, args.seed, verify_checkpoints=args.checkpoints)
    if args.trace:
        write_trace(trace, args.trace)
    if args.z_out:
        save_strategy(args.z_out, trace.zbar)
    last = trace.checkpoints[-1]
    _emit(args, {
        "rounds": trace.T,
        "seed": trace.seed,
        "regret": last.regret.tolist(),
        "gap_bound": last.gap_bound.tolist(),
        "max_cost_residual": last.max_cost_residual,
        "regret_constant": trace.regret_constant(),
        "checkpoints_verified": [c.verified for c in trace.checkpoints] if args.checkpoints else None,
        "zbar": trace.zbar.tolist(),
    })
    return EXIT_OK


def cmd_oracle(args) -> int:
    game = load_game(args.game)
    polys = resolve_polytopes(game, args.phi)
    res = brute_oracle(
        game, polys, load_objective(args.objective, game), args.grid, args.eps,
        budget=args.budget, threads=args.threads,
    )
    _emit(args, res.to_dict())
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_all

    summary = run_all(seed=args.seed, budget=args.budget, quick=args.quick)
    _emit(args, summary.to_dict())
    return EXIT_OK if summary.passed else EXIT_FALSE


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ccg", description="Constrained Phi-equilibria of cost-constrained normal-form games.")
    parser.add_argument("--threads", type=_positive(int), default=1, help="cap on worker threads")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="write an instance to a directory")
    p.add_argument("kind", choices=["example1", "hardness", "random"])
    p.add_argument("--out-dir", required=True)
    p.add_argument("--out", help="write the file listing here instead of stdout")
    p.add_argument("--graph", help="edge list for hardness (one 'u v' per line)")
    p.add_argument("--vertices", type=_positive(int), help="vertex count if isolated vertices exist")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--delta", type=float, default=1 / 3)
    p.add_argument("--independent", help="comma-separated independent set; also writes z.json")
    p.add_argument("--players", type=_positive(int), default=2)
    p.add_argument("--actions", type=_positive(int), default=2)
    p.add_argument("--constraints", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--marginal", action="store_true", help="costs depend only on the owner's action")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("verify", help="check a strategy is a safe eps-equilibrium")
    _game_args(p, strategy=True)
    p.add_argument("--eps", type=_nonneg_float, default=0.0)
    p.add_argument("--tol", type=_positive(float), default=GAP_TOL)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("best-dev", help="best safe deviation per player")
    _game_args(p, strategy=True)
    p.add_argument("--player", type=int)
    p.set_defaults(func=cmd_best_dev)

    p = sub.add_parser("strict-feas", help="strict-feasibility margin per player")
    _game_args(p, strategy=True)
    p.add_argument("--player", type=int)
    p.set_defaults(func=cmd_strict_feas)

    p = sub.add_parser("solve-special", help="optimal equilibrium with fixed safe sets")
    _game_args(p, phi_default="CCE")
    p.add_argument("--objective", required=True, help="'welfare' or a JSON file with coefficients")
    p.add_argument("--tol", type=_positive(float), default=GAP_TOL)
    p.add_argument("--z-out", help="also write the equilibrium strategy here")
    p.set_defaults(func=cmd_solve_special)

    p = sub.add_parser("learn", help="run the no-regret dynamics")
    _game_args(p, phi_default="CCE")
    p.add_argument("--rounds", type=_positive(int), required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", help="checkpoint CSV output")
    p.add_argument("--checkpoints", action="store_true", help="verify the average at every checkpoint")
    p.add_argument("--z-out", help="write the averaged strategy here")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("oracle", help="exhaustive grid search for the best eps-equilibrium")
    _game_args(p)
    p.add_argument("--objective", required=True)
    p.add_argument("--grid", type=_positive(int), required=True)
    p.add_argument("--eps", type=_nonneg_float, default=1e-3)
    p.add_argument("--budget", type=_positive(float), help="wall-clock seconds")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("selftest", help="run the property and acceptance checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=_positive(float), default=300.0, help="seconds")
    p.add_argument("--quick", action="store_true", help="reduced sizes for a fast smoke run")
    p.add_argument("--out")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, GameError, FileNotFoundError) as exc:
        print(f"ccg: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericError as exc:
        print(f"ccg: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
