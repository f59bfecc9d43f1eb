"""JSON formats for games, strategies, polytopes and objectives."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .deviations import DeviationPolytope, Preset, preset
from .game import ConstrainedGame, GameError, as_strategy
from .instances import social_welfare


class InputError(GameError):
    """A file could not be read or does not match its schema."""


def _num(x: float) -> float:
    # 17 significant digits reproduce every double exactly
    return float(f"{x:.17g}")


def _nested(a: np.ndarray):
    if a.ndim == 0:
        return _num(float(a))
    return [_nested(r) for r in a]


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=1)


def load_json(path) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None


def write_json(path, obj: Any) -> None:
    Path(path).write_text(dumps(obj) + "\n")


def _require(doc, key, where):
    if not isinstance(doc, dict) or key not in doc:
        raise InputError(f"{where}: missing field {key!r}")
    return doc[key]


def _array(value, where, ndim: int) -> np.ndarray:
    try:
        a = np.array(value, dtype=np.float64)
    except (TypeError, ValueError):
        raise InputError(f"{where}: expected a numeric array") from None
    if a.ndim != ndim:
        raise InputError(f"{where}: expected {ndim}-dimensional array, got {a.ndim}")
    return a


# -- games --------------------------------------------------------------------


def game_to_dict(game: ConstrainedGame) -> dict:
    return {
        "n": game.n,
        "actions": list(game.actions),
        "m": game.m,
        "utilities": _nested(game.utilities),
        "costs": _nested(game.costs),
    }


def game_from_dict(doc: dict, where: str = "game") -> ConstrainedGame:
    n = _require(doc, "n", where)
    actions = _require(doc, "actions", where)
    m = _require(doc, "m", where)
    if not isinstance(actions, list) or not all(isinstance(a, int) for a in actions):
        raise InputError(f"{where}: 'actions' must be a list of integers")
    if not isinstance(n, int) or n != len(actions):
        raise InputError(f"{where}: 'n' must equal the length of 'actions'")
    if not isinstance(m, int) or m < 0:
        raise InputError(f"{where}: 'm' must be a nonnegative integer")
    u = _array(_require(doc, "utilities", where), f"{where}.utilities", 2)
    raw = _require(doc, "costs", where)
    if m == 0:  # [[], []] has no third axis to infer
        c = np.zeros((n, 0, u.shape[1]))
    else:
        c = _array(raw, f"{where}.costs", 3)
    if c.shape[:2] != (n, m):
        raise InputError(f"{where}: 'costs' must have shape [n][m][profiles]")
    return ConstrainedGame(tuple(actions), u, c)


def load_game(path) -> ConstrainedGame:
    return game_from_dict(load_json(path), str(path))


def save_game(path, game: ConstrainedGame) -> None:
    write_json(path, game_to_dict(game))


# -- strategies ---------------------------------------------------------------


def load_strategy(path, game: ConstrainedGame) -> np.ndarray:
    doc = load_json(path)
    z = _array(_require(doc, "z", str(path)), f"{path}.z", 1)
    return as_strategy(game, z)


def save_strategy(path, z: np.ndarray) -> None:
    write_json(path, {"z": _nested(np.asarray(z, dtype=np.float64))})


# -- deviation polytopes ------------------------------------------------------


def polytope_from_dict(doc: dict, size: int, where: str = "polytope") -> DeviationPolytope:
    owner = _require(doc, "owner", where)
    rows = _require(doc, "rows", where)
    if not isinstance(owner, int) or not isinstance(rows, list):
        raise InputError(f"{where}: 'owner' must be an integer and 'rows' a list")
    M = np.zeros((len(rows), size, size))
    d = np.zeros(len(rows))
    for k, row in enumerate(rows):
        Mk = _array(_require(row, "M", f"{where}.rows[{k}]"), f"{where}.rows[{k}].M", 2)
        if Mk.shape != (size, size):
            raise InputError(f"{where}.rows[{k}].M must be {size}x{size}")
        M[k] = Mk
        d[k] = float(_require(row, "d", f"{where}.rows[{k}]"))
    return DeviationPolytope(owner, size, M, d, Preset.CUSTOM)


def polytope_to_dict(poly: DeviationPolytope) -> dict:
    return {
        "owner": poly.owner,
        "rows": [{"M": _nested(M), "d": _num(float(d))} for M, d in zip(poly.M, poly.d)],
    }


def resolve_polytopes(game: ConstrainedGame, spec: str) -> list[DeviationPolytope]:
    """``ALL``, ``CCE`` or ``file:PATH``.

    A file holds one polytope object or a list of them; players not listed
    get the ALL preset.
    """
    key = spec.strip()
    if key.upper() in (Preset.ALL.value, Preset.CCE.value):
        return [preset(i, s, key.upper()) for i, s in enumerate(game.actions)]
    if not key.startswith("file:"):
        raise InputError(f"--phi must be ALL, CCE or file:PATH, got {spec!r}")
    path = key[5:]
    doc = load_json(path)
    docs = doc if isinstance(doc, list) else [doc]
    polys = [preset(i, s, Preset.ALL) for i, s in enumerate(game.actions)]
    for k, entry in enumerate(docs):
        owner = _require(entry, "owner", f"{path}[{k}]")
        if not isinstance(owner, int) or not 0 <= owner < game.n:
            raise InputError(f"{path}[{k}]: owner {owner!r} is not a player")
        polys[owner] = polytope_from_dict(entry, game.actions[owner], f"{path}[{k}]")
    return polys


# -- objectives ---------------------------------------------------------------


def load_objective(spec: str, game: ConstrainedGame) -> np.ndarray:
    """``welfare`` or a path to {"coefficients": [...]}."""
    if spec == "welfare":
        return social_welfare(game)
    doc = load_json(spec)
    coef = _array(_require(doc, "coefficients", spec), f"{spec}.coefficients", 1)
    if coef.shape != (game.num_profiles,) or not np.all(np.isfinite(coef)):
        raise InputError(f"{spec}: need {game.num_profiles} finite coefficients")
    return coef
