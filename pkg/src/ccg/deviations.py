"""Deviation polytopes: the ALL and CCE presets plus custom linear rows."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .game import FEAS_TOL, ConstrainedGame, DimensionError, GameError, _split

MAX_CUSTOM_ROWS = 10_000
MARGINAL_TOL = 1e-12


class Preset(str, Enum):
    ALL = "ALL"
    CCE = "CCE"
    CUSTOM = "CUSTOM"


@dataclass(frozen=True, eq=False)
class DeviationPolytope:
    """Deviations phi of one player with sum(M_k * phi) <= d_k for every row k.

    Row-stochasticity and nonnegativity are always implied and never stored.
    """

    owner: int
    size: int
    M: np.ndarray  # (rows, size, size)
    d: np.ndarray  # (rows,)
    tag: Preset = Preset.CUSTOM

    def __post_init__(self):
        M = np.asarray(self.M, dtype=np.float64).reshape(-1, self.size, self.size)
        d = np.asarray(self.d, dtype=np.float64).reshape(-1)
        if M.shape[0] != d.shape[0]:
            raise DimensionError("polytope rows and bounds differ in length", player=self.owner)
        if M.shape[0] > MAX_CUSTOM_ROWS:
            raise GameError(f"polytope of player {self.owner} has more than {MAX_CUSTOM_ROWS} rows")
        if not (np.all(np.isfinite(M)) and np.all(np.isfinite(d))):
            raise GameError("polytope rows must be finite")
        M.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "tag", Preset(self.tag))

    @property
    def num_rows(self) -> int:
        return self.d.shape[0]

    def with_rows(self, M: np.ndarray, d: np.ndarray) -> "DeviationPolytope":
        """Same polytope intersected with extra rows; CCE structure is kept."""
        M = np.asarray(M, dtype=np.float64).reshape(-1, self.size, self.size)
        return DeviationPolytope(
            self.owner,
            self.size,
            np.concatenate([self.M, M]),
            np.concatenate([self.d, np.asarray(d, dtype=np.float64).reshape(-1)]),
            self.tag,
        )

    @property
    def is_cce(self) -> bool:
        return self.tag is Preset.CCE or self.size == 1

    def constant_row_form(self) -> tuple[np.ndarray, np.ndarray]:
        """Extra rows of a CCE polytope rewritten over the shared row h.

        With phi = 1 h^T every constraint sum(M * phi) <= d becomes
        M.sum(axis=1) @ h <= d. The CCE equalities themselves vanish.
        """
        if not self.is_cce:
            raise GameError("constant-row form only exists for CCE polytopes")
        k = self._num_cce_rows()
        return self.M[k:].sum(axis=1), self.d[k:]

    def _num_cce_rows(self) -> int:
        return _cce_row_count(self.size) if self.tag is Preset.CCE else 0


def _cce_row_count(s: int) -> int:
    return s * s * (s - 1)


def _cce_rows(s: int) -> tuple[np.ndarray, np.ndarray]:
    rows = []
    for b in range(s):
        for b2 in range(b + 1, s):
            for a in range(s):
                M = np.zeros((s, s))
                M[b, a] = 1.0
                M[b2, a] = -1.0
                rows.append(M)
                rows.append(-M)
    M = np.array(rows).reshape(-1, s, s)
    return M, np.zeros(len(rows))


def preset(owner: int, size: int, tag: Preset | str) -> DeviationPolytope:
    tag = Preset(tag)
    if tag is Preset.ALL:
        return DeviationPolytope(owner, size, np.zeros((0, size, size)), np.zeros(0), Preset.ALL)
    if tag is Preset.CCE:
        M, d = _cce_rows(size)
        return DeviationPolytope(owner, size, M, d, Preset.CCE)
    raise GameError("CUSTOM polytopes are built from explicit rows")


def presets(game: ConstrainedGame, tag: Preset | str) -> list[DeviationPolytope]:
    return [preset(i, s, tag) for i, s in enumerate(game.actions)]


def contains(poly: DeviationPolytope, phi: np.ndarray, tol: float = FEAS_TOL) -> bool:
    phi = np.asarray(phi, dtype=np.float64)
    if phi.shape != (poly.size, poly.size):
        return False
    if phi.min() < -tol or phi.max() > 1 + tol:
        return False
    if np.abs(phi.sum(axis=1) - 1.0).max() > tol:
        return False
    if poly.num_rows == 0:
        return True
    lhs = np.einsum("kba,ba->k", poly.M, phi)
    return bool(np.all(lhs <= poly.d + tol))


def constant_rows(h: np.ndarray) -> np.ndarray:
    """CCE deviation whose every row equals h."""
    h = np.asarray(h, dtype=np.float64)
    return np.tile(h, (h.size, 1))


def own_action_costs(game: ConstrainedGame, i: int, tol: float = MARGINAL_TOL) -> np.ndarray:
    """Cost table c_i(a_i, .) of shape (m, s_i) when costs ignore the others.

    Raises GameError naming a pair of profiles that share a_i but differ in cost.
    """
    s = game.actions[i]
    out = np.empty((game.m, s))
    for j in range(game.m):
        block = _split(game, game.costs[i, j], i)  # (s, others)
        spread = block.max(axis=1) - block.min(axis=1)
        if spread.size and spread.max() > tol:
            a = int(np.argmax(spread))
            r_hi, r_lo = int(np.argmax(block[a])), int(np.argmin(block[a]))
            others = tuple(t for k, t in enumerate(game.actions) if k != i)
            hi = np.unravel_index(r_hi, others) if others else ()
            lo = np.unravel_index(r_lo, others) if others else ()
            p_hi = tuple(int(x) for x in hi[:i]) + (a,) + tuple(int(x) for x in hi[i:])
            p_lo = tuple(int(x) for x in lo[:i]) + (a,) + tuple(int(x) for x in lo[i:])
            raise GameError(
                f"cost {j} of player {i} depends on other players: "
                f"profiles {p_hi} and {p_lo} give {block[a, r_hi]!r} vs {block[a, r_lo]!r}"
            )
        out[j] = block[:, 0]
    return out


def tilde_cost(game: ConstrainedGame, i: int, phi: np.ndarray) -> np.ndarray:
    """Expected costs of a CCE deviation on a game with own-action costs.

    The result does not depend on the strategy being deviated from.
    """
    phi = np.asarray(phi, dtype=np.float64)
    if np.abs(phi - phi[0]).max() > FEAS_TOL:
        raise GameError("tilde_cost needs a CCE deviation (identical rows)")
    return own_action_costs(game, i) @ phi[0]
