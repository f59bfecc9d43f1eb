"""Cost-constrained normal-form games.

Joint action profiles are stored flat in row-major order with player 0 the
slowest axis, so ``np.ravel_multi_index(profile, actions)`` is the flat index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

FEAS_TOL = 1e-9
CLAMP_TOL = 1e-12


class GameError(ValueError):
    """Malformed game, strategy or deviation input."""


class DimensionError(GameError):
    def __init__(self, message: str, player: int | None = None, axis: str | None = None):
        super().__init__(message)
        self.player = player
        self.axis = axis


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ConstrainedGame:
    """An n-player game where every player also carries m cost functions.

    ``utilities`` has shape (n, P) and ``costs`` shape (n, m, P), P being the
    number of joint profiles.
    """

    actions: tuple[int, ...]
    utilities: np.ndarray
    costs: np.ndarray
    num_profiles: int = field(init=False)

    def __post_init__(self):
        actions = tuple(int(s) for s in self.actions)
        if not actions:
            raise GameError("a game needs at least one player")
        for i, s in enumerate(actions):
            if s < 1:
                raise DimensionError(f"player {i} has {s} actions", player=i, axis="actions")
        nprof = int(np.prod(actions))
        n = len(actions)
        u = np.asarray(self.utilities, dtype=np.float64)
        c = np.asarray(self.costs, dtype=np.float64)
        if c.size == 0:
            c = c.reshape(n, 0, nprof) if c.ndim != 3 else c
        if u.shape != (n, nprof):
            raise DimensionError(
                f"utilities must have shape {(n, nprof)}, got {u.shape}", axis="utilities"
            )
        if c.ndim != 3 or c.shape[0] != n or c.shape[2] != nprof:
            raise DimensionError(
                f"costs must have shape (n={n}, m, P={nprof}), got {c.shape}", axis="costs"
            )
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(c))):
            raise GameError("utilities and costs must be finite")
        if u.min(initial=0.0) < 0.0 or u.max(initial=0.0) > 1.0:
            i = int(np.argwhere((u < 0) | (u > 1))[0][0])
            raise GameError(f"utilities of player {i} leave [0, 1]")
        if c.size and (c.min() < -1.0 or c.max() > 1.0):
            i = int(np.argwhere((c < -1) | (c > 1))[0][0])
            raise GameError(f"costs of player {i} leave [-1, 1]")
        object.__setattr__(self, "actions", actions)
        object.__setattr__(self, "utilities", _frozen(u))
        object.__setattr__(self, "costs", _frozen(c))
        object.__setattr__(self, "num_profiles", nprof)

    @property
    def n(self) -> int:
        return len(self.actions)

    @property
    def m(self) -> int:
        return self.costs.shape[1]

    def utility_tensor(self, i: int) -> np.ndarray:
        return self.utilities[self._player(i)].reshape(self.actions)

    def cost_tensor(self, i: int, j: int) -> np.ndarray:
        return self.costs[self._player(i), j].reshape(self.actions)

    def _player(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise DimensionError(f"player index {i} out of range for n={self.n}", player=i)
        return i

    def __eq__(self, other):
        if not isinstance(other, ConstrainedGame):
            return NotImplemented
        return (
            self.actions == other.actions
            and np.array_equal(self.utilities, other.utilities)
            and np.array_equal(self.costs, other.costs)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Deviation:
    """Row-stochastic map ``phi[b, a]``: play a when b is recommended."""

    owner: int
    phi: np.ndarray

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=np.float64)
        if phi.ndim != 2 or phi.shape[0] != phi.shape[1]:
            raise DimensionError(
                f"deviation of player {self.owner} must be square, got {phi.shape}",
                player=self.owner,
                axis="phi",
            )
        if phi.min() < -FEAS_TOL or phi.max() > 1 + FEAS_TOL:
            raise GameError(f"deviation of player {self.owner} has entries outside [0, 1]")
        rows = phi.sum(axis=1)
        if np.abs(rows - 1.0).max() > FEAS_TOL:
            b = int(np.argmax(np.abs(rows - 1.0)))
            raise GameError(f"row {b} of deviation of player {self.owner} sums to {rows[b]!r}")
        object.__setattr__(self, "owner", int(self.owner))
        object.__setattr__(self, "phi", _frozen(phi))

    @classmethod
    def identity(cls, owner: int, s: int) -> "Deviation":
        return cls(owner, np.eye(s))


# -- profile indexing -------------------------------------------------------


def encode_profile(actions: Sequence[int], profile: Sequence[int]) -> int:
    return int(np.ravel_multi_index(tuple(profile), tuple(actions)))


def decode_profile(actions: Sequence[int], index: int) -> tuple[int, ...]:
    return tuple(int(a) for a in np.unravel_index(index, tuple(actions)))


def as_strategy(game: ConstrainedGame, z) -> np.ndarray:
    """Validate a correlated strategy, clamping round-off negatives to zero."""
    z = np.array(z, dtype=np.float64).reshape(-1)
    if z.shape != (game.num_profiles,):
        raise DimensionError(
            f"strategy has {z.size} entries, game has {game.num_profiles} profiles",
            axis="profiles",
        )
    if not np.all(np.isfinite(z)):
        raise GameError("strategy has non-finite entries")
    if z.min() < -CLAMP_TOL:
        k = int(np.argmin(z))
        raise GameError(f"strategy entry {k} is negative ({z[k]!r})")
    if abs(z.sum() - 1.0) > FEAS_TOL:
        raise GameError(f"strategy sums to {z.sum()!r}, not 1")
    if z.min() < 0.0:
        z = np.clip(z, 0.0, None)
        z /= z.sum()
    return z


def product_strategy(marginals: Sequence[np.ndarray]) -> np.ndarray:
    z = np.ones(1)
    for x in marginals:
        z = np.multiply.outer(z, np.asarray(x, dtype=np.float64)).reshape(-1)
    return z


def marginal(game: ConstrainedGame, z: np.ndarray, i: int) -> np.ndarray:
    zt = np.asarray(z).reshape(game.actions)
    axes = tuple(k for k in range(game.n) if k != i)
    return zt.sum(axis=axes)


# -- deviations applied to strategies ----------------------------------------


def _split(game: ConstrainedGame, flat: np.ndarray, i: int) -> np.ndarray:
    """View a flat profile vector as (own action, flattened others)."""
    t = np.asarray(flat).reshape(game.actions)
    return np.moveaxis(t, i, 0).reshape(game.actions[i], -1)


def _merge(game: ConstrainedGame, mat: np.ndarray, i: int) -> np.ndarray:
    others = tuple(s for k, s in enumerate(game.actions) if k != i)
    t = mat.reshape((game.actions[i],) + others)
    return np.moveaxis(t, 0, i).reshape(-1)


def _check_dev(game: ConstrainedGame, dev: Deviation) -> None:
    i = game._player(dev.owner)
    s = game.actions[i]
    if dev.phi.shape != (s, s):
        raise DimensionError(
            f"deviation for player {i} is {dev.phi.shape}, expected {(s, s)}",
            player=i,
            axis="phi",
        )


def apply_deviation(game: ConstrainedGame, z: np.ndarray, dev: Deviation) -> np.ndarray:
    """Strategy obtained when ``dev.owner`` re-maps recommendations through phi."""
    _check_dev(game, dev)
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (game.num_profiles,):
        raise DimensionError("strategy length does not match the game", axis="profiles")
    i = dev.owner
    return _merge(game, dev.phi.T @ _split(game, z, i), i)


def pushed_payoff(game: ConstrainedGame, values: np.ndarray, dev: Deviation) -> np.ndarray:
    """Payoff vector w with w . z == values . (phi <> z) for every z."""
    _check_dev(game, dev)
    i = dev.owner
    return _merge(game, dev.phi @ _split(game, values, i), i)


def deviation_gradient(game: ConstrainedGame, values: np.ndarray, z: np.ndarray, i: int) -> np.ndarray:
    """Matrix G with values . (phi <> z) == sum(G * phi) for every phi of player i."""
    return _split(game, z, i) @ _split(game, values, i).T


def expected_utility(game: ConstrainedGame, z: np.ndarray, i: int) -> float:
    return float(game.utilities[game._player(i)] @ np.asarray(z, dtype=np.float64))


def expected_costs(game: ConstrainedGame, z: np.ndarray, i: int) -> np.ndarray:
    return game.costs[game._player(i)] @ np.asarray(z, dtype=np.float64)


@dataclass(frozen=True)
class Safety:
    safe: bool
    residuals: np.ndarray  # (n, m)
    max_residual: float


def is_safe(game: ConstrainedGame, z: np.ndarray, tol: float = FEAS_TOL) -> Safety:
    res = np.einsum("ijp,p->ij", game.costs, np.asarray(z, dtype=np.float64))
    worst = float(res.max()) if res.size else 0.0
    return Safety(worst <= tol, res, worst)
