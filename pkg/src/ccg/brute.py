"""Exhaustive grid search used as an independent check on the solvers.

Grid points are z = x / k for every composition x of k into |A| parts. A
point counts when it is safe and every player's best safe deviation gains at
most eps. Deviation maxima are taken over explicitly enumerated vertices, so
no LP is involved anywhere in this module.
"""

from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .deviations import DeviationPolytope, constant_rows, own_action_costs
from .game import (
    FEAS_TOL,
    ConstrainedGame,
    Deviation,
    GameError,
    deviation_gradient,
    product_strategy,
    pushed_payoff,
)
from .special import check_fixed_safe_set

VERTEX_TOL = 1e-9


def _combos(n_rows: int, size: int) -> np.ndarray:
    if size == 0:
        return np.zeros((1, 0), dtype=np.int64)
    out = np.array(list(itertools.combinations(range(n_rows), size)), dtype=np.int64)
    return out.reshape(-1, size)


def enumerate_vertices(E, f, G, h, tol: float = VERTEX_TOL) -> np.ndarray:
    """All vertices of {x : E x = f, G x <= h}, deduplicated, in a stable order.

    E must have full row rank; vertices are found by fixing dim - rank(E)
    inequality rows active and solving the square system.
    """
    E, f, G, h = (np.asarray(a, dtype=np.float64) for a in (E, f, G, h))
    dim = G.shape[1]
    combos = _combos(G.shape[0], dim - E.shape[0])
    if combos.shape[0] == 0:
        return np.zeros((0, dim))
    M = np.empty((combos.shape[0], dim, dim))
    M[:, : E.shape[0]] = E
    M[:, E.shape[0]:] = G[combos]
    rhs = np.empty((combos.shape[0], dim))
    rhs[:, : E.shape[0]] = f
    rhs[:, E.shape[0]:] = h[combos]
    ok = np.abs(np.linalg.det(M)) > _kernels.PIVOT_TOL
    if not ok.any():
        return np.zeros((0, dim))
    X = np.linalg.solve(M[ok], rhs[ok][..., None])[..., 0]
    X = X[np.all(X @ G.T <= h + tol, axis=1)]
    if X.shape[0] == 0:
        return X
    _, first = np.unique(np.round(X / tol).astype(np.int64), axis=0, return_index=True)
    return X[np.sort(first)]


def _simplex_system(s: int, A: np.ndarray, b: np.ndarray):
    """{h in simplex, A h <= b} in the (E, f, G, h) form."""
    return (
        np.ones((1, s)),
        np.ones(1),
        np.vstack([-np.eye(s), A.reshape(-1, s)]),
        np.concatenate([np.zeros(s), b]),
    )


def safe_vertices(game: ConstrainedGame, poly: DeviationPolytope, i: int) -> np.ndarray:
    """Vertices h of the fixed safe CCE set, as rows over player i's actions."""
    s = poly.size
    A, b = poly.constant_row_form()
    own = own_action_costs(game, i)
    return enumerate_vertices(*_simplex_system(s, np.vstack([A, own]), np.concatenate([b, np.zeros(game.m)])))


def _normalize_row(h: np.ndarray) -> np.ndarray:
    h = np.clip(h, 0.0, None)
    return h / h.sum()


def _gain_rows(game: ConstrainedGame, polys: Sequence[DeviationPolytope]):
    rows, owner = [], []
    for i in range(game.n):
        V = safe_vertices(game, polys[i], i)
        if V.shape[0] == 0:
            raise GameError(f"player {i} has no safe deviation")
        for h in V:
            dev = Deviation(i, constant_rows(_normalize_row(h)))
            rows.append(pushed_payoff(game, game.utilities[i], dev) - game.utilities[i])
            owner.append(i)
    return np.array(rows), np.array(owner, dtype=np.int64)


@dataclass(frozen=True)
class BruteResult:
    value: float
    z: np.ndarray | None
    points: int
    safe_points: int
    equilibria: int
    partial: bool
    grid_k: int

    @property
    def found(self) -> bool:
        return self.z is not None

    def to_dict(self) -> dict:
        return {
            "found": self.found,
            "value": self.value if self.found else None,
            "z": None if self.z is None else self.z.tolist(),
            "grid_k": self.grid_k,
            "points": self.points,
            "safe_points": self.safe_points,
            "equilibria": self.equilibria,
            "partial": self.partial,
        }


def grid_size(k: int, parts: int) -> int:
    return math.comb(k + parts - 1, parts - 1)


def brute_oracle(
    game: ConstrainedGame,
    polys: Sequence[DeviationPolytope],
    objective,
    grid_k: int,
    eps: float,
    budget: float | None = None,
    threads: int = 1,
    tol: float = FEAS_TOL,
) -> BruteResult:
    """Best objective over grid points that are safe eps-equilibria.

    ``budget`` is wall-clock seconds; when it runs out the remaining grid
    slices are skipped and the result is flagged partial.
    """
    if grid_k < 1:
        raise GameError("grid_k must be positive")
    obj = np.asarray(objective, dtype=np.float64).reshape(-1)
    if obj.shape != (game.num_profiles,):
        raise GameError("objective needs one coefficient per profile")
    deadline = None if budget is None else time.monotonic() + budget
    if check_fixed_safe_set(game, polys):
        return _fixed_scan(game, polys, obj, grid_k, eps, deadline, threads, tol)
    return _general_scan(game, polys, obj, grid_k, eps, deadline, tol)


def _fixed_scan(game, polys, obj, k, eps, deadline, threads, tol):
    W, owner = _gain_rows(game, polys)
    C = game.costs.reshape(-1, game.num_profiles)
    P = game.num_profiles

    def run(j):
        if deadline is not None and time.monotonic() > deadline:
            return None
        return _kernels.grid_scan(k, P, W, owner, game.n, C, obj, eps, tol, j, j + 1)

    slices = range(k + 1) if P > 1 else range(1)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outs = list(pool.map(run, slices))
    else:
        outs = [run(j) for j in slices]
    best, best_x = -np.inf, None
    pts = safe = eq = 0
    partial = False
    for out in outs:  # slice order keeps the reduction deterministic
        if out is None:
            partial = True
            continue
        val, parts, n_pts, n_safe, n_eq = out
        pts, safe, eq = pts + n_pts, safe + n_safe, eq + n_eq
        if n_eq and val > best:
            best, best_x = float(val), np.asarray(parts)
    z = None if best_x is None else best_x / k
    return BruteResult(best, z, pts, safe, eq, partial, k)


class _VertexGaps:
    """Best-safe-deviation gaps at arbitrary z via vertex enumeration over phi."""

    def __init__(self, game: ConstrainedGame, polys: Sequence[DeviationPolytope]):
        self.game = game
        self.polys = polys
        self.parts = []
        for i, poly in enumerate(polys):
            s = poly.size
            E = np.kron(np.eye(s), np.ones((1, s)))
            G0 = np.vstack([-np.eye(s * s), poly.M.reshape(poly.num_rows, s * s)])
            h0 = np.concatenate([np.zeros(s * s), poly.d])
            combos = _combos(G0.shape[0] + game.m, s * s - s)
            self.parts.append((E, np.ones(s), G0, h0, combos))

    def gaps(self, z: np.ndarray, tol: float) -> np.ndarray | None:
        """Per-player gap, or None when some player has no safe deviation."""
        game = self.game
        out = np.empty(game.n)
        for i, (E, f, G0, h0, combos) in enumerate(self.parts):
            K = np.stack(
                [deviation_gradient(game, game.costs[i, j], z, i).ravel() for j in range(game.m)]
            ).reshape(game.m, -1)
            G = np.vstack([G0, K])
            h = np.concatenate([h0, np.zeros(game.m)])
            grad = deviation_gradient(game, game.utilities[i], z, i).ravel()
            best, _, found = _kernels.max_over_vertices(E, f, G, h, grad, combos, tol)
            if not found:
                return None
            out[i] = best - game.utilities[i] @ z
        return out


def _general_scan(game, polys, obj, k, eps, deadline, tol):
    P = game.num_profiles
    C = game.costs.reshape(-1, P)
    oracle = _VertexGaps(game, polys)
    best, best_z = -np.inf, None
    pts = safe = eq = 0
    partial = False
    for X in _kernels.compositions(k, P):
        if deadline is not None and time.monotonic() > deadline:
            partial = True
            break
        Z = X / k
        pts += Z.shape[0]
        if C.shape[0]:
            Z = Z[(Z @ C.T).max(axis=1) <= tol]
        safe += Z.shape[0]
        for z in Z:
            val = float(obj @ z)
            if best_z is not None and val <= best:
                continue  # cannot improve; skip the costly gap evaluation
            g = oracle.gaps(z, VERTEX_TOL)
            if g is None or g.max() > eps:
                continue
            eq += 1
            best, best_z = val, z.copy()
    return BruteResult(best, best_z, pts, safe, eq, partial, k)


@dataclass(frozen=True)
class ProductSearch:
    z: np.ndarray | None
    gap: float
    marginals: tuple[np.ndarray, ...] | None
    points: int
    safe_points: int

    @property
    def found(self) -> bool:
        return self.z is not None


def product_grid_search(
    game: ConstrainedGame,
    polys: Sequence[DeviationPolytope],
    grid_k: int,
    target: float = 0.0,
    tol: float = FEAS_TOL,
) -> ProductSearch:
    """Safe product distribution on the grid with the smallest max gap.

    Stops early at the first point whose gap is at most ``target``.
    """
    grids = [np.concatenate(list(_kernels.compositions(grid_k, s))) / grid_k for s in game.actions]
    C = game.costs.reshape(-1, game.num_profiles)
    oracle = _VertexGaps(game, polys)
    best_gap, best = np.inf, None
    pts = safe = 0
    for idx in itertools.product(*(range(g.shape[0]) for g in grids)):
        margs = tuple(g[t] for g, t in zip(grids, idx))
        z = product_strategy(margs)
        pts += 1
        if C.shape[0] and (C @ z).max() > tol:
            continue
        safe += 1
        gaps = oracle.gaps(z, VERTEX_TOL)
        if gaps is None:
            continue
        g = float(gaps.max())
        if g < best_gap:
            best_gap, best = g, (z, margs)
            if g <= target:
                break
    if best is None:
        return ProductSearch(None, np.inf, None, pts, safe)
    return ProductSearch(best[0], best_gap, best[1], pts, safe)
