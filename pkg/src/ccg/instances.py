"""Instance generators: the non-convexity example, the independent-set gadget,
and seeded random families."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .game import ConstrainedGame, Deviation, GameError, encode_profile


# -- the two-by-two non-convexity example ------------------------------------


class Example1(NamedTuple):
    game: ConstrainedGame
    z1: np.ndarray
    z2: np.ndarray
    z3: np.ndarray
    phi2: Deviation


def example1() -> Example1:
    """Two players, two actions, one shared cost.

    Player 0 is indifferent; player 1 only earns at (a0, a1), which is also
    the only costly profile. z1 and z2 are equilibria, their midpoint z3 is not.
    """
    actions = (2, 2)
    u = np.zeros((2, 4))
    u[1, encode_profile(actions, (0, 1))] = 1.0
    cost = np.empty(4)
    cost[encode_profile(actions, (0, 0))] = -0.5
    cost[encode_profile(actions, (0, 1))] = 1.0
    cost[encode_profile(actions, (1, 0))] = -1.0
    cost[encode_profile(actions, (1, 1))] = -1.0
    game = ConstrainedGame(actions, u, np.stack([cost[None], cost[None]]))
    z1 = np.array([2 / 3, 1 / 3, 0.0, 0.0])
    z2 = np.array([0.0, 0.0, 1.0, 0.0])
    z3 = 0.5 * (z1 + z2)
    phi2 = Deviation(1, np.array([[0.0, 1.0], [0.0, 1.0]]))
    return Example1(game, z1, z2, z3, phi2)


# -- independent-set gadget ---------------------------------------------------


@dataclass(frozen=True)
class GraphInstance:
    num_vertices: int
    edges: frozenset[tuple[int, int]]
    independent_set: tuple[int, ...] | None = None

    def __post_init__(self):
        norm = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise GameError(f"self-loop at vertex {u}")
            if not (0 <= u < self.num_vertices and 0 <= v < self.num_vertices):
                raise GameError(f"edge ({u}, {v}) leaves the vertex range")
            norm.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", frozenset(norm))
        if self.independent_set is not None:
            ind = tuple(sorted(int(v) for v in self.independent_set))
            self.check_independent(ind)
            object.__setattr__(self, "independent_set", ind)

    def adjacent(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges

    def check_independent(self, vertices: Iterable[int]) -> None:
        vs = sorted(set(vertices))
        for k, u in enumerate(vs):
            if not 0 <= u < self.num_vertices:
                raise GameError(f"vertex {u} out of range")
            for v in vs[k + 1:]:
                if self.adjacent(u, v):
                    raise GameError(f"vertices {u} and {v} are adjacent")


def read_edge_list(text: str, num_vertices: int | None = None) -> GraphInstance:
    """Parse 'u v' lines (0-indexed); blank lines and '#' comments are skipped."""
    edges = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GameError(f"edge list line {lineno}: expected 'u v', got {line!r}")
        edges.append((int(parts[0]), int(parts[1])))
    if num_vertices is None:
        num_vertices = 1 + max((max(e) for e in edges), default=-1)
    return GraphInstance(num_vertices, frozenset(edges))


@dataclass(frozen=True)
class GadgetParams:
    """Scalars of the gadget for a graph on ``ell`` vertices."""

    alpha: float
    delta: float
    ell: int

    def __post_init__(self):
        if not self.alpha > 0:
            raise GameError("alpha must be positive")
        if not 0 < self.delta < 1:
            raise GameError("delta must lie in (0, 1)")
        big = self.ell ** (1 - self.delta)
        if abs(big - round(big)) > 1e-9:
            raise GameError(
                f"ell^(1-delta) = {big!r} is not integral for ell={self.ell}, delta={self.delta}"
            )
        if self.ell - round(big) < 2:
            raise GameError(
                f"ell - ell^(1-delta) < 2 for ell={self.ell}, delta={self.delta}: kappa would exceed 2"
            )

    @property
    def big(self) -> int:
        """Target independent-set size ell^(1-delta)."""
        return int(round(self.ell ** (1 - self.delta)))

    @property
    def gamma(self) -> float:
        return self.alpha / 8

    @property
    def eta(self) -> float:
        return self.alpha / 8

    @property
    def eps(self) -> float:
        return self.alpha ** 2 / (128 * self.ell ** 2)

    @property
    def kappa(self) -> float:
        rest = self.ell - self.big
        return rest / (rest - 1)

    @property
    def slack_cost(self) -> float:
        return -1.0 / (4 * self.ell ** 2)


class GadgetLayout(NamedTuple):
    """Action indices: player 0 is [a0, a1, a2, a_v..., aF], player 1 is [a_v..., abar_v..., aF]."""

    ell: int

    def p0_vertex(self, v: int) -> int:
        return 3 + v

    @property
    def p0_free(self) -> int:
        return 3 + self.ell

    def p1_vertex(self, v: int) -> int:
        return v

    def p1_bar(self, v: int) -> int:
        return self.ell + v

    @property
    def p1_free(self) -> int:
        return 2 * self.ell

    @property
    def actions(self) -> tuple[int, int]:
        return (self.ell + 4, 2 * self.ell + 1)


def hardness_gadget(graph: GraphInstance, params: GadgetParams) -> ConstrainedGame:
    ell = graph.num_vertices
    if params.ell != ell:
        raise GameError(f"params built for ell={params.ell}, graph has {ell} vertices")
    L = GadgetLayout(ell)
    s0, s1 = L.actions
    g, e, k = params.gamma, params.eta, params.kappa
    u0 = np.zeros((s0, s1))
    u1 = np.zeros((s0, s1))
    # row a0
    u0[0, : 2 * ell] = g + e / 2
    u1[0, : 2 * ell] = 1.0
    for v in range(ell):
        u0[1, L.p1_vertex(v)] = g + e
        u0[2, L.p1_vertex(v)] = g
        u0[1, L.p1_bar(v)] = g
        u0[2, L.p1_bar(v)] = g + e
        row = L.p0_vertex(v)
        for w in range(ell):
            u0[row, L.p1_vertex(w)] = g
            u0[row, L.p1_bar(w)] = g if w == v else g + k * e
    costs = np.zeros((ell, s0, s1))
    for v in range(ell):
        row = L.p0_vertex(v)
        for w in range(ell):
            if w == v:
                costs[v, row, L.p1_vertex(w)] = 1.0
            elif graph.adjacent(v, w):
                costs[v, row, L.p1_vertex(w)] = -1.0
        costs[v, L.p0_free, :] = params.slack_cost
        costs[v, :, L.p1_free] = params.slack_cost
    flat = costs.reshape(ell, -1)
    return ConstrainedGame(L.actions, np.stack([u0.ravel(), u1.ravel()]), np.stack([flat, flat]))


def completeness_strategy(
    graph: GraphInstance, params: GadgetParams, independent: Sequence[int]
) -> np.ndarray:
    """Player 0 always plays a0; player 1 spreads over V* and the complement's bars."""
    ind = sorted(set(int(v) for v in independent))
    graph.check_independent(ind)
    if len(ind) != params.big:
        raise GameError(f"independent set has size {len(ind)}, need {params.big}")
    ell = graph.num_vertices
    L = GadgetLayout(ell)
    z = np.zeros(L.actions)
    for v in range(ell):
        if v in ind:
            z[0, L.p1_vertex(v)] = 1.0 / (2 * params.big)
        else:
            z[0, L.p1_bar(v)] = 1.0 / (2 * (ell - params.big))
    return z.ravel()


# -- random families ----------------------------------------------------------


def _as_actions(n: int, s) -> tuple[int, ...]:
    if np.isscalar(s):
        return (int(s),) * n
    s = tuple(int(x) for x in s)
    if len(s) != n:
        raise GameError("need one action count per player")
    return s


MAX_SAMPLES = 10_000


def random_marginal_instance(n: int, s, m: int, seed: int, margin: float = 0.1) -> ConstrainedGame:
    """Random game whose costs depend only on the owner's action.

    Every player gets at least one action with all costs <= -margin.
    """
    actions = _as_actions(n, s)
    rng = np.random.default_rng(seed)
    nprof = int(np.prod(actions))
    u = rng.uniform(0.0, 1.0, size=(n, nprof))
    costs = np.empty((n, m, nprof))
    for i, si in enumerate(actions):
        for _ in range(MAX_SAMPLES):
            own = rng.uniform(-1.0, 1.0, size=(m, si))
            if m == 0 or (own.max(axis=0) <= -margin).any():
                break
        else:
            raise GameError("sampling cap exceeded while drawing strictly safe costs")
        shape = [1] * n
        shape[i] = si
        for j in range(m):
            costs[i, j] = np.broadcast_to(own[j].reshape(shape), actions).ravel()
    return ConstrainedGame(actions, u, costs)


def random_game(n: int, s, m: int, seed: int) -> ConstrainedGame:
    """Uniform utilities in [0, 1] and costs in [-1, 1], no structure."""
    actions = _as_actions(n, s)
    rng = np.random.default_rng(seed)
    nprof = int(np.prod(actions))
    return ConstrainedGame(
        actions, rng.uniform(0, 1, size=(n, nprof)), rng.uniform(-1, 1, size=(n, m, nprof))
    )


def social_welfare(game: ConstrainedGame) -> np.ndarray:
    return game.utilities.sum(axis=0)
