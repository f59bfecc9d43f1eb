"""Small dense numerics: simplex LP, projection onto deviation polytopes,
stationary distributions of row-stochastic matrices."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _kernels
from .deviations import DeviationPolytope, constant_rows
from .game import Deviation, GameError


class NumericError(RuntimeError):
    """A solver could not complete (iteration cap, empty polytope, ...)."""


class LpStatus(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass(frozen=True)
class LinearProgram:
    """maximize c @ x  s.t.  A_ub x <= b_ub,  A_eq x == b_eq,  lo <= x <= hi."""

    c: np.ndarray
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=np.float64).reshape(-1)
        n = c.size

        def rows(A, b, name):
            if A is None or len(A) == 0:
                return np.zeros((0, n)), np.zeros(0)
            A = np.asarray(A, dtype=np.float64).reshape(-1, n)
            b = np.asarray(b, dtype=np.float64).reshape(-1)
            if A.shape[0] != b.shape[0]:
                raise ValueError(f"{name}: {A.shape[0]} rows but {b.shape[0]} bounds")
            return A, b

        A_ub, b_ub = rows(self.A_ub, self.b_ub, "A_ub")
        A_eq, b_eq = rows(self.A_eq, self.b_eq, "A_eq")
        lo = np.zeros(n) if self.lo is None else np.broadcast_to(np.asarray(self.lo, float), (n,)).copy()
        hi = np.full(n, np.inf) if self.hi is None else np.broadcast_to(np.asarray(self.hi, float), (n,)).copy()
        if np.any(lo > hi):
            raise ValueError("inconsistent bounds: lo > hi")
        for arr in (c, A_ub, b_ub, A_eq, b_eq):
            if not np.all(np.isfinite(arr)):
                raise ValueError("LP data must be finite")
        for name, val in dict(c=c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, lo=lo, hi=hi).items():
            object.__setattr__(self, name, val)

    @property
    def num_vars(self) -> int:
        return self.c.size

    def residual(self, x: np.ndarray) -> float:
        parts = [0.0]
        if self.b_ub.size:
            parts.append(float((self.A_ub @ x - self.b_ub).max()))
        if self.b_eq.size:
            parts.append(float(np.abs(self.A_eq @ x - self.b_eq).max()))
        parts.append(float((self.lo - x).max(initial=0.0)))
        parts.append(float((x - self.hi).max(initial=0.0)))
        return max(parts)


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    x: np.ndarray | None = None
    objective: float = float("nan")
    residual: float = float("nan")
    iterations: int = 0


# tolerances for the tableau
_PIV = 1e-10
_RC = 1e-10
_FEAS = 1e-9
_MAX_ITER = 50_000


@dataclass
class _Standard:
    """max c.y s.t. A y == b, y >= 0 obtained from a LinearProgram."""

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    T: np.ndarray  # x = x0 + T @ y[:ny]
    x0: np.ndarray
    ny: int
    slack_rows: list[int] = field(default_factory=list)


def _standardize(lp: LinearProgram) -> _Standard:
    n = lp.num_vars
    cols = []  # (var, sign)
    x0 = np.zeros(n)
    ub_rows, ub_rhs = [], []
    for j in range(n):
        lo, hi = lp.lo[j], lp.hi[j]
        if np.isfinite(lo):
            x0[j] = lo
            cols.append((j, 1.0))
            if np.isfinite(hi):
                ub_rows.append((len(cols) - 1, 1.0))
                ub_rhs.append(hi - lo)
        elif np.isfinite(hi):
            x0[j] = hi
            cols.append((j, -1.0))
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))
    ny = len(cols)
    T = np.zeros((n, ny))
    for k, (j, sg) in enumerate(cols):
        T[j, k] = sg
    A_ub = lp.A_ub @ T
    b_ub = lp.b_ub - lp.A_ub @ x0
    if ub_rows:
        extra = np.zeros((len(ub_rows), ny))
        for r, (k, _) in enumerate(ub_rows):
            extra[r, k] = 1.0
        A_ub = np.vstack([A_ub, extra])
        b_ub = np.concatenate([b_ub, ub_rhs])
    A_eq = lp.A_eq @ T
    b_eq = lp.b_eq - lp.A_eq @ x0
    n_ub = A_ub.shape[0]
    A = np.zeros((n_ub + A_eq.shape[0], ny + n_ub))
    A[:n_ub, :ny] = A_ub
    A[:n_ub, ny:] = np.eye(n_ub)
    A[n_ub:, :ny] = A_eq
    b = np.concatenate([b_ub, b_eq])
    c = np.zeros(ny + n_ub)
    c[:ny] = lp.c @ T
    return _Standard(A, b, c, T, x0, ny, list(range(n_ub)))


def _pivot(tab: np.ndarray, obj: np.ndarray, basis: list[int], r: int, j: int) -> None:
    tab[r] /= tab[r, j]
    col = tab[:, j].copy()
    col[r] = 0.0
    tab -= np.outer(col, tab[r])
    obj -= obj[j] * tab[r]
    basis[r] = j


def _simplex(tab, obj, basis, allowed, iters):
    """Bland-rule primal simplex on a tableau whose objective row holds
    reduced costs (last entry: minus the objective value)."""
    while True:
        if iters >= _MAX_ITER:
            raise NumericError("simplex iteration cap reached")
        cand = np.flatnonzero((obj[:-1] > _RC) & allowed)
        if cand.size == 0:
            return "optimal", iters
        j = int(cand[0])
        col = tab[:, j]
        pos = np.flatnonzero(col > _PIV)
        if pos.size == 0:
            return "unbounded", iters
        ratios = tab[pos, -1] / col[pos]
        best = ratios.min()
        ties = pos[ratios <= best + 1e-12 * max(1.0, abs(best))]
        r = int(min(ties, key=lambda q: basis[q]))
        _pivot(tab, obj, basis, r, j)
        iters += 1


def lp_solve(lp: LinearProgram) -> LpSolution:
    """Two-phase dense simplex with Bland's anti-cycling rule."""
    st = _standardize(lp)
    A, b = st.A.copy(), st.b.copy()
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1
    rows, ncol = A.shape
    slack_ok = np.zeros(rows, dtype=bool)
    slack_ok[st.slack_rows] = True
    slack_ok &= ~neg
    art_rows = np.flatnonzero(~slack_ok)
    nart = art_rows.size
    tab = np.zeros((rows, ncol + nart + 1))
    tab[:, :ncol] = A
    tab[:, -1] = b
    basis = [0] * rows
    for r in range(rows):
        if slack_ok[r]:
            basis[r] = st.ny + r
    for k, r in enumerate(art_rows):
        tab[r, ncol + k] = 1.0
        basis[r] = ncol + k

    iters = 0
    allowed = np.ones(ncol + nart, dtype=bool)
    if nart:
        cost = np.zeros(ncol + nart + 1)
        cost[ncol:ncol + nart] = -1.0
        obj = cost.copy()
        for r in range(rows):
            obj -= cost[basis[r]] * tab[r]
        _, iters = _simplex(tab, obj, basis, allowed, iters)
        if -obj[-1] < -_FEAS * max(1.0, np.abs(b).max(initial=0.0)):
            return LpSolution(LpStatus.INFEASIBLE, iterations=iters)
        # drive zero-level artificials out of the basis
        keep = []
        for r in range(rows):
            if basis[r] >= ncol:
                nz = np.flatnonzero(np.abs(tab[r, :ncol]) > _PIV)
                if nz.size:
                    _pivot(tab, obj, basis, r, int(nz[0]))
                    keep.append(r)
            else:
                keep.append(r)
        tab = tab[keep]
        basis = [basis[r] for r in keep]
        tab = np.delete(tab, np.s_[ncol:ncol + nart], axis=1)
        rows = tab.shape[0]
    allowed = np.ones(ncol, dtype=bool)
    cost = np.concatenate([st.c, [0.0]])
    obj = cost.copy()
    for r in range(rows):
        obj -= cost[basis[r]] * tab[r]
    status, iters = _simplex(tab, obj, basis, allowed, iters)
    if status == "unbounded":
        return LpSolution(LpStatus.UNBOUNDED, iterations=iters)

    y = np.zeros(ncol)
    y[basis] = tab[:, -1]
    y = _polish_basis(st, basis, y)
    x = st.x0 + st.T @ y[:st.ny]
    return LpSolution(LpStatus.OPTIMAL, x, float(lp.c @ x), lp.residual(x), iters)


def _polish_basis(st: _Standard, basis: list[int], y: np.ndarray) -> np.ndarray:
    """Recompute basic values from the original data to shed tableau drift."""
    B = st.A[:, basis]
    if B.shape[0] != B.shape[1]:
        sol, *_ = np.linalg.lstsq(B, st.b, rcond=None)
    else:
        try:
            sol = np.linalg.solve(B, st.b)
        except np.linalg.LinAlgError:
            return np.clip(y, 0.0, None)
    cand = np.zeros_like(y)
    cand[basis] = sol
    if cand.min() < -1e-9 or np.abs(st.A @ cand - st.b).max() > 1e-9:
        return np.clip(y, 0.0, None)
    return np.clip(cand, 0.0, None)


# ---------------------------------------------------------------------------
# projection
# ---------------------------------------------------------------------------

PROJ_TOL = 1e-10
PROJ_SWEEPS = 10_000


def _polish_projection(p, x, block, A, d):
    """Exact projection onto the face Dykstra converged to, when verifiable."""
    n = p.size
    nblocks = n // block
    act_rows = np.flatnonzero(A @ x - d >= -1e-7) if A.shape[0] else np.zeros(0, int)
    zero = np.flatnonzero(x <= 1e-9)
    E = np.zeros((nblocks + act_rows.size + zero.size, n))
    f = np.zeros(E.shape[0])
    for r in range(nblocks):
        E[r, r * block:(r + 1) * block] = 1.0
        f[r] = 1.0
    E[nblocks:nblocks + act_rows.size] = A[act_rows]
    f[nblocks:nblocks + act_rows.size] = d[act_rows]
    E[nblocks + act_rows.size + np.arange(zero.size), zero] = 1.0
    delta, *_ = np.linalg.lstsq(E, E @ p - f, rcond=None)
    y = p - delta
    y[zero] = 0.0
    if y.min() < -1e-12:
        return None
    if A.shape[0] and (A @ y - d).max() > 1e-12:
        return None
    if np.abs(y.reshape(nblocks, block).sum(axis=1) - 1.0).max() > 1e-12:
        return None
    if np.linalg.norm(y - p) > np.linalg.norm(x - p) + 1e-8:
        return None
    return np.clip(y, 0.0, None)


def project_vector(p, block, A, d):
    """Euclidean projection of ``p`` onto (simplex blocks) cap {A x <= d}."""
    p = np.ascontiguousarray(p, dtype=np.float64)
    A = np.ascontiguousarray(A, dtype=np.float64).reshape(-1, p.size)
    d = np.ascontiguousarray(d, dtype=np.float64)
    x, sweeps = _kernels.dykstra(p, block, A, d, PROJ_SWEEPS, PROJ_TOL)
    if sweeps == 0:
        return x
    y = _polish_projection(p, x, block, A, d)
    if y is not None:
        return y
    viol = max((A @ x - d).max(initial=0.0), -x.min())
    if viol > 1e-6:
        _raise_if_empty(block, p.size, A, d)
    x = np.clip(x, 0.0, None)
    x = x.reshape(-1, block)
    return (x / x.sum(axis=1, keepdims=True)).reshape(-1)


def _raise_if_empty(block, n, A, d):
    nblocks = n // block
    E = np.zeros((nblocks, n))
    for r in range(nblocks):
        E[r, r * block:(r + 1) * block] = 1.0
    sol = lp_solve(LinearProgram(np.zeros(n), A, d, E, np.ones(nblocks)))
    if sol.status is LpStatus.INFEASIBLE:
        raise NumericError("cannot project onto an empty polytope")


def project_onto(poly: DeviationPolytope, point: np.ndarray) -> Deviation:
    """Nearest member of ``poly`` to ``point`` in Frobenius norm."""
    point = np.asarray(point, dtype=np.float64)
    s = poly.size
    if point.shape != (s, s):
        raise GameError(f"point has shape {point.shape}, polytope expects {(s, s)}")
    if poly.is_cce:
        # ||P - 1 h^T||^2 = s ||h - mean row||^2 + const
        A, d = poly.constant_row_form()
        h = project_vector(point.mean(axis=0), s, A, d)
        return Deviation(poly.owner, constant_rows(h))
    x = project_vector(point.reshape(-1), s, poly.M.reshape(poly.num_rows, s * s), poly.d)
    return Deviation(poly.owner, x.reshape(s, s))


# ---------------------------------------------------------------------------
# stationary distributions
# ---------------------------------------------------------------------------


def stationary(phi) -> np.ndarray:
    """Distribution x with x[a] = sum_b phi[b, a] x[b].

    Reducible chains admit many; the minimum-norm one is returned, which
    mixes the closed classes and is the uniform vector for phi = I.
    """
    phi = phi.phi if isinstance(phi, Deviation) else np.asarray(phi, dtype=np.float64)
    s = phi.shape[0]
    lhs = np.vstack([phi.T - np.eye(s), np.ones((1, s))])
    rhs = np.zeros(s + 1)
    rhs[-1] = 1.0
    x, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    x = np.clip(x, 0.0, None)
    return x / x.sum()
