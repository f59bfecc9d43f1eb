"""Hot inner loops, compiled with numba when available.

Every kernel has a numpy implementation and, if numba imports, an @njit twin.
Set ``CCG_DISABLE_NUMBA=1`` before import to force the numpy path. Both
paths return the same values up to floating-point summation order.
"""

from __future__ import annotations

import itertools
import os

import numpy as np

_DISABLED = os.environ.get("CCG_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and not _DISABLED

PIVOT_TOL = 1e-12
# a stalled iterate is only accepted once it is also this close to feasible
DYKSTRA_FEAS = 1e-9


# ---------------------------------------------------------------------------
# simplex projection
# ---------------------------------------------------------------------------


def _np_project_blocks(x, block):
    """Project each consecutive block of ``x`` onto the probability simplex."""
    v = x.reshape(-1, block)
    u = -np.sort(-v, axis=1)
    css = np.cumsum(u, axis=1) - 1.0
    idx = np.arange(1, block + 1)
    cond = u - css / idx > 0
    rho = block - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = css[np.arange(v.shape[0]), rho] / (rho + 1)
    return np.maximum(v - theta[:, None], 0.0).reshape(-1)


def _nb_project_blocks(x, block):
    nb_ = x.shape[0] // block
    out = np.empty_like(x)
    for r in range(nb_):
        v = x[r * block:(r + 1) * block]
        u = np.sort(v)[::-1]
        css = 0.0
        theta = 0.0
        for j in range(block):
            css += u[j]
            t = (css - 1.0) / (j + 1)
            if u[j] - t > 0:
                theta = t
        for j in range(block):
            w = v[j] - theta
            out[r * block + j] = w if w > 0.0 else 0.0
    return out


# ---------------------------------------------------------------------------
# Dykstra projection onto (product of simplices) cap {A x <= d}
# ---------------------------------------------------------------------------


def _np_dykstra(p, block, A, d, max_sweeps, tol):
    x = _np_project_blocks(p, block)
    if A.shape[0] == 0 or np.all(A @ x <= d):
        return x, 0
    x = p.copy()
    incr = np.zeros((A.shape[0] + 1, p.shape[0]))
    norms = np.einsum("ij,ij->i", A, A)
    for sweep in range(1, max_sweeps + 1):
        prev = x.copy()
        t = x + incr[0]
        x = _np_project_blocks(t, block)
        incr[0] = t - x
        for k in range(A.shape[0]):
            t = x + incr[k + 1]
            viol = A[k] @ t - d[k]
            if viol > 0.0 and norms[k] > 0.0:
                x = t - (viol / norms[k]) * A[k]
            else:
                x = t
            incr[k + 1] = t - x
        if np.abs(x - prev).max() <= tol and _np_violation(x, block, A, d) <= DYKSTRA_FEAS:
            return x, sweep
    return x, max_sweeps


def _np_violation(x, block, A, d):
    v = max(-x.min(), np.abs(x.reshape(-1, block).sum(axis=1) - 1.0).max())
    if A.shape[0]:
        v = max(v, (A @ x - d).max())
    return v


def _nb_dykstra(p, block, A, d, max_sweeps, tol):
    n = p.shape[0]
    x = _nb_project_blocks(p, block)
    feasible = True
    for k in range(A.shape[0]):
        if np.dot(A[k], x) > d[k]:
            feasible = False
            break
    if feasible:
        return x, 0
    x = p.copy()
    rows = A.shape[0]
    incr = np.zeros((rows + 1, n))
    norms = np.empty(rows)
    for k in range(rows):
        norms[k] = np.dot(A[k], A[k])
    t = np.empty(n)
    for sweep in range(1, max_sweeps + 1):
        prev = x.copy()
        for q in range(n):
            t[q] = x[q] + incr[0, q]
        x = _nb_project_blocks(t, block)
        for q in range(n):
            incr[0, q] = t[q] - x[q]
        for k in range(rows):
            viol = -d[k]
            for q in range(n):
                t[q] = x[q] + incr[k + 1, q]
                viol += A[k, q] * t[q]
            scale = viol / norms[k] if (viol > 0.0 and norms[k] > 0.0) else 0.0
            for q in range(n):
                x[q] = t[q] - scale * A[k, q]
                incr[k + 1, q] = t[q] - x[q]
        move = 0.0
        for q in range(n):
            dq = abs(x[q] - prev[q])
            if dq > move:
                move = dq
        if move <= tol and _nb_violation(x, block, A, d) <= DYKSTRA_FEAS:
            return x, sweep
    return x, max_sweeps


def _nb_violation(x, block, A, d):
    v = 0.0
    for r in range(x.shape[0] // block):
        acc = 0.0
        for q in range(r * block, (r + 1) * block):
            acc += x[q]
            if -x[q] > v:
                v = -x[q]
        if abs(acc - 1.0) > v:
            v = abs(acc - 1.0)
    for k in range(A.shape[0]):
        g = np.dot(A[k], x) - d[k]
        if g > v:
            v = g
    return v


# ---------------------------------------------------------------------------
# vertex enumeration: max of a linear objective over {E x = f, G x <= h}
# ---------------------------------------------------------------------------


def _nb_solve_small(M, rhs):
    """Gaussian elimination with partial pivoting; ok=False when singular."""
    n = M.shape[0]
    a = M.copy()
    b = rhs.copy()
    for c in range(n):
        piv = c
        big = abs(a[c, c])
        for r in range(c + 1, n):
            if abs(a[r, c]) > big:
                big = abs(a[r, c])
                piv = r
        if big < PIVOT_TOL:
            return b, False
        if piv != c:
            for q in range(n):
                tmp = a[c, q]
                a[c, q] = a[piv, q]
                a[piv, q] = tmp
            tmp = b[c]
            b[c] = b[piv]
            b[piv] = tmp
        for r in range(c + 1, n):
            f = a[r, c] / a[c, c]
            if f != 0.0:
                for q in range(c, n):
                    a[r, q] -= f * a[c, q]
                b[r] -= f * b[c]
    x = np.empty(n)
    for c in range(n - 1, -1, -1):
        acc = b[c]
        for q in range(c + 1, n):
            acc -= a[c, q] * x[q]
        x[c] = acc / a[c, c]
    return x, True


def _nb_max_over_vertices(E, f, G, h, obj, combos, tol):
    dim = obj.shape[0]
    ne = E.shape[0]
    best = -np.inf
    best_x = np.zeros(dim)
    found = False
    M = np.empty((dim, dim))
    rhs = np.empty(dim)
    for r in range(ne):
        for q in range(dim):
            M[r, q] = E[r, q]
        rhs[r] = f[r]
    for c in range(combos.shape[0]):
        for t in range(combos.shape[1]):
            row = combos[c, t]
            for q in range(dim):
                M[ne + t, q] = G[row, q]
            rhs[ne + t] = h[row]
        x, ok = _nb_solve_small(M, rhs)
        if not ok:
            continue
        feasible = True
        for r in range(G.shape[0]):
            if np.dot(G[r], x) > h[r] + tol:
                feasible = False
                break
        if not feasible:
            continue
        val = np.dot(obj, x)
        if not found or val > best:
            best = val
            best_x = x.copy()
            found = True
    return best, best_x, found


def _np_max_over_vertices(E, f, G, h, obj, combos, tol):
    dim = obj.shape[0]
    nc = combos.shape[0]
    if nc == 0:
        return -np.inf, np.zeros(dim), False
    M = np.empty((nc, dim, dim))
    rhs = np.empty((nc, dim))
    ne = E.shape[0]
    M[:, :ne] = E
    rhs[:, :ne] = f
    M[:, ne:] = G[combos]
    rhs[:, ne:] = h[combos]
    ok = np.abs(np.linalg.det(M)) > PIVOT_TOL
    if not ok.any():
        return -np.inf, np.zeros(dim), False
    X = np.linalg.solve(M[ok], rhs[ok][..., None])[..., 0]
    feas = np.all(X @ G.T <= h + tol, axis=1)
    if not feas.any():
        return -np.inf, np.zeros(dim), False
    X = X[feas]
    vals = X @ obj
    k = int(np.argmax(vals))
    return float(vals[k]), X[k], True


# ---------------------------------------------------------------------------
# exhaustive grid scan over the joint simplex (fixed safe-deviation sets)
# ---------------------------------------------------------------------------


def _nb_grid_scan(k, parts, W, owner, nplayers, C, lobj, eps, tol, j_lo, j_hi):
    """Best ``lobj . z`` over grid points z = x / k that are safe eps-equilibria.

    ``W`` holds one row per candidate deviation vertex, already reduced to the
    gain ``pushed payoff - own payoff``; ``owner`` maps rows to players.
    Returns (best, best_parts, n_points, n_safe, n_equilibria).
    """
    best = -np.inf
    best_parts = np.zeros(parts, dtype=np.int64)
    n_pts = 0
    n_safe = 0
    n_eq = 0
    z = np.empty(parts)
    gaps = np.empty(nplayers)
    nbars = parts - 1
    ntot = k + parts - 1
    if nbars == 0:
        if j_lo > 0:
            return best, best_parts, n_pts, n_safe, n_eq
        bars = np.zeros(0, dtype=np.int64)
    else:
        if j_lo > k:
            return best, best_parts, n_pts, n_safe, n_eq
        bars = np.empty(nbars, dtype=np.int64)
        for t in range(nbars):
            bars[t] = j_lo + t
    while True:
        # decode bars into parts
        prev = -1
        for t in range(nbars):
            z[t] = (bars[t] - prev - 1) / k
            prev = bars[t]
        z[parts - 1] = (ntot - 1 - prev) / k
        n_pts += 1
        safe = True
        for r in range(C.shape[0]):
            if np.dot(C[r], z) > tol:
                safe = False
                break
        if safe:
            n_safe += 1
            for i in range(nplayers):
                gaps[i] = -np.inf
            for v in range(W.shape[0]):
                g = np.dot(W[v], z)
                if g > gaps[owner[v]]:
                    gaps[owner[v]] = g
            worst = -np.inf
            for i in range(nplayers):
                if gaps[i] > worst:
                    worst = gaps[i]
            if worst <= eps:
                n_eq += 1
                val = np.dot(lobj, z)
                if val > best:
                    best = val
                    for t in range(parts):
                        best_parts[t] = int(round(z[t] * k))
        if nbars == 0:
            break
        # next combination in lexicographic order
        t = nbars - 1
        while t >= 0 and bars[t] == ntot - nbars + t:
            t -= 1
        if t < 0:
            break
        if t == 0 and bars[0] + 1 >= j_hi:
            break
        bars[t] += 1
        for q in range(t + 1, nbars):
            bars[q] = bars[q - 1] + 1
    return best, best_parts, n_pts, n_safe, n_eq


_NP_CHUNK = 1 << 16


def compositions(k, parts, j_lo=0, j_hi=None):
    """Yield arrays of compositions of k into ``parts`` parts, lexicographic by bars.

    Only compositions whose first part lies in [j_lo, j_hi) are produced.
    """
    j_hi = k + 1 if j_hi is None else min(j_hi, k + 1)
    if parts == 1:
        if j_lo == 0:
            yield np.array([[k]], dtype=np.int64)
        return
    ntot = k + parts - 1
    for j in range(j_lo, j_hi):
        it = itertools.combinations(range(j + 1, ntot), parts - 2)
        while True:
            chunk = list(itertools.islice(it, _NP_CHUNK))
            if not chunk:
                break
            bars = np.empty((len(chunk), parts - 1), dtype=np.int64)
            bars[:, 0] = j
            if parts > 2:
                bars[:, 1:] = np.array(chunk, dtype=np.int64).reshape(len(chunk), parts - 2)
            x = np.empty((len(chunk), parts), dtype=np.int64)
            x[:, 0] = bars[:, 0]
            x[:, 1:-1] = np.diff(bars, axis=1) - 1
            x[:, -1] = ntot - 1 - bars[:, -1]
            yield x


def _np_grid_scan(k, parts, W, owner, nplayers, C, lobj, eps, tol, j_lo, j_hi):
    best = -np.inf
    best_parts = np.zeros(parts, dtype=np.int64)
    n_pts = n_safe = n_eq = 0
    starts = np.searchsorted(owner, np.arange(nplayers))
    for X in compositions(k, parts, j_lo, j_hi):
        Z = X / k
        n_pts += Z.shape[0]
        if C.shape[0]:
            keep = (Z @ C.T).max(axis=1) <= tol
            Z, X = Z[keep], X[keep]
        n_safe += Z.shape[0]
        if not Z.shape[0]:
            continue
        gains = Z @ W.T
        worst = np.maximum.reduceat(gains, starts, axis=1).max(axis=1)
        keep = worst <= eps
        n_eq += int(keep.sum())
        if not keep.any():
            continue
        vals = Z[keep] @ lobj
        q = int(np.argmax(vals))
        if vals[q] > best:
            best = float(vals[q])
            best_parts = X[keep][q].copy()
    return best, best_parts, n_pts, n_safe, n_eq


# ---------------------------------------------------------------------------
# backend selection
# ---------------------------------------------------------------------------

numpy_impl = {
    "project_blocks": _np_project_blocks,
    "dykstra": _np_dykstra,
    "max_over_vertices": _np_max_over_vertices,
    "grid_scan": _np_grid_scan,
}

if HAVE_NUMBA:
    _jit = numba.njit(cache=True, nogil=True)
    _nb_project_blocks = _jit(_nb_project_blocks)
    _nb_violation = _jit(_nb_violation)
    _nb_dykstra = _jit(_nb_dykstra)
    _nb_solve_small = _jit(_nb_solve_small)
    _nb_max_over_vertices = _jit(_nb_max_over_vertices)
    _nb_grid_scan = _jit(_nb_grid_scan)
    numba_impl = {
        "project_blocks": _nb_project_blocks,
        "dykstra": _nb_dykstra,
        "max_over_vertices": _nb_max_over_vertices,
        "grid_scan": _nb_grid_scan,
    }
else:  # pragma: no cover
    numba_impl = {}

_active = numba_impl if USE_NUMBA else numpy_impl

project_blocks = _active["project_blocks"]
dykstra = _active["dykstra"]
max_over_vertices = _active["max_over_vertices"]
grid_scan = _active["grid_scan"]


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
