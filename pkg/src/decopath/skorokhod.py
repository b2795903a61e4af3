"""Skorokhod-type distances via monotone time warps.

Every returned value is the exact cost of an explicit strictly increasing
piecewise-linear time change, so it is a certified upper bound on the
infimum over all time changes.  For the uniform cost the witness comes from a
free-space reachability test on the union grid, which is exact for piecewise
affine paths up to bisection precision.  For the p-variation cost the
candidates also include warps from a lattice DP on nested dyadic grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba as nb
import numpy as np

from .errors import ParameterError
from .paths import CadlagPath, TimeChange, _check_pair, compose, difference, sup_dist
from .pvar import pvar_norm


@dataclass(frozen=True)
class WarpBound:
    """Upper bound on a warped distance with its witness time change."""

    value: float
    ceiling: float
    warp: TimeChange
    resolution: int

    def __float__(self):
        return float(self.value)


@nb.njit(cache=True)
def _nrm(a, i, b, j):
    s = 0.0
    for c in range(a.shape[1]):
        d = a[i, c] - b[j, c]
        s += d * d
    return math.sqrt(s)


@nb.njit(cache=True)
def _edge(u1, r1, f1, u2, r2, f2, w, i, j, move):
    """Cost of entering node ``(i, j)`` by ``move`` (0 diagonal, 1 along u1, 2 along u2)."""
    n1 = u1.shape[0]
    n2 = u2.shape[0]
    disc = w * abs(u1[i] - u2[j])
    if move == 0:
        return max(disc, _nrm(r1, i - 1, r2, j - 1), _nrm(f1, i, f2, j))
    if move == 1:
        s2 = r2 if j < n2 - 1 else f2
        return max(disc, _nrm(r1, i - 1, s2, j), _nrm(f1, i, s2, j))
    s1 = r1 if i < n1 - 1 else f1
    return max(disc, _nrm(s1, i, r2, j - 1), _nrm(s1, i, f2, j))


@nb.njit(cache=True)
def _warp_dp(u1, r1, f1, u2, r2, f2, w):
    """Monotone lattice-path DP for a time warp.

    Node ``(i, j)`` means the warp sends ``u2[j]`` to ``u1[i]``.  Edge costs
    are the exact value gaps of the realised affine cell pairing, maxed with
    the weighted time discrepancy.  A first pass finds the bottleneck optimum
    ``B``; a second pass picks, among paths whose edges all cost at most
    ``B``, one with the least summed cost, which keeps the path on exact
    alignments wherever they exist.  Ties go to the smaller time discrepancy.
    Returns the lattice path as two index arrays.
    """
    n1 = u1.shape[0]
    n2 = u2.shape[0]
    big = np.inf
    D = np.full((n1, n2), big)
    D[0, 0] = max(w * abs(u1[0] - u2[0]), _nrm(r1, 0, r2, 0))
    for i in range(n1):
        for j in range(n2):
            if i == 0 and j == 0:
                continue
            best = big
            if i > 0 and j > 0:
                best = min(best, max(D[i - 1, j - 1], _edge(u1, r1, f1, u2, r2, f2, w, i, j, 0)))
            if i > 0:
                best = min(best, max(D[i - 1, j], _edge(u1, r1, f1, u2, r2, f2, w, i, j, 1)))
            if j > 0:
                best = min(best, max(D[i, j - 1], _edge(u1, r1, f1, u2, r2, f2, w, i, j, 2)))
            D[i, j] = best
    cap = D[n1 - 1, n2 - 1] * (1.0 + 1e-12) + 1e-300
    S = np.full((n1, n2), big)
    back = np.zeros((n1, n2), dtype=np.int8)
    S[0, 0] = 0.0
    for i in range(n1):
        for j in range(n2):
            if i == 0 and j == 0:
                continue
            best = big
            bdisc = big
            bmove = 0
            for move in range(3):
                pi = i - 1 if move != 2 else i
                pj = j - 1 if move != 1 else j
                if pi < 0 or pj < 0:
                    continue
                if S[pi, pj] == big:
                    continue
                c = _edge(u1, r1, f1, u2, r2, f2, w, i, j, move)
                if c > cap:
                    continue
                v = S[pi, pj] + c
                pd = abs(u1[pi] - u2[pj])
                if v < best or (v == best and pd < bdisc):
                    best = v
                    bdisc = pd
                    bmove = move
            S[i, j] = best
            back[i, j] = bmove
    ii = np.empty(n1 + n2, dtype=np.int64)
    jj = np.empty(n1 + n2, dtype=np.int64)
    k = 0
    i = n1 - 1
    j = n2 - 1
    while True:
        ii[k] = i
        jj[k] = j
        k += 1
        if i == 0 and j == 0:
            break
        m = back[i, j]
        if m == 0:
            i -= 1
            j -= 1
        elif m == 1:
            i -= 1
        else:
            j -= 1
    return ii[:k][::-1].copy(), jj[:k][::-1].copy()


@nb.njit(cache=True)
def _value_at(t, v, lf, s, right):
    """Right value (or left limit) of a sampled path at time ``s``."""
    n = t.shape[0]
    k = np.searchsorted(t, s)
    if k < n and t[k] == s:
        return v[k].copy() if right or k == 0 else lf[k].copy()
    k -= 1
    f = (s - t[k]) / (t[k + 1] - t[k])
    return v[k] + f * (lf[k + 1] - v[k])


@nb.njit(cache=True)
def _gap(a, b):
    s = 0.0
    for c in range(a.shape[0]):
        s += (a[c] - b[c]) ** 2
    return math.sqrt(s)


@nb.njit(cache=True)
def _window_cost(t1, v1, l1, t2, v2, l2, x0, x1, y0, y1):
    """``sup |h1(rho(x)) - h2(x)|`` for affine ``rho: [x0, x1) -> [y0, y1)``,
    including the right value at ``x0`` and the left limit at ``x1``."""
    best = _gap(_value_at(t1, v1, l1, y0, True), _value_at(t2, v2, l2, x0, True))
    best = max(best, _gap(_value_at(t1, v1, l1, y1, False), _value_at(t2, v2, l2, x1, False)))
    slope = (y1 - y0) / (x1 - x0)
    k = np.searchsorted(t2, x0, side="right")
    while k < t2.shape[0] and t2[k] < x1:
        x = t2[k]
        y = min(max(y0 + slope * (x - x0), y0), y1)
        if y > y0 and y < y1:
            best = max(best, _gap(_value_at(t1, v1, l1, y, True), v2[k]))
            best = max(best, _gap(_value_at(t1, v1, l1, y, False), l2[k]))
        k += 1
    k = np.searchsorted(t1, y0, side="right")
    while k < t1.shape[0] and t1[k] < y1:
        y = t1[k]
        x = min(max(x0 + (y - y0) / slope, x0), x1)
        if x > x0 and x < x1:
            best = max(best, _gap(v1[k], _value_at(t2, v2, l2, x, True)))
            best = max(best, _gap(l1[k], _value_at(t2, v2, l2, x, False)))
        k += 1
    return best


@nb.njit(cache=True)
def _sym_window(t1, v1, l1, t2, v2, l2, x0, x1, y0, y1):
    return max(_window_cost(t1, v1, l1, t2, v2, l2, x0, x1, y0, y1),
               _window_cost(t2, v2, l2, t1, v1, l1, y0, y1, x0, x1))


@nb.njit(cache=True)
def _prune(x, y, t1, v1, l1, t2, v2, l2):
    """Greedy knot removal that never raises any local window cost.

    A knot is dropped when the straight warp between its kept neighbours
    costs no more than the worse of the two windows it replaces, so the total
    cost cannot increase and the knot's own time discrepancy disappears.
    Passes repeat until nothing changes.  Returns a keep mask.
    """
    n = x.shape[0]
    keep = np.ones(n, dtype=np.bool_)
    win = np.empty(n - 1)
    for k in range(n - 1):
        win[k] = _sym_window(t1, v1, l1, t2, v2, l2, x[k], x[k + 1], y[k], y[k + 1])
    changed = True
    while changed:
        changed = False
        prev = 0
        k = 1
        while k < n - 1:
            if not keep[k]:
                k += 1
                continue
            nxt = k + 1
            while not keep[nxt]:
                nxt += 1
            c = _sym_window(t1, v1, l1, t2, v2, l2, x[prev], x[nxt], y[prev], y[nxt])
            if c <= max(win[prev], win[k]):
                keep[k] = False
                win[prev] = c
                changed = True
            else:
                prev = k
            k = nxt
    return keep


def prune_warp(rho: TimeChange, h1: CadlagPath, h2: CadlagPath) -> TimeChange:
    """Drop knots of ``rho`` (warping ``h1`` onto ``h2``) without raising its cost."""
    keep = _prune(rho.x, rho.y, h1.times, h1.values, h1.left,
                  h2.times, h2.values, h2.left)
    return TimeChange(rho.x[keep], rho.y[keep])


def _offsets(idx, last):
    """Offsets (in units of eps) separating repeated lattice indices.

    Runs of equal indices get offsets 0, 1, 2, ... except a run at the final
    index, which gets ..., -2, -1, 0 so the path ends exactly at the endpoint.
    """
    off = np.zeros(idx.size)
    k = 0
    while k < idx.size:
        e = k
        while e + 1 < idx.size and idx[e + 1] == idx[k]:
            e += 1
        r = e - k
        if idx[k] == last:
            off[k:e + 1] = np.arange(-r, 1)
        else:
            off[k:e + 1] = np.arange(0, r + 1)
        k = e + 1
    return off


def realise_warp(u1, u2, ii, jj) -> TimeChange:
    """Strictly increasing time change ``[u2[0], u2[-1]] -> [u1[0], u1[-1]]``."""
    gap = min(np.diff(u1).min(), np.diff(u2).min())
    eps = 1e-7 * gap / (ii.size + 1)
    x = u2[jj] + eps * _offsets(jj, u2.size - 1)
    y = u1[ii] + eps * _offsets(ii, u1.size - 1)
    return TimeChange(x, y)


def _levels(resolution):
    if resolution < 2:
        raise ParameterError(f"resolution must be >= 2, got {resolution}")
    k = max(1, math.ceil(math.log2(max(resolution - 1, 1))))
    return [2] + [2 ** j + 1 for j in range(1, k + 1)]


def _lattice(h1, h2, m):
    u = np.linspace(h1.a, h1.b, m)
    u[0], u[-1] = h1.a, h1.b
    return np.union1d(u, np.union1d(h1.times, h2.times))


def _level_warps(h1, h2, m, weight):
    u = _lattice(h1, h2, m)
    r1, f1 = h1.knots(u)
    r2, f2 = h2.knots(u)
    ii, jj = _warp_dp(u, r1, f1, u, r2, f2, weight)
    fwd = realise_warp(u, u, ii, jj)
    jj, ii = _warp_dp(u, r2, f2, u, r1, f1, weight)
    bwd = realise_warp(u, u, ii, jj)
    return [fwd, bwd]


def _sym_cost_sup(h1, h2, weight):
    def cost(r):
        c12 = sup_dist(compose(h1, r), h2)
        c21 = sup_dist(compose(h2, r.inverse()), h1)
        return max(weight * r.disc(), c12, c21)
    return cost


def _free_candidates(h1, h2, weight):
    r12, _ = free_space_warp(h1, h2, weight)
    r21, _ = free_space_warp(h2, h1, weight)
    r21 = r21.inverse()
    return [r12, r21, prune_warp(r12, h1, h2), prune_warp(r21, h1, h2)]


def _pick(cands, cost, ref):
    def key(r):
        return (cost(r), float(np.abs(ref(r.y) - r.x).max()), r.x.size,
                float(np.abs(ref(r.y) - r.x).sum()))
    best = min((key(r) + (i,) for i, r in enumerate(cands)), key=lambda k: k[:4])
    return best[0], cands[best[4]]


def j1_dist(h1: CadlagPath, h2: CadlagPath, resolution: int = 65) -> WarpBound:
    """Upper bound on ``inf_rho max(|rho - Id|, |h1∘rho - h2|)``.

    A free-space reachability test on the union grid decides feasibility of
    a bound exactly (both paths are affine on every cell, so each free cell is
    convex); bisection locates the optimum and a witness warp is backtracked.
    The returned value is the exact cost of that witness (or of the identity),
    symmetrised over both argument orders, so it is exactly symmetric and
    never exceeds ``sup_dist``.  ``resolution`` is recorded only.
    """
    _check_pair(h1, h2)
    cost = _sym_cost_sup(h1, h2, 1.0)
    ident = TimeChange.identity(h1.a, h1.b)
    v, r = _pick([ident] + _free_candidates(h1, h2, 1.0), cost, ident)
    return WarpBound(float(v), sup_dist(h1, h2), r, int(resolution))


def sigma_pvar(h1: CadlagPath, h2: CadlagPath, p, resolution: int = 65) -> WarpBound:
    """Upper bound on ``inf_rho max(|rho - Id|, ||h1∘rho - h2||_p)``.

    ``||f||_p = |f(a)| + |f|_p``.  Candidates: the identity, the uniform-metric
    witnesses and lattice-DP warps on nested dyadic grids up to
    ``resolution``; so the bound is non-increasing in ``resolution``.
    """
    _check_pair(h1, h2)

    def cost(r):
        c12 = pvar_norm(difference(compose(h1, r), h2), p)
        c21 = pvar_norm(difference(compose(h2, r.inverse()), h1), p)
        return max(r.disc(), c12, c21)

    ident = TimeChange.identity(h1.a, h1.b)
    cands = [ident] + _free_candidates(h1, h2, 1.0)
    for m in _levels(resolution):
        cands += _level_warps(h1, h2, m, 1.0)
    v, r = _pick(cands, cost, ident)
    ceiling = pvar_norm(difference(h1, h2), p)
    return WarpBound(float(v), ceiling, r, _levels(resolution)[-1])


def frechet_dist(h1: CadlagPath, h2: CadlagPath, resolution: int = 65) -> WarpBound:
    """Upper bound on ``inf_rho |h1∘rho - h2|`` over increasing bijections
    between possibly different domains (no time-discrepancy term)."""
    _check_pair(h1, h2, same_domain=False)
    to1 = TimeChange.affine(h2.domain, h1.domain)
    cost = _sym_cost_sup(h1, h2, 0.0)
    v, r = _pick([to1] + _free_candidates(h1, h2, 0.0), cost, to1)
    return WarpBound(float(v), float("nan"), r, int(resolution))


# ---------------------------------------------------------------------------
# exact free-space decision procedure
# ---------------------------------------------------------------------------

@nb.njit(cache=True)
def _ball_interval(p0, q, eps, lo, hi):
    """Parameters ``s`` in ``[lo, hi]`` with ``|p0 + s q| <= eps``.

    Returns ``(lo', hi')``; empty when ``lo' > hi'``.
    """
    qq = 0.0
    pq = 0.0
    for c in range(p0.shape[0]):
        qq += q[c] * q[c]
        pq += p0[c] * q[c]
    if qq == 0.0:
        pp = 0.0
        for c in range(p0.shape[0]):
            pp += p0[c] * p0[c]
        if pp <= eps * eps:
            return lo, hi
        return 1.0, 0.0
    # closest point of the line, then the chord half-width
    s0 = -pq / qq
    dd = 0.0
    for c in range(p0.shape[0]):
        z = p0[c] + s0 * q[c]
        dd += z * z
    rem = eps * eps - dd
    if rem < 0.0:
        return 1.0, 0.0
    half = math.sqrt(rem / qq)
    return max(lo, s0 - half), min(hi, s0 + half)


@nb.njit(cache=True)
def _line_free(ua, ra, fa, ub, rb, fb, i, j, eps, w):
    """Free x-interval on the line ``y = ua[i]`` across column ``j`` of ``ub``.

    Constraints come from the closed cells below (left limit ``fa[i]``) and
    above (right value ``ra[i]``) the line, where those cells exist.
    """
    na = ua.shape[0]
    x0 = ub[j]
    x1 = ub[j + 1]
    lo = 0.0
    hi = 1.0
    q = fb[j + 1] - rb[j]
    if i > 0:
        lo, hi = _ball_interval(rb[j] - fa[i], q, eps, lo, hi)
    if i < na - 1 and lo <= hi:
        lo, hi = _ball_interval(rb[j] - ra[i], q, eps, lo, hi)
    xl = x0 + lo * (x1 - x0)
    xh = x0 + hi * (x1 - x0)
    if lo == 0.0:
        xl = x0
    if hi == 1.0:
        xh = x1
    if w > 0.0:
        xl = max(xl, ua[i] - eps / w)
        xh = min(xh, ua[i] + eps / w)
    return xl, xh


@nb.njit(cache=True)
def _corner_free(u1, r1, f1, u2, r2, f2, i, j, eps, w):
    """Simultaneous passage through the corner ``(u2[j], u1[i])``."""
    if w * abs(u1[i] - u2[j]) > eps:
        return False
    if i > 0 and j > 0 and _nrm(f1, i, f2, j) > eps:
        return False
    return _nrm(r1, i, r2, j) <= eps


@nb.njit(cache=True)
def _free_space(u1, r1, f1, u2, r2, f2, eps, w):
    """Reachable entry sets of every cell for the bound ``eps``.

    Cell ``(i, j)`` spans ``[u2[j], u2[j+1]] x [u1[i], u1[i+1]]``.  Returns
    bottom and left reachable intervals, diagonal-corner flags and whether
    the end point is reachable.
    """
    n1 = u1.shape[0]
    n2 = u2.shape[0]
    rb = np.empty((n1, n2, 2))
    rl = np.empty((n1, n2, 2))
    rc = np.zeros((n1, n2), dtype=np.bool_)
    rb[:, :, 0] = np.inf
    rb[:, :, 1] = -np.inf
    rl[:, :, 0] = np.inf
    rl[:, :, 1] = -np.inf
    rc[0, 0] = _corner_free(u1, r1, f1, u2, r2, f2, 0, 0, eps, w)
    done = False
    for i in range(n1 - 1):
        for j in range(n2 - 1):
            has_b = rb[i, j, 0] <= rb[i, j, 1]
            has_l = rl[i, j, 0] <= rl[i, j, 1]
            if not (has_b or has_l or rc[i, j]):
                continue
            xmin = np.inf
            ymin = np.inf
            if rc[i, j]:
                xmin = u2[j]
                ymin = u1[i]
            if has_l:
                xmin = u2[j]
                ymin = min(ymin, rl[i, j, 0])
            if has_b:
                ymin = u1[i]
                xmin = min(xmin, rb[i, j, 0])
            # exit through the top edge
            lo, hi = _line_free(u1, r1, f1, u2, r2, f2, i + 1, j, eps, w)
            lo = max(lo, xmin)
            if lo <= hi:
                if i + 1 < n1 - 1:
                    rb[i + 1, j, 0] = min(rb[i + 1, j, 0], lo)
                    rb[i + 1, j, 1] = max(rb[i + 1, j, 1], hi)
            # exit through the right edge
            lo, hi = _line_free(u2, r2, f2, u1, r1, f1, j + 1, i, eps, w)
            lo = max(lo, ymin)
            if lo <= hi:
                if j + 1 < n2 - 1:
                    rl[i, j + 1, 0] = min(rl[i, j + 1, 0], lo)
                    rl[i, j + 1, 1] = max(rl[i, j + 1, 1], hi)
            # exit through the top-right corner
            if i + 1 < n1 - 1 and j + 1 < n2 - 1:
                if _corner_free(u1, r1, f1, u2, r2, f2, i + 1, j + 1, eps, w):
                    rc[i + 1, j + 1] = True
            elif i + 1 == n1 - 1 and j + 1 == n2 - 1:
                if (w * abs(u1[i + 1] - u2[j + 1]) <= eps
                        and _nrm(f1, i + 1, f2, j + 1) <= eps
                        and _nrm(r1, i + 1, r2, j + 1) <= eps):
                    done = True
    return rb, rl, rc, done


@nb.njit(cache=True)
def _free_bisect(u1, r1, f1, u2, r2, f2, w, lo, hi, slack):
    """Smallest feasible bound, to relative precision ~1e-13."""
    rb, rl, rc, ok = _free_space(u1, r1, f1, u2, r2, f2, lo + slack, w)
    if ok:
        return lo + slack
    for _ in range(200):
        if hi - lo <= 1e-13 * hi + slack:
            break
        mid = 0.5 * (lo + hi)
        rb, rl, rc, ok = _free_space(u1, r1, f1, u2, r2, f2, mid + slack, w)
        if ok:
            hi = mid
        else:
            lo = mid
    return hi + slack


def _free_witness(u1, r1, f1, u2, r2, f2, eps, w):
    """Backtrack a monotone path through the free space.

    Returns knot arrays ``x`` (on ``u2``), ``y`` (on ``u1``) and the cell of
    the segment ending at each knot, or None if ``eps`` is infeasible.
    """
    rb, rl, rc, ok = _free_space(u1, r1, f1, u2, r2, f2, eps, w)
    if not ok:
        return None
    n1, n2 = u1.size, u2.size
    i, j = n1 - 2, n2 - 2
    px, py = u2[-1], u1[-1]
    xs, ys, cells = [px], [py], [(i, j)]
    span1 = u1[-1] - u1[0]
    span2 = u2[-1] - u2[0]

    def skew(x, y):
        return abs((x - u2[0]) / span2 - (y - u1[0]) / span1)

    while True:
        if i == 0 and j == 0:
            xs.append(u2[0]); ys.append(u1[0]); cells.append((0, 0))
            break
        opts = []
        if rc[i, j]:
            opts.append((0, u2[j], u1[i]))
        if rb[i, j, 0] <= rb[i, j, 1] and rb[i, j, 0] <= px:
            opts.append((1, min(rb[i, j, 1], px), u1[i]))
        if rl[i, j, 0] <= rl[i, j, 1] and rl[i, j, 0] <= py:
            opts.append((2, u2[j], min(rl[i, j, 1], py)))
        if not opts:
            return None
        kind, ex, ey = min(opts, key=lambda o: (skew(o[1], o[2]), o[0]))
        xs.append(ex); ys.append(ey); cells.append((i, j))
        px, py = ex, ey
        if kind == 0:
            i, j = i - 1, j - 1
        elif kind == 1:
            i = i - 1
        else:
            j = j - 1
    return np.array(xs[::-1]), np.array(ys[::-1]), cells[::-1]


def _strict_offsets(v, grid, cell_idx, eta):
    """Separate runs of equal coordinates, moving each run into the cell its
    segments occupy (after a grid line if the cell starts there, else before)."""
    v = v.copy()
    n = v.size
    k = 0
    while k < n:
        e = k
        while e + 1 < n and v[e + 1] == v[k]:
            e += 1
        if e > k:
            # segment k -> k+1 lies in cell index cell_idx[k]
            after = grid[cell_idx[k]] == v[k]
            if e == n - 1:
                after = False
            r = e - k
            if after:
                v[k:e + 1] = v[k] + eta * np.arange(0, r + 1)
            else:
                v[k:e + 1] = v[k] - eta * np.arange(r, -1, -1)
        k = e + 1
    return _strict(v)


def _strict(v):
    v = np.array(v, dtype=float)
    for i in range(1, v.size):
        if v[i] <= v[i - 1]:
            v[i] = np.nextafter(v[i - 1], np.inf)
    return v


def free_space_warp(h1, h2, weight=1.0, grid1=None, grid2=None):
    """Near-optimal warp ``[a2, b2] -> [a1, b1]`` and its decision bound."""
    u1 = np.union1d(h1.times, [] if grid1 is None else grid1)
    u2 = np.union1d(h2.times, [] if grid2 is None else grid2)
    r1, f1 = h1.knots(u1)
    r2, f2 = h2.knots(u2)
    lo = max(np.linalg.norm(r1[0] - r2[0]), np.linalg.norm(r1[-1] - r2[-1]),
             np.linalg.norm(f1[-1] - f2[-1]),
             weight * abs(u1[0] - u2[0]), weight * abs(u1[-1] - u2[-1]))
    to1 = TimeChange.affine((u2[0], u2[-1]), (u1[0], u1[-1]))
    hi = max(float(max(sup_dist(compose(h1, to1), h2),
                       sup_dist(compose(h2, to1.inverse()), h1))),
             weight * to1.disc(), lo)
    scale = 1.0 + max(np.abs(r1).max(), np.abs(r2).max(), np.abs(f1).max(), np.abs(f2).max())
    slack = 1e-13 * scale
    eps = _free_bisect(u1, r1, f1, u2, r2, f2, float(weight), float(lo), float(hi), slack)
    wit = None
    for bump in (1.0, 1.0 + 1e-9, 1.0 + 1e-6):
        wit = _free_witness(u1, r1, f1, u2, r2, f2, eps * bump + slack, float(weight))
        if wit is not None:
            break
    if wit is None:
        return to1, eps
    xs, ys, cells = wit
    gap = min(np.diff(u1).min(), np.diff(u2).min())
    eta = 1e-10 * gap
    xs = _strict_offsets(xs, u2, [c[1] for c in cells], eta)
    ys = _strict_offsets(ys, u1, [c[0] for c in cells], eta)
    xs[0], ys[0] = u2[0], u1[0]
    xs[-1], ys[-1] = u2[-1], u1[-1]
    if np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) <= 0):
        return to1, eps
    return TimeChange(xs, ys), eps
