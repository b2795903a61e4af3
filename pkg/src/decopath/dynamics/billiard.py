"""Dispersing billiard with one flat cusp.

The table is bounded by the walls ``y = +-x^beta / beta`` for ``x`` in
``[0, 1]``, which meet tangentially at the origin, and a circular arc of
radius 1 through the corners ``(1, +-1/beta)`` whose centre lies to the right,
so every piece is convex as seen from inside.  The boundary is traversed
counter-clockwise: lower wall (piece 0), arc (piece 1), upper wall (piece 2).

Phase points are ``(r, theta)``: arc length from the cusp tip and the angle of
the outgoing velocity to the inward normal, ``v = cos(theta) n + sin(theta) t``
with ``t`` the unit tangent in the direction of increasing ``r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba as nb
import numpy as np

from ..errors import GeometryError, ParameterError

_GL_X, _GL_W = np.polynomial.legendre.leggauss(32)

OK, NO_HIT = 0, 1


@nb.njit(cache=True)
def _wall_len(s, beta, gx, gw):
    acc = 0.0
    for i in range(gx.size):
        u = 0.5 * s * (gx[i] + 1.0)
        acc += gw[i] * math.sqrt(1.0 + u ** (2.0 * beta - 2.0))
    return 0.5 * s * acc


@nb.njit(cache=True)
def _wall_param(ell, beta, gx, gw, total):
    lo, hi = 0.0, 1.0
    s = ell / total
    for _ in range(100):
        f = _wall_len(s, beta, gx, gw) - ell
        if f > 0.0:
            hi = s
        else:
            lo = s
        ns = s - f / math.sqrt(1.0 + s ** (2.0 * beta - 2.0))
        if not (lo < ns < hi):
            ns = 0.5 * (lo + hi)
        if abs(ns - s) <= 1e-16 * (1.0 + s):
            return ns
        s = ns
    return s


@nb.njit(cache=True)
def _frame(piece, q, beta, cx):
    """Position, inward normal and forward tangent at a boundary parameter."""
    if piece == 1:
        px = cx + math.cos(q)
        py = math.sin(q)
        nx, ny = math.cos(q), math.sin(q)
    else:
        sgn = 1.0 if piece == 2 else -1.0
        px = q
        py = sgn * q ** beta / beta
        slope = q ** (beta - 1.0)
        nrm = math.sqrt(1.0 + slope * slope)
        nx, ny = slope / nrm, -sgn / nrm
    # n = rot90(t)  =>  t = (n_y, -n_x)
    return px, py, nx, ny, ny, -nx


@nb.njit(cache=True)
def _wall_f(t, px, py, vx, vy, sgn, beta):
    x = px + t * vx
    if x < 0.0:
        x = 0.0
    return sgn * (py + t * vy) - x ** beta / beta


@nb.njit(cache=True)
def _wall_df(t, px, vx, vy, sgn, beta):
    x = px + t * vx
    if x < 0.0:
        x = 0.0
    return sgn * vy - x ** (beta - 1.0) * vx


@nb.njit(cache=True)
def _wall_hit(px, py, vx, vy, sgn, beta):
    """First ``t > 0`` with the ray on the wall ``sgn * y = x^beta / beta``.

    ``f(t) = sgn*y - x^beta/beta`` is concave along the ray and negative
    inside, so a crossing can only occur while ``f`` increases, i.e. before
    the critical point.  Returns ``inf`` if there is none.
    """
    if vx > 0.0:
        tmax = (1.0 - px) / vx
    elif vx < 0.0:
        tmax = px / -vx
    else:
        tmax = 4.0
    if tmax <= 0.0:
        return math.inf
    ratio = sgn * vy
    if vx > 0.0:
        if ratio <= 0.0:
            return math.inf
        xs = (ratio / vx) ** (1.0 / (beta - 1.0))
        tb = min((xs - px) / vx, tmax)
    elif vx < 0.0:
        if ratio < 0.0:
            xs = (ratio / vx) ** (1.0 / (beta - 1.0))
            tb = min((xs - px) / vx, tmax)
        else:
            tb = tmax
    else:
        if ratio <= 0.0:
            return math.inf
        tb = tmax
    if tb <= 0.0:
        return math.inf
    f0 = _wall_f(0.0, px, py, vx, vy, sgn, beta)
    fb = _wall_f(tb, px, py, vx, vy, sgn, beta)
    if fb < 0.0 or f0 >= 0.0:
        return math.inf
    lo, hi = 0.0, tb
    t = tb if fb == 0.0 else 0.5 * tb
    if fb == 0.0:
        return tb
    for _ in range(200):
        f = _wall_f(t, px, py, vx, vy, sgn, beta)
        if f < 0.0:
            lo = t
        else:
            hi = t
        d = _wall_df(t, px, vx, vy, sgn, beta)
        nt = t - f / d if d > 0.0 else 0.5 * (lo + hi)
        if not (lo < nt < hi):
            nt = 0.5 * (lo + hi)
        if abs(nt - t) <= 1e-16 * t or hi - lo <= 1e-16 * hi:
            return nt
        t = nt
    return t


@nb.njit(cache=True)
def _arc_hit(px, py, vx, vy, cx, half):
    dx, dy = px - cx, py
    b = dx * vx + dy * vy
    c = dx * dx + dy * dy - 1.0
    if b >= 0.0:
        return math.inf
    disc = b * b - c
    if disc < 0.0:
        return math.inf
    # smaller root of t^2 + 2 b t + c, written without cancellation
    t = c / (-b + math.sqrt(disc))
    if t <= 0.0:
        return math.inf
    qy = py + t * vy
    qx = px + t * vx
    if abs(qy) > half or qx > 1.0 + 1e-12:
        return math.inf
    return t


@nb.njit(cache=True)
def _step(piece, q, th, beta, cx, half):
    px, py, nx, ny, tx, ty = _frame(piece, q, beta, cx)
    c, s = math.cos(th), math.sin(th)
    vx = c * nx + s * tx
    vy = c * ny + s * ty
    best = math.inf
    nxt = -1
    for cand in range(3):
        if cand == piece:
            continue
        if cand == 1:
            t = _arc_hit(px, py, vx, vy, cx, half)
        else:
            t = _wall_hit(px, py, vx, vy, 1.0 if cand == 2 else -1.0, beta)
        if t < best:
            best = t
            nxt = cand
    if nxt < 0:
        return piece, q, th, NO_HIT
    qx = px + best * vx
    qy = py + best * vy
    if nxt == 1:
        nq = math.atan2(qy, qx - cx)
        if nq < 0.0:
            nq += 2.0 * math.pi
    else:
        nq = min(max(qx, 0.0), 1.0)
    _, _, nx, ny, tx, ty = _frame(nxt, nq, beta, cx)
    dot = vx * nx + vy * ny
    wx = vx - 2.0 * dot * nx
    wy = vy - 2.0 * dot * ny
    nth = math.atan2(wx * tx + wy * ty, wx * nx + wy * ny)
    return nxt, nq, nth, OK


@nb.njit(cache=True)
def _run(piece, q, th, n, beta, cx, half):
    pieces = np.empty(n + 1, dtype=np.int8)
    qs = np.empty(n + 1)
    ths = np.empty(n + 1)
    pieces[0], qs[0], ths[0] = piece, q, th
    for k in range(n):
        piece, q, th, status = _step(piece, q, th, beta, cx, half)
        if status != OK:
            return pieces[:k + 1], qs[:k + 1], ths[:k + 1], status
        pieces[k + 1], qs[k + 1], ths[k + 1] = piece, q, th
    return pieces, qs, ths, OK


@nb.njit(cache=True)
def _push(pieces, qs, ths, steps, beta, cx, half):
    m = pieces.size
    op = pieces.copy()
    oq = qs.copy()
    ot = ths.copy()
    status = np.zeros(m, dtype=np.int8)
    for j in range(m):
        p, q, th = op[j], oq[j], ot[j]
        for _ in range(steps):
            p, q, th, st = _step(p, q, th, beta, cx, half)
            if st != OK:
                status[j] = st
                break
        op[j], oq[j], ot[j] = p, q, th
    return op, oq, ot, status


@nb.njit(cache=True)
def _to_r(piece, q, beta, gx, gw, Lw, perim, top):
    out = np.empty(q.size)
    for i in range(q.size):
        if piece[i] == 1:
            out[i] = Lw + (top - q[i])
        else:
            ell = _wall_len(q[i], beta, gx, gw)
            out[i] = ell if piece[i] == 0 else perim - ell
    return out


@nb.njit(cache=True)
def _to_param(r, beta, gx, gw, Lw, La, perim, top):
    piece = np.empty(r.size, dtype=np.int8)
    q = np.empty(r.size)
    for i in range(r.size):
        if r[i] < Lw:
            piece[i] = 0
            q[i] = _wall_param(r[i], beta, gx, gw, Lw)
        elif r[i] <= Lw + La:
            piece[i] = 1
            q[i] = top - (r[i] - Lw)
        else:
            piece[i] = 2
            q[i] = _wall_param(perim - r[i], beta, gx, gw, Lw)
    return piece, q


@dataclass(frozen=True)
class PhasePoint:
    r: float
    theta: float

    def __post_init__(self):
        if abs(self.theta) > math.pi / 2 + 1e-12:
            raise ParameterError(f"|theta| must not exceed pi/2, got {self.theta}")


@dataclass(frozen=True)
class Orbit:
    piece: np.ndarray
    param: np.ndarray
    r: np.ndarray
    theta: np.ndarray


@dataclass(frozen=True)
class BilliardTable:
    beta: float = 3.0
    s_cut: float = 0.2

    def __post_init__(self):
        if not self.beta > 2.0:
            raise ParameterError(f"cusp exponent must exceed 2, got {self.beta}")
        if not 0.0 < self.s_cut < 1.0:
            raise ParameterError("s_cut must lie in (0, 1)")

    @property
    def alpha(self):
        return self.beta / (self.beta - 1.0)

    @property
    def half_gap(self):
        return 1.0 / self.beta

    @property
    def centre(self):
        return 1.0 + math.sqrt(1.0 - self.half_gap ** 2)

    @property
    def half_angle(self):
        return math.asin(self.half_gap)

    @property
    def wall_length(self):
        return _wall_len(1.0, self.beta, _GL_X, _GL_W)

    @property
    def arc_length(self):
        return 2.0 * self.half_angle

    @property
    def perimeter(self):
        return 2.0 * self.wall_length + self.arc_length

    def _args(self):
        return self.beta, self.centre, self.half_gap

    def to_param(self, r):
        """Arc length to ``(piece, parameter)``; vectorised."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any((r < 0) | (r > self.perimeter)):
            raise ParameterError("arc length outside the boundary")
        return _to_param(r, self.beta, _GL_X, _GL_W, self.wall_length, self.arc_length,
                         self.perimeter, math.pi + self.half_angle)

    def to_r(self, piece, q):
        piece = np.ascontiguousarray(np.atleast_1d(piece), dtype=np.int8)
        q = np.ascontiguousarray(np.atleast_1d(q), dtype=float)
        return _to_r(piece, q, self.beta, _GL_X, _GL_W, self.wall_length, self.perimeter,
                     math.pi + self.half_angle)

    def position(self, piece, q):
        px, py, *_ = _frame(int(piece), float(q), self.beta, self.centre)
        return np.array([px, py])

    def frame(self, piece, q):
        """``(position, inward normal, tangent)``."""
        px, py, nx, ny, tx, ty = _frame(int(piece), float(q), self.beta, self.centre)
        return np.array([px, py]), np.array([nx, ny]), np.array([tx, ty])

    def in_section(self, piece, q):
        """Collisions outside the cusp: on the arc or with ``x >= s_cut``."""
        piece = np.asarray(piece)
        return (piece == 1) | (np.asarray(q) >= self.s_cut)

    def sample_invariant(self, m, rng):
        """Independent draws from ``cos(theta) dr dtheta / (2 |boundary|)``."""
        r = rng.uniform(0.0, self.perimeter, m)
        th = np.arcsin(rng.uniform(-1.0, 1.0, m))
        return r, th


def billiard_step(table: BilliardTable, p: PhasePoint) -> PhasePoint:
    piece, q = table.to_param(p.r)
    np_, nq, nth, st = _step(int(piece[0]), float(q[0]), float(p.theta), *table._args())
    if st != OK:
        raise GeometryError(f"no boundary intersection from r={p.r}, theta={p.theta}")
    return PhasePoint(float(table.to_r(np_, nq)[0]), float(nth))


def billiard_orbit(table: BilliardTable, p0: PhasePoint, n) -> Orbit:
    """``n`` collisions after ``p0`` (``n + 1`` phase points)."""
    piece, q = table.to_param(p0.r)
    pieces, qs, ths, st = _run(int(piece[0]), float(q[0]), float(p0.theta), int(n), *table._args())
    if st != OK:
        raise GeometryError(f"no boundary intersection after {pieces.size - 1} collisions")
    return Orbit(pieces, qs, table.to_r(pieces, qs), ths)


def billiard_push(table: BilliardTable, r, theta, steps=1):
    """Apply ``steps`` collisions to many phase points; returns
    ``(r, theta, ok)``."""
    piece, q = table.to_param(r)
    p, q, th, st = _push(piece, q, np.ascontiguousarray(theta, dtype=float), int(steps), *table._args())
    return table.to_r(p, q), th, st == OK


def reflect_time(theta):
    """The time-reversal involution ``(r, theta) -> (r, -theta)``."""
    return -np.asarray(theta)
