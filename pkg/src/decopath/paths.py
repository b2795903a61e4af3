"""Sampled cadlag paths and monotone time changes.

A path lives on a grid ``t_0 < ... < t_N``.  Every cell ``[t_k, t_{k+1})`` is
affine, running from ``values[k]`` to the left limit ``left[k+1]``; the value
at ``t_{k+1}`` may then jump to ``values[k+1]``.  A STEP cell has
``left[k+1] == values[k]``, a plain LINEAR cell has ``left[k+1] == values[k+1]``.
Storing the left limits explicitly allows "affine then jump" cells, which
appear when solutions are collapsed or when compensated jump processes are
sampled.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DomainError, ParameterError, ShapeError


class Mode(enum.IntEnum):
    STEP = 0
    LINEAR = 1


STEP = Mode.STEP
LINEAR = Mode.LINEAR


def _readonly(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def _parse_modes(modes, n):
    if isinstance(modes, str):
        modes = Mode[modes.upper()]
    if np.isscalar(modes) or isinstance(modes, Mode):
        return np.full(n, int(modes), dtype=np.int8)
    out = []
    for m in modes:
        out.append(int(Mode[m.upper()]) if isinstance(m, str) else int(m))
    out = np.asarray(out, dtype=np.int8)
    if out.shape != (n,):
        raise ShapeError(f"expected {n} segment modes, got {out.shape}")
    if np.any((out != 0) & (out != 1)):
        raise ContractError("modes must be STEP or LINEAR")
    return out


class CadlagPath:
    """Right-continuous path with left limits on ``[times[0], times[-1]]``.

    Parameters
    ----------
    times : increasing grid, at least two points (a single point is padded
        when ``domain`` is given).
    values : ``(N+1,)`` or ``(N+1, d)`` right values.
    modes : "STEP", "LINEAR" or one mode per segment.
    left : optional ``(N+1, d)`` left limits; ``left[0]`` is ignored.
    domain : optional ``(a, b)``; if ``b`` exceeds the last grid time the last
        value is held constant up to ``b``.
    """

    __slots__ = ("times", "values", "left", "modes")

    def __init__(self, times, values, modes=LINEAR, left=None, domain=None):
        t = np.asarray(times, dtype=float).ravel()
        v = np.asarray(values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] != t.size:
            raise ShapeError(f"values shape {v.shape} does not match {t.size} times")
        if v.shape[1] < 1:
            raise ShapeError("dimension must be at least 1")
        if left is not None:
            lf = np.asarray(left, dtype=float)
            if lf.ndim == 1:
                lf = lf[:, None]
            if lf.shape != v.shape:
                raise ShapeError("left limits must match values")
            lf = lf.copy()
        else:
            lf = None
        n_seg = t.size - 1
        if n_seg >= 1:
            md = _parse_modes(modes, n_seg)
        else:
            md = np.zeros(0, dtype=np.int8)
        if domain is not None:
            a, b = float(domain[0]), float(domain[1])
            if t.size == 0 or t[0] != a:
                raise ContractError("first grid time must equal the domain start")
            if b < t[-1]:
                raise ContractError("domain end precedes the last grid time")
            if b > t[-1]:
                t = np.append(t, b)
                v = np.vstack([v, v[-1:]])
                md = np.append(md, np.int8(STEP))
                if lf is not None:
                    lf = np.vstack([lf, v[-1:]])
        if t.size < 2:
            raise ContractError("a path needs at least two grid times")
        if not np.all(np.isfinite(t)) or np.any(np.diff(t) <= 0):
            raise ContractError("times must be finite and strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ContractError("values must be finite")
        if lf is None:
            lf = np.empty_like(v)
            lf[0] = v[0]
            lf[1:] = np.where(md[:, None] == STEP, v[:-1], v[1:])
        else:
            lf[0] = v[0]
            step = md == STEP
            if not np.array_equal(lf[1:][step], v[:-1][step]):
                raise ContractError("STEP cells must be constant up to their right end")
            if not np.all(np.isfinite(lf)):
                raise ContractError("left limits must be finite")
        self.times = _readonly(t)
        self.values = _readonly(v)
        self.left = _readonly(lf)
        self.modes = _readonly(md)

    # basic properties -------------------------------------------------
    @property
    def a(self):
        return float(self.times[0])

    @property
    def b(self):
        return float(self.times[-1])

    @property
    def domain(self):
        return (self.a, self.b)

    @property
    def dim(self):
        return self.values.shape[1]

    @property
    def n_segments(self):
        return self.times.size - 1

    def jump_indices(self):
        """Grid indices ``k >= 1`` with ``values[k] != left[k]``."""
        return np.nonzero(np.any(self.values[1:] != self.left[1:], axis=1))[0] + 1

    def jump_times(self):
        return self.times[self.jump_indices()]

    def has_custom_left(self):
        """True when some left limit differs from the plain mode default."""
        dflt = np.where(self.modes[:, None] == STEP, self.values[:-1], self.values[1:])
        return not np.array_equal(self.left[1:], dflt)

    def __repr__(self):
        return (f"CadlagPath(domain=({self.a:g}, {self.b:g}), d={self.dim}, "
                f"segments={self.n_segments})")

    def __eq__(self, other):
        if not isinstance(other, CadlagPath):
            return NotImplemented
        return (np.array_equal(self.times, other.times)
                and np.array_equal(self.values, other.values)
                and np.array_equal(self.left, other.left)
                and np.array_equal(self.modes, other.modes))

    __hash__ = None

    # evaluation -------------------------------------------------------
    def _check(self, t, strict_left=False):
        t = np.asarray(t, dtype=float)
        lo_bad = t <= self.a if strict_left else t < self.a
        if np.any(lo_bad) or np.any(t > self.b) or not np.all(np.isfinite(t)):
            side = "(a, b]" if strict_left else "[a, b]"
            raise DomainError(f"time outside {side} = [{self.a}, {self.b}]")
        return t

    def eval(self, t):
        """Right-continuous value at ``t`` (scalar -> ``(d,)``, array -> ``(..., d)``)."""
        t = self._check(t)
        scalar = t.ndim == 0
        tt = np.atleast_1d(t)
        n = self.n_segments
        k = np.clip(np.searchsorted(self.times, tt, side="right") - 1, 0, n)
        out = self.values[k].copy()
        inner = k < n
        ki = k[inner]
        if ki.size:
            t0 = self.times[ki]
            t1 = self.times[ki + 1]
            f = ((tt[inner] - t0) / (t1 - t0))[:, None]
            v0 = self.values[ki]
            out[inner] = v0 + f * (self.left[ki + 1] - v0)
        return out[0] if scalar else out

    def left_limit(self, t):
        """Limit from below at ``t``; requires ``t > a``."""
        t = self._check(t, strict_left=True)
        scalar = t.ndim == 0
        tt = np.atleast_1d(t)
        k = np.searchsorted(self.times, tt, side="left") - 1
        t0 = self.times[k]
        t1 = self.times[k + 1]
        f = ((tt - t0) / (t1 - t0))[:, None]
        v0 = self.values[k]
        out = v0 + f * (self.left[k + 1] - v0)
        hit = tt == t1
        out[hit] = self.left[k + 1][hit]
        return out[0] if scalar else out

    def knots(self, grid):
        """Right values and left limits on a sorted grid inside the domain.

        Grid points that coincide with the path's own grid return the stored
        arrays exactly.  ``left`` at the domain start equals the value.
        """
        g = np.asarray(grid, dtype=float)
        if g.size == 0:
            return np.zeros((0, self.dim)), np.zeros((0, self.dim))
        if g[0] < self.a or g[-1] > self.b:
            raise DomainError("grid outside the path domain")
        idx = np.searchsorted(self.times, g)
        idc = np.minimum(idx, self.times.size - 1)
        exact = self.times[idc] == g
        right = np.empty((g.size, self.dim))
        left = np.empty((g.size, self.dim))
        right[exact] = self.values[idc[exact]]
        left[exact] = self.left[idc[exact]]
        other = ~exact
        if np.any(other):
            right[other] = self.eval(g[other])
            # off-grid points are interior to a cell, so the path is continuous there
            left[other] = right[other]
        return right, left

    # transformations --------------------------------------------------
    def refine(self, extra):
        """Same path on the grid ``times ∪ extra`` (extra inside the domain)."""
        extra = np.asarray(extra, dtype=float).ravel()
        if extra.size == 0:
            return self
        g = np.union1d(self.times, extra)
        if g[0] < self.a or g[-1] > self.b:
            raise DomainError("refinement points outside the domain")
        if g.size == self.times.size:
            return self
        right, left = self.knots(g)
        seg = np.clip(np.searchsorted(self.times, g[:-1], side="right") - 1, 0,
                      self.n_segments - 1)
        return CadlagPath(g, right, self.modes[seg], left=left)

    def restrict(self, c, e):
        """Restriction to ``[c, e]``; the value at ``e`` is the right value."""
        c, e = float(c), float(e)
        if not (self.a <= c < e <= self.b):
            raise DomainError("restriction interval not inside the domain")
        p = self.refine([c, e])
        i0 = int(np.searchsorted(p.times, c))
        i1 = int(np.searchsorted(p.times, e))
        left = p.left[i0:i1 + 1].copy()
        left[0] = p.values[i0]
        return CadlagPath(p.times[i0:i1 + 1], p.values[i0:i1 + 1], p.modes[i0:i1],
                          left=left)

    def retime(self, a, b):
        """Affine change of the time axis onto ``[a, b]`` with exact endpoints."""
        a, b = float(a), float(b)
        if not b > a:
            raise ParameterError("need b > a")
        s = (self.times - self.a) / (self.b - self.a)
        t = a + s * (b - a)
        t[0], t[-1] = a, b
        return CadlagPath(t, self.values, self.modes, left=self.left)

    def map_values(self, fn):
        """Apply an affine map to values (only affine maps keep cells affine)."""
        v = fn(self.values)
        lf = fn(self.left)
        return CadlagPath(self.times, v, self.modes, left=lf)

    def __sub__(self, other):
        return difference(self, other)

    def compose(self, rho: "TimeChange") -> "CadlagPath":
        return compose(self, rho)


def constant_path(value, a=0.0, b=1.0):
    v = np.atleast_1d(np.asarray(value, dtype=float))
    return CadlagPath([a, b], np.vstack([v, v]), STEP)


def linear_path(v0, v1, a=0.0, b=1.0):
    v0 = np.atleast_1d(np.asarray(v0, dtype=float))
    v1 = np.atleast_1d(np.asarray(v1, dtype=float))
    return CadlagPath([a, b], np.vstack([v0, v1]), LINEAR)


def step_path(times, values, domain=None):
    return CadlagPath(times, values, STEP, domain=domain)


def union_knots(h1: CadlagPath, h2: CadlagPath):
    _check_pair(h1, h2)
    g = np.union1d(h1.times, h2.times)
    r1, l1 = h1.knots(g)
    r2, l2 = h2.knots(g)
    return g, r1, l1, r2, l2


def _check_pair(h1, h2, same_domain=True):
    if h1.dim != h2.dim:
        raise ShapeError(f"dimension mismatch {h1.dim} vs {h2.dim}")
    if same_domain and (h1.a != h2.a or h1.b != h2.b):
        raise ShapeError(f"domain mismatch {h1.domain} vs {h2.domain}")


def sup_dist(h1: CadlagPath, h2: CadlagPath) -> float:
    """Exact uniform distance.

    On the union grid both paths are affine on every cell, so the difference
    is affine there and its Euclidean norm is convex: the supremum is attained
    at a right value or a left limit of some union-grid point.
    """
    g, r1, l1, r2, l2 = union_knots(h1, h2)
    dr = np.linalg.norm(r1 - r2, axis=1).max()
    dl = np.linalg.norm(l1[1:] - l2[1:], axis=1).max() if g.size > 1 else 0.0
    return float(max(dr, dl))


def difference(h1: CadlagPath, h2: CadlagPath) -> CadlagPath:
    """The path ``h1 - h2`` on the union grid."""
    g, r1, l1, r2, l2 = union_knots(h1, h2)
    m1 = h1.modes[np.clip(np.searchsorted(h1.times, g[:-1], "right") - 1, 0, h1.n_segments - 1)]
    m2 = h2.modes[np.clip(np.searchsorted(h2.times, g[:-1], "right") - 1, 0, h2.n_segments - 1)]
    modes = np.where((m1 == STEP) & (m2 == STEP), STEP, LINEAR)
    return CadlagPath(g, r1 - r2, modes, left=l1 - l2)


def interleaved_points(h: CadlagPath) -> np.ndarray:
    """Sequence ``v0, l1, v1, ..., lN, vN`` with consecutive repeats removed.

    For p >= 1 the p-variation of a piecewise affine cadlag path equals the
    discrete p-variation of this sequence: interior points of affine cells
    never increase a partition sum, by convexity of ``|x|^p``.
    """
    n = h.times.size
    pts = np.empty((2 * n - 1, h.dim))
    pts[0::2] = h.values
    pts[1::2] = h.left[1:]
    keep = np.ones(pts.shape[0], dtype=bool)
    keep[1:] = np.any(pts[1:] != pts[:-1], axis=1)
    return pts[keep]


@dataclass(frozen=True)
class TimeChange:
    """Strictly increasing piecewise-linear bijection ``[x0, xn] -> [y0, yn]``."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).ravel()
        y = np.asarray(self.y, dtype=float).ravel()
        if x.size < 2 or x.shape != y.shape:
            raise ShapeError("time change needs matching knot arrays of length >= 2")
        if np.any(np.diff(x) <= 0) or np.any(np.diff(y) <= 0):
            raise ContractError("time change must be strictly increasing")
        object.__setattr__(self, "x", _readonly(x))
        object.__setattr__(self, "y", _readonly(y))

    @classmethod
    def identity(cls, a, b):
        return cls(np.array([a, b], float), np.array([a, b], float))

    @classmethod
    def affine(cls, src, dst):
        return cls(np.array(src, float), np.array(dst, float))

    @property
    def domain(self):
        return float(self.x[0]), float(self.x[-1])

    @property
    def range(self):
        return float(self.y[0]), float(self.y[-1])

    def __call__(self, t):
        return np.interp(t, self.x, self.y)

    def inverse(self) -> "TimeChange":
        return TimeChange(self.y, self.x)

    def disc(self) -> float:
        """``sup |rho(t) - t|``, attained at knots."""
        return float(np.max(np.abs(self.y - self.x)))

    def then(self, other: "TimeChange") -> "TimeChange":
        """``other ∘ self``."""
        if self.range != other.domain:
            raise ShapeError("time change ranges do not chain")
        xs = np.union1d(self.x, self.inverse()(other.x))
        xs = _strict(xs)
        return TimeChange(xs, other(self(xs)))

    def as_path(self) -> CadlagPath:
        return CadlagPath(self.x, self.y, LINEAR)


def _strict(x):
    """Nudge repeated values apart by ulps, keeping both endpoints exact."""
    x = np.array(x, dtype=float)
    end = x[-1]
    for i in range(1, x.size):
        if x[i] <= x[i - 1]:
            x[i] = np.nextafter(x[i - 1], np.inf)
    if x[-1] != end:
        x[-1] = end
        for i in range(x.size - 2, 0, -1):
            if x[i] >= x[i + 1]:
                x[i] = np.nextafter(x[i + 1], -np.inf)
    return x


def compose(h: CadlagPath, rho: TimeChange) -> CadlagPath:
    """``h ∘ rho`` as an exact CadlagPath on ``rho.domain``.

    Knots are the knots of ``rho`` plus the preimages of the grid of ``h``;
    grid points of ``h`` keep their stored values and left limits exactly.
    """
    if rho.range != h.domain:
        raise ShapeError(f"time change range {rho.range} differs from path domain {h.domain}")
    ht = h.times
    inner = ht[1:-1]
    inner = inner[~np.isin(inner, rho.y)]
    ys = np.concatenate([rho.y, inner])
    xs = np.concatenate([rho.x, np.interp(inner, rho.y, rho.x)])
    order = np.argsort(ys, kind="stable")
    ys = ys[order]
    xs = xs[order]
    # rounding can collapse preimages onto each other; nudge them apart
    xs = _strict(xs)
    if np.any(np.diff(xs) <= 0):
        raise ContractError("time change too steep to compose at double precision")
    right, left = h.knots(ys)
    seg = np.clip(np.searchsorted(ht, ys[:-1], side="right") - 1, 0, h.n_segments - 1)
    return CadlagPath(xs, right, h.modes[seg], left=left)


def random_time_change(rng, a, b, n_knots=5, strength=0.8):
    """Random piecewise-linear self-map of ``[a, b]`` for property tests."""
    w = rng.uniform(1.0 - strength, 1.0 + strength, size=n_knots + 1)
    y = np.concatenate([[0.0], np.cumsum(w)])
    y = a + (b - a) * y / y[-1]
    x = np.linspace(a, b, n_knots + 2)
    y[0], y[-1] = a, b
    return TimeChange(x, y)
