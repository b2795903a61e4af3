"""Decorated cadlag paths.

A decorated path is a skeleton ``t -> phi(t)(1)`` plus finitely many times
carrying an excursion ``phi(t)`` on ``[0, 1]``.  The delta-extension inserts a
fictitious interval for each excursion, which turns the decorated path into
an ordinary cadlag path on ``[a, b + delta]``; metrics and ODE solves work on
that extension and ``collapse`` maps results back.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, ParameterError, ShapeError
from .paths import LINEAR, STEP, CadlagPath, TimeChange, compose, _strict
from .pvar import p_variation
from .skorokhod import j1_dist, sigma_pvar

_MATCH_TOL = 1e-9


@dataclass(frozen=True)
class Decoration:
    """Excursion ``phi(t)`` attached to time ``t``; the excursion lives on [0, 1]."""

    t: float
    excursion: CadlagPath

    def __post_init__(self):
        object.__setattr__(self, "t", float(self.t))
        if self.excursion.domain != (0.0, 1.0):
            raise ContractError(f"excursion must live on [0, 1], got {self.excursion.domain}")


def _close(u, v, scale=1.0):
    return np.linalg.norm(np.asarray(u) - np.asarray(v)) <= _MATCH_TOL * (1.0 + scale)


@dataclass(frozen=True)
class DecoratedPath:
    """Skeleton plus decorations sorted by time.

    Undecorated jump times of the skeleton carry the implicit constant
    excursion ``s -> h(t)``.
    """

    skeleton: CadlagPath
    decorations: tuple = ()

    def __post_init__(self):
        decs = tuple(sorted(self.decorations, key=lambda d: d.t))
        object.__setattr__(self, "decorations", decs)
        sk = self.skeleton
        ts = [d.t for d in decs]
        if len(set(ts)) != len(ts):
            raise ContractError("decoration times must be distinct")
        scale = float(np.abs(sk.values).max())
        for d in decs:
            if not (sk.a <= d.t <= sk.b):
                raise ContractError(f"decoration time {d.t} outside {sk.domain}")
            if d.excursion.dim != sk.dim:
                raise ShapeError("excursion dimension differs from the skeleton")
            if not _close(d.excursion.values[-1], sk.eval(d.t), scale):
                raise ContractError(f"excursion at t={d.t} does not end at the skeleton value")

    @property
    def domain(self):
        return self.skeleton.domain

    @property
    def dim(self):
        return self.skeleton.dim

    @property
    def times(self):
        return np.array([d.t for d in self.decorations])

    @property
    def endpoint_continuous(self) -> bool:
        """True when every excursion starts at the skeleton's left limit."""
        sk = self.skeleton
        scale = float(np.abs(sk.values).max())
        for d in self.decorations:
            ref = sk.left_limit(d.t) if d.t > sk.a else sk.values[0]
            if not _close(d.excursion.values[0], ref, scale):
                return False
        return True


def trivial_lift(h: CadlagPath) -> DecoratedPath:
    """One STEP excursion ``h(t-)`` then ``h(t)`` per jump of ``h``."""
    decs = [Decoration(h.times[k], CadlagPath([0.0, 1.0], [h.left[k], h.values[k]], STEP))
            for k in h.jump_indices()]
    return DecoratedPath(h, tuple(decs))


def linear_lift(h: CadlagPath) -> DecoratedPath:
    """One LINEAR excursion from ``h(t-)`` to ``h(t)`` per jump of ``h``."""
    decs = [Decoration(h.times[k], CadlagPath([0.0, 1.0], [h.left[k], h.values[k]], LINEAR))
            for k in h.jump_indices()]
    return DecoratedPath(h, tuple(decs))


@dataclass(frozen=True)
class Extension:
    """Cadlag path on ``[a, b + delta]`` with its interval ledger.

    ``starts[j]`` and ``lengths[j]`` describe the fictitious interval
    ``[tau(t_j-), tau(t_j)]`` of decoration time ``times[j]``.
    """

    extended: CadlagPath
    delta: float
    base: tuple
    times: np.ndarray
    starts: np.ndarray
    ends: np.ndarray

    def __post_init__(self):
        if not self.delta > 0:
            raise ParameterError("delta must be positive")

    @property
    def lengths(self):
        return self.ends - self.starts

    def tau(self, t):
        """``tau(t) = t + sum of lengths with t_j <= t``."""
        t = np.asarray(t, dtype=float)
        cum = np.concatenate([[0.0], np.cumsum(self.lengths)])
        return t + cum[np.searchsorted(self.times, t, side="right")]

    def tau_left(self, t):
        t = np.asarray(t, dtype=float)
        cum = np.concatenate([[0.0], np.cumsum(self.lengths)])
        return t + cum[np.searchsorted(self.times, t, side="left")]

    def clock_knots(self):
        a, b = self.base
        xs = [a]
        ys = [a]
        for t, c, e in zip(self.times, self.starts, self.ends):
            for x in (c, e):
                if x > xs[-1]:
                    xs.append(x)
                    ys.append(t)
        if self.times.size == 0 and b > xs[-1]:
            # no decorations: the padding [b, b + delta] is frozen time
            xs.append(b)
            ys.append(b)
        if self.extended.b > xs[-1]:
            xs.append(self.extended.b)
            ys.append(b)
        return np.array(xs), np.array(ys)

    def tau_inv(self, u):
        """Continuous non-decreasing left inverse of ``tau``."""
        xs, ys = self.clock_knots()
        return np.interp(u, xs, ys)

    def clock_path(self) -> CadlagPath:
        """``tau_inv`` as a LINEAR path on the extended domain."""
        xs, ys = self.clock_knots()
        return CadlagPath(xs, ys, LINEAR)

    def parametric(self) -> CadlagPath:
        """``(phi^delta, tau_inv)`` sampled on the extended grid."""
        ext = self.extended
        g = np.union1d(ext.times, self.clock_knots()[0])
        r, l = ext.knots(g)
        c = self.tau_inv(g)[:, None]
        p = ext.refine(g)
        return CadlagPath(g, np.hstack([r, c]), p.modes, left=np.hstack([l, c]))

    def with_path(self, path: CadlagPath) -> "Extension":
        """Same ledger with another path on the extended domain (e.g. a solution)."""
        if path.domain != self.extended.domain:
            raise ShapeError("path domain differs from the extension domain")
        return Extension(path, self.delta, self.base, self.times, self.starts, self.ends)


def _interval_lengths(k, delta):
    """Fictitious lengths ``delta 2^-j / r`` with ``r = sum 2^-j``; they sum to ``delta``."""
    if k == 0:
        return np.zeros(0)
    w = 0.5 ** np.arange(1, k + 1)
    ell = delta * w / w.sum()
    return ell


def delta_extension(phi: DecoratedPath, delta: float) -> Extension:
    """Insert a fictitious interval per decoration (earliest time gets the largest)."""
    delta = float(delta)
    if not delta > 0:
        raise ParameterError(f"delta must be positive, got {delta}")
    sk = phi.skeleton
    a, b = sk.domain
    decs = phi.decorations
    kappa = len(decs)
    if kappa == 0:
        ext = CadlagPath(sk.times, sk.values, sk.modes, left=sk.left, domain=(a, b + delta))
        return Extension(ext, delta, (a, b), np.zeros(0), np.zeros(0), np.zeros(0))
    dt = np.array([d.t for d in decs])
    ell = _interval_lengths(kappa, delta)
    # cumulative shift after each decoration; the last one is exactly delta
    cum_after = np.cumsum(ell)
    cum_after[-1] = delta
    cum_before = np.concatenate([[0.0], cum_after[:-1]])
    s = sk.refine(dt)
    times, vals, lefts, modes = [], [], [], []
    starts = np.empty(kappa)
    stops = np.empty(kappa)
    j = 0
    for k in range(s.times.size):
        t = s.times[k]
        seg_mode = s.modes[k] if k < s.n_segments else None
        if j < kappa and t == dt[j]:
            c = t + cum_before[j]
            e = t + cum_after[j] if k < s.times.size - 1 else b + delta
            starts[j] = c
            stops[j] = e
            ex = decs[j].excursion
            m = ex.times.size
            et = c + ex.times[:-1] * (e - c)
            for q in range(m - 1):
                times.append(et[q])
                vals.append(ex.values[q])
                if q == 0:
                    lefts.append(s.left[k] if k > 0 else ex.values[0])
                else:
                    lefts.append(ex.left[q])
                modes.append(ex.modes[q])
            times.append(e)
            vals.append(s.values[k])
            lefts.append(ex.left[-1])
            j += 1
        else:
            shift = cum_before[j] if j < kappa else delta
            times.append(t + shift if k < s.times.size - 1 else b + delta)
            vals.append(s.values[k])
            lefts.append(s.left[k])
        if seg_mode is not None:
            modes.append(seg_mode)
    times = np.array(times)
    if np.any(np.diff(times) <= 0):
        times = _strict(times)
    lefts = np.array(lefts)
    vals = np.array(vals)
    modes = np.array(modes, dtype=np.int8)
    # a STEP cell must end at its start value exactly
    step = modes == STEP
    lefts[1:][step] = vals[:-1][step]
    ext = CadlagPath(times, vals, modes, left=lefts)
    return Extension(ext, delta, (a, b), dt, starts, stops)


def collapse(ext: Extension) -> DecoratedPath:
    """Map a path on the extended domain back to a decorated path."""
    if not isinstance(ext, Extension):
        raise ContractError("collapse needs an Extension carrying its interval ledger")
    p = ext.extended
    a, b = ext.base
    starts, ends = ext.starts, ext.ends
    if starts.size:
        p = p.refine(np.concatenate([starts, ends]))
    u = p.times
    decs = []
    for t, c, e in zip(ext.times, starts, ends):
        piece = p.restrict(c, e).retime(0.0, 1.0)
        decs.append(Decoration(t, piece))
    kt, kv, kl, km = [], [], [], []
    j = 0
    n = u.size
    for i in range(n):
        x = u[i]
        if starts.size == 0 and x > b:
            break
        if j < starts.size and starts[j] <= x < ends[j]:
            continue
        if j < starts.size and x == ends[j]:
            kt.append(ext.times[j])
            kv.append(p.values[i])
            ic = int(np.searchsorted(u, starts[j]))
            kl.append(p.left[ic] if ic > 0 else p.values[ic])
            if len(kt) > 1:
                km.append(p.modes[ic - 1])
            j += 1
            continue
        if starts.size == 0:
            shift = 0.0
        elif j < starts.size:
            shift = ext.lengths[:j].sum()
        else:
            shift = ext.delta
        tval = x - shift
        kt.append(tval)
        kv.append(p.values[i])
        kl.append(p.left[i])
        if len(kt) > 1:
            km.append(p.modes[i - 1])
    kt = np.array(kt)
    if starts.size == 0 and kt[-1] < b:
        raise ContractError("extended path has no grid point at the base end")
    kt[-1] = b
    kt[0] = a
    bad = np.diff(kt) <= 0
    if np.any(bad):
        kt = _strict(kt)
        if kt[-1] > b:
            raise ContractError("collapsed grid is not strictly increasing")
    kv = np.array(kv)
    kl = np.array(kl)
    km = np.array(km, dtype=np.int8)
    step = km == STEP
    kl[1:][step] = kv[:-1][step]
    skel = CadlagPath(kt, kv, km, left=kl)
    return DecoratedPath(skel, tuple(decs))


@dataclass(frozen=True)
class MetricEstimate:
    """Metric value on a delta-extension with its certified delta bias."""

    value: float
    bias: float
    delta: float

    def __float__(self):
        return float(self.value)


def _check_compatible(phi1, phi2):
    if phi1.domain != phi2.domain:
        raise ShapeError(f"domain mismatch {phi1.domain} vs {phi2.domain}")
    if phi1.dim != phi2.dim:
        raise ShapeError("dimension mismatch")


def alpha_inf(phi1: DecoratedPath, phi2: DecoratedPath, delta=0.01, resolution=65) -> MetricEstimate:
    """Uniform Skorokhod distance of the delta-extensions; the limit as
    ``delta -> 0`` lies within ``2 delta`` of the value."""
    _check_compatible(phi1, phi2)
    e1 = delta_extension(phi1, delta).extended
    e2 = delta_extension(phi2, delta).extended
    return MetricEstimate(float(j1_dist(e1, e2, resolution)), 2.0 * delta, float(delta))


def alpha_pvar(phi1: DecoratedPath, phi2: DecoratedPath, p, delta=0.01, resolution=65) -> MetricEstimate:
    """p-variation Skorokhod distance of the delta-extensions."""
    _check_compatible(phi1, phi2)
    e1 = delta_extension(phi1, delta).extended
    e2 = delta_extension(phi2, delta).extended
    return MetricEstimate(float(sigma_pvar(e1, e2, p, resolution)), 2.0 * delta, float(delta))


def pvar_decorated(phi: DecoratedPath, p) -> float:
    """p-variation of any delta-extension (it does not depend on delta)."""
    return p_variation(delta_extension(phi, 1.0).extended, p)


def restrict(phi: DecoratedPath, c, e, keep_start=True) -> DecoratedPath:
    """Restriction to ``[c, e]``.

    With ``keep_start=False`` a decoration at ``c`` is dropped, which gives
    the half-open piece ``(c, e]`` started from the skeleton value at ``c``.
    """
    sk = phi.skeleton.restrict(c, e)
    decs = [d for d in phi.decorations
            if (c < d.t <= e) or (keep_start and d.t == c)]
    return DecoratedPath(sk, tuple(decs))


def reparametrise_excursions(phi: DecoratedPath, rhos) -> DecoratedPath:
    """Replace each excursion by ``excursion ∘ rho`` (an equivalent copy)."""
    decs = tuple(Decoration(d.t, compose(d.excursion, r)) for d, r in zip(phi.decorations, rhos))
    return DecoratedPath(phi.skeleton, decs)


def canonical_excursion(ex: CadlagPath, n_grid=257) -> CadlagPath:
    """Equivalent excursion parametrised proportionally to arc length.

    Jumps are kept at their arc-length position; constant stretches get a
    vanishing share of the parameter so the map stays a bijection.  The
    result is refined onto ``n_grid`` uniform points of ``[0, 1]``.
    """
    seg = np.linalg.norm(ex.left[1:] - ex.values[:-1], axis=1)
    total = seg.sum()
    w = seg + (1e-9 * total if total > 0 else 1.0) / seg.size
    knots = np.concatenate([[0.0], np.cumsum(w)])
    knots /= knots[-1]
    knots[-1] = 1.0
    arc = TimeChange(knots, ex.times)
    out = compose(ex, arc)
    return out.refine(np.linspace(0.0, 1.0, n_grid))


def canonical(phi: DecoratedPath, n_grid=257) -> DecoratedPath:
    decs = tuple(Decoration(d.t, canonical_excursion(d.excursion, n_grid)) for d in phi.decorations)
    return DecoratedPath(phi.skeleton, decs)
