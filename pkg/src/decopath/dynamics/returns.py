"""Birkhoff-sum paths, first returns to a section, tails and excursion profiles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError, ShapeError, StatisticsError
from ..paths import STEP, CadlagPath
from ..stats import HillEstimate, hill


def scaling(n, alpha) -> float:
    """``b_n^-1 = n^(-1/alpha)``; shared with the fast-slow recursion."""
    return float(n) ** (-1.0 / alpha)


def observe(states, v) -> np.ndarray:
    """``v`` applied to a state array, returned with shape ``(N, d)``."""
    vals = np.asarray(v(states), dtype=float)
    n = np.shape(states)[0]
    if vals.ndim == 1:
        vals = vals[:, None]
    if vals.shape[0] != n:
        raise ShapeError(f"observable returned {vals.shape[0]} rows for {n} states")
    return vals


def birkhoff_wn(states, v, n, alpha) -> CadlagPath:
    """``W_n(k/n) = n^(-1/alpha) sum_{j<k} v(y_j)`` as a STEP path on [0, 1]."""
    n = int(n)
    if n < 1:
        raise ParameterError("n must be positive")
    if np.shape(states)[0] < n:
        raise ShapeError(f"orbit has {np.shape(states)[0]} states, need {n}")
    vals = observe(states[:n], v)
    incr = scaling(n, alpha) * vals
    path = np.vstack([np.zeros((1, vals.shape[1])), np.cumsum(incr, axis=0)])
    return CadlagPath(np.arange(n + 1) / n, path, STEP)


@dataclass(frozen=True)
class ReturnStructure:
    """Visits to the section at ``starts``; ``times[i]`` is the return time of
    visit ``i`` and ``labels[i]`` its section label (1 when the orbit leaves
    the section on the next step, else 0)."""

    starts: np.ndarray
    times: np.ndarray
    labels: np.ndarray

    @classmethod
    def from_section(cls, in_section):
        idx = np.nonzero(np.asarray(in_section, dtype=bool))[0]
        if idx.size < 2:
            raise StatisticsError("fewer than two visits to the section", int(idx.size))
        R = np.diff(idx)
        return cls(idx[:-1], R, (R > 1).astype(np.int8))

    def __len__(self):
        return self.times.size


def return_stats(rs: ReturnStructure, alpha=None, min_returns=10_000, k=None,
                 lags=(10, 100, 1000)) -> dict:
    """Hill index per label, overall index, and a clustering diagnostic.

    For each ``n`` in ``lags`` the diagnostic is the frequency of a return
    longer than ``b_n`` followed within ``n`` returns by another one, scaled
    by ``n``; it should not grow with ``n``.
    """
    N = len(rs)
    if N < min_returns:
        raise StatisticsError(f"need at least {min_returns} returns", N)
    out = {"returns": N, "overall": hill(rs.times, k=k)}
    for lab in np.unique(rs.labels):
        R = rs.times[rs.labels == lab]
        try:
            out[f"label_{int(lab)}"] = hill(R, k=k if k is None or k < R.size else None)
        except StatisticsError:
            out[f"label_{int(lab)}"] = HillEstimate(float("inf"), 0, float("nan"))
    a = alpha if alpha is not None else out["overall"].alpha
    cl = {}
    for n in lags:
        if n >= N:
            continue
        big = rs.times > n ** (1.0 / a)
        c = np.cumsum(np.concatenate([[0], big.astype(np.int64)]))
        # big returns among the next n after i
        nxt = c[np.minimum(np.arange(N) + 1 + n, N)] - c[np.arange(N) + 1]
        cl[n] = float(np.mean(big & (nxt > 0)) * n)
    out["clustering"] = cl
    return out


@dataclass(frozen=True)
class ProfileEstimate:
    grid: np.ndarray
    median: np.ndarray
    residual: float
    curves: np.ndarray
    depths: np.ndarray

    def as_path(self) -> CadlagPath:
        return CadlagPath(self.grid, self.median - self.median[0], 1)


def excursion_curve(values, start, R, grid):
    """``u -> S(uR)/R`` with ``S(m) = sum_{l<m} v_{start+l}``, linear in ``m``."""
    s = np.vstack([np.zeros((1, values.shape[1])), np.cumsum(values[start:start + R], axis=0)]) / R
    m = np.arange(R + 1) / R
    return np.stack([np.interp(grid, m, s[:, j]) for j in range(values.shape[1])], axis=1)


def extract_profiles(values, rs: ReturnStructure, threshold, label=1, n_grid=201,
                     min_count=20) -> ProfileEstimate:
    """Median normalised excursion curve over returns longer than ``threshold``.

    ``residual`` is the largest sup-distance of an individual curve to the
    median.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    sel = np.nonzero((rs.times > threshold) & (rs.labels == label))[0]
    sel = sel[rs.starts[sel] + rs.times[sel] <= values.shape[0]]
    if sel.size < min_count:
        raise StatisticsError(f"only {sel.size} excursions deeper than {threshold}", int(sel.size))
    grid = np.linspace(0.0, 1.0, n_grid)
    curves = np.stack([excursion_curve(values, rs.starts[i], rs.times[i], grid) for i in sel])
    med = np.median(curves, axis=0)
    res = float(np.max(np.linalg.norm(curves - med, axis=2)))
    return ProfileEstimate(grid, med, res, curves, rs.times[sel])


def deepest_pair_gap(values, rs: ReturnStructure, n_grid=201) -> float:
    """Sup-distance between the normalised curves of the two longest returns."""
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    ok = np.nonzero(rs.starts + rs.times <= values.shape[0])[0]
    if ok.size < 2:
        raise StatisticsError("need two complete excursions", int(ok.size))
    i, j = ok[np.argsort(rs.times[ok], kind="stable")[-2:]]
    grid = np.linspace(0.0, 1.0, n_grid)
    a = excursion_curve(values, rs.starts[i], rs.times[i], grid)
    b = excursion_curve(values, rs.starts[j], rs.times[j], grid)
    return float(np.max(np.linalg.norm(a - b, axis=1)))
