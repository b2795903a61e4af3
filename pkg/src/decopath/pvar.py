"""Exact p-variation of sampled paths."""

from __future__ import annotations

import math

import numba as nb
import numpy as np
from scipy.spatial import ConvexHull
from scipy.spatial.distance import pdist

from .errors import ParameterError
from .paths import CadlagPath, interleaved_points


@nb.njit(cache=True)
def _dist(x, i, j):
    s = 0.0
    for c in range(x.shape[1]):
        d = x[i, c] - x[j, c]
        s += d * d
    return math.sqrt(s)


@nb.njit(cache=True)
def _pvar_pow(x, p):
    """``max over partitions of sum |x_{k_{i+1}} - x_{k_i}|^p``.

    ``run[j]`` is the best sum over partitions of ``x[0..j]`` ending at ``j``;
    it is non-decreasing in ``j``.  Candidates ``m`` are scanned backwards in
    dyadic blocks; a block is skipped when ``run[block end]`` plus the
    farthest bounding-box distance cannot beat the current best.
    """
    n, d = x.shape
    if n < 2:
        return 0.0
    levels = 1
    while (1 << (levels - 1)) < n:
        levels += 1
    offs = np.zeros(levels + 1, dtype=np.int64)
    for k in range(levels):
        offs[k + 1] = offs[k] + ((n + (1 << k) - 1) >> k)
    lo = np.empty((offs[levels], d))
    hi = np.empty((offs[levels], d))
    for i in range(n):
        for c in range(d):
            lo[i, c] = x[i, c]
            hi[i, c] = x[i, c]
    for k in range(1, levels):
        nb_k = offs[k + 1] - offs[k]
        nb_prev = offs[k] - offs[k - 1]
        for b in range(nb_k):
            c0 = offs[k - 1] + 2 * b
            dst = offs[k] + b
            for c in range(d):
                lo[dst, c] = lo[c0, c]
                hi[dst, c] = hi[c0, c]
            if 2 * b + 1 < nb_prev:
                for c in range(d):
                    lo[dst, c] = min(lo[dst, c], lo[c0 + 1, c])
                    hi[dst, c] = max(hi[dst, c], hi[c0 + 1, c])
    run = np.zeros(n)
    for j in range(1, n):
        best = run[j - 1] + _dist(x, j - 1, j) ** p
        m = j - 2
        while m >= 0:
            # largest aligned block ending at m
            k = 0
            while k + 1 < levels and ((m + 1) & ((1 << (k + 1)) - 1)) == 0:
                k += 1
            while True:
                start = m + 1 - (1 << k)
                bidx = offs[k] + (start >> k)
                far = 0.0
                for c in range(d):
                    a1 = x[j, c] - lo[bidx, c]
                    a2 = hi[bidx, c] - x[j, c]
                    a = a1 if a1 > a2 else a2
                    far += a * a
                bound = run[m] + math.sqrt(far) ** p
                if bound <= best:
                    m = start - 1
                    break
                if k == 0:
                    val = run[m] + _dist(x, m, j) ** p
                    if val > best:
                        best = val
                    m -= 1
                    break
                k -= 1
        run[j] = best
    return run[n - 1]


def _local_extrema(x):
    """Scalar sequence reduced to its alternating local extrema (endpoints kept)."""
    x = x[np.concatenate([[True], np.diff(x) != 0])]
    if x.size <= 2:
        return x
    dx = np.sign(np.diff(x))
    turn = np.nonzero(dx[1:] != dx[:-1])[0] + 1
    return x[np.concatenate([[0], turn, [x.size - 1]])]


def diameter(points: np.ndarray) -> float:
    """``max_{i,j} |x_i - x_j|``."""
    pts = np.asarray(points, dtype=float)
    if pts.shape[0] < 2:
        return 0.0
    if pts.shape[1] == 1:
        return float(pts.max() - pts.min())
    if pts.shape[0] > 64 and pts.shape[1] == 2:
        try:
            pts = pts[ConvexHull(pts).vertices]
        except Exception:  # degenerate hull, e.g. collinear points
            pass
    if pts.shape[0] > 4000:
        best = 0.0
        for i in range(0, pts.shape[0], 2000):
            diff = pts[i:i + 2000, None, :] - pts[None, :, :]
            best = max(best, float(np.sqrt((diff ** 2).sum(-1)).max()))
        return best
    return float(pdist(pts).max())


def pvar_points(points, p) -> float:
    """p-variation of a finite point sequence in R^d."""
    p = float(p)
    if not p >= 1.0:
        raise ParameterError(f"p-variation needs p >= 1, got {p}")
    x = np.ascontiguousarray(np.asarray(points, dtype=float))
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] < 2:
        return 0.0
    if math.isinf(p):
        return diameter(x)
    if p == 1.0:
        return float(np.linalg.norm(np.diff(x, axis=0), axis=1).sum())
    if x.shape[1] == 1:
        x = _local_extrema(x[:, 0])[:, None]
    s = _pvar_pow(np.ascontiguousarray(x), p)
    return float(s ** (1.0 / p))


def p_variation(h: CadlagPath, p) -> float:
    """Exact p-variation semi-norm of a sampled path, ``p`` in ``[1, inf]``."""
    return pvar_points(interleaved_points(h), p)


def pvar_norm(h: CadlagPath, p) -> float:
    """``|h(a)| + |h|_p``."""
    return float(np.linalg.norm(h.values[0])) + p_variation(h, p)
