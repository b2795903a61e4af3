"""Tail-index estimation and small distributional helpers."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from .errors import ParameterError, StatisticsError


@dataclass(frozen=True)
class HillEstimate:
    """``alpha`` is ``inf`` when the top order statistics are all equal."""

    alpha: float
    k: int
    stderr: float

    @property
    def degenerate(self):
        return math.isinf(self.alpha)


def hill(x, k=None, fraction=None, min_samples=10) -> HillEstimate:
    """Hill estimator from the ``k`` largest of the positive samples ``x``.

    ``k`` defaults to ``fraction * n`` when given, otherwise ``sqrt(n)``.
    """
    x = np.asarray(x, dtype=float).ravel()
    x = x[x > 0]
    n = x.size
    if n < min_samples:
        raise StatisticsError(f"Hill estimator needs at least {min_samples} positive samples", n)
    if k is None:
        k = int(fraction * n) if fraction is not None else int(math.sqrt(n))
    k = int(k)
    if not 1 <= k < n:
        raise ParameterError(f"need 1 <= k < n, got k={k}, n={n}")
    top = np.partition(x, n - k - 1)[n - k - 1:]
    ref = top.min()
    # top holds the k+1 largest; the reference contributes log 1 = 0
    mean_log = float(np.log(top / ref).sum()) / k
    if mean_log <= 0.0:
        return HillEstimate(math.inf, k, math.nan)
    a = 1.0 / mean_log
    return HillEstimate(a, k, a / math.sqrt(k))


def ks_two_sample(a, b) -> float:
    return float(sps.ks_2samp(np.ravel(a), np.ravel(b)).statistic)


def deciles(x) -> np.ndarray:
    return np.quantile(np.asarray(x, dtype=float), np.linspace(0.1, 0.9, 9), axis=0)


def make_rng(seed, stream=0) -> np.random.Generator:
    """Counter-based generator keyed by ``(seed, stream)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(stream)])))
