"""Pomeau-Manneville intermittent map and its return-time constants.

``T(y) = y (1 + 2^g y^g)`` on ``[0, 1/2)`` and ``2y - 1`` on ``[1/2, 1]``.
The invariant measure is heavy near the neutral point 0, so its constants
are computed on the section ``[1/2, 1]`` where the induced (first-return)
map is uniformly expanding and its invariant density is analytic.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numba as nb
import numpy as np
from numpy.polynomial import chebyshev as cheb

from ..errors import ParameterError


@nb.njit(cache=True)
def _T(y, g, c2):
    if y < 0.5:
        return y * (1.0 + c2 * y ** g)
    return 2.0 * y - 1.0


@nb.njit(cache=True)
def _orbit(y0, n, g, c2):
    out = np.empty(n)
    y = y0
    for k in range(n):
        out[k] = y
        y = _T(y, g, c2)
    return out, y


@nb.njit(cache=True)
def _orbit_batch(y0, n, g, c2):
    m = y0.size
    out = np.empty((n, m))
    last = np.empty(m)
    for j in range(m):
        y = y0[j]
        for k in range(n):
            out[k, j] = y
            y = _T(y, g, c2)
        last[j] = y
    return out, last


@nb.njit(cache=True)
def _ginv(z, g, c2):
    """Left inverse branch: the ``y`` in ``[0, 1/2]`` with ``y (1 + c2 y^g) = z``."""
    if z <= 0.0:
        return 0.0
    # the branch is increasing and convex, so Newton from the right is monotone
    y = min(z, 0.5)
    for _ in range(100):
        f = y * (1.0 + c2 * y ** g) - z
        d = 1.0 + (1.0 + g) * c2 * y ** g
        ny = y - f / d
        if ny >= y or ny <= 0.0:
            break
        if y - ny <= 1e-17 * y:
            y = ny
            break
        y = ny
    return y


@nb.njit(cache=True)
def _branches(z, K, g, c2):
    """``g^k(z)`` and ``(g^k)'(z)`` for ``k = 0..K``."""
    n = z.size
    pts = np.empty((K + 1, n))
    der = np.empty((K + 1, n))
    for i in range(n):
        y = z[i]
        d = 1.0
        pts[0, i] = y
        der[0, i] = 1.0
        for k in range(1, K + 1):
            y = _ginv(y, g, c2)
            d = d / (1.0 + (1.0 + g) * c2 * y ** g)
            pts[k, i] = y
            der[k, i] = d
    return pts, der


@nb.njit(cache=True)
def _preimages_of_half(K, g, c2):
    out = np.empty(K + 1)
    y = 0.5
    for k in range(K + 1):
        out[k] = y
        y = _ginv(y, g, c2)
    return out


@dataclass(frozen=True)
class PMMap:
    gamma: float = 2.0 / 3.0

    def __post_init__(self):
        if not 0.5 < self.gamma < 1.0:
            raise ParameterError(f"gamma must lie in (1/2, 1), got {self.gamma}")

    @property
    def alpha(self):
        return 1.0 / self.gamma

    @property
    def c2(self):
        return 2.0 ** self.gamma

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        return np.where(y < 0.5, y * (1.0 + self.c2 * np.abs(y) ** self.gamma), 2.0 * y - 1.0)

    def inverse_left(self, z):
        return np.vectorize(lambda s: _ginv(float(s), self.gamma, self.c2))(z)

    @cached_property
    def measure(self) -> "PMMeasure":
        return PMMeasure(self)


def pm_orbit(pm: PMMap, y0, n) -> np.ndarray:
    """States ``y_0 .. y_{n-1}``."""
    if n < 1:
        raise ParameterError("n must be positive")
    if not 0.0 <= y0 <= 1.0:
        raise ParameterError("y0 must lie in [0, 1]")
    return _orbit(float(y0), int(n), pm.gamma, pm.c2)[0]


def pm_orbit_batch(pm: PMMap, y0, n):
    """Orbits as columns, shape ``(n, m)``, plus the states after ``n`` steps."""
    y0 = np.ascontiguousarray(np.asarray(y0, dtype=float).ravel())
    return _orbit_batch(y0, int(n), pm.gamma, pm.c2)


def pm_stationary(pm: PMMap, m, rng, burn_in=10_000):
    """``m`` initial states from uniform draws pushed through a burn-in."""
    return pm_orbit_batch(pm, rng.uniform(0.0, 1.0, m), burn_in)[1]


def _tail_sum(y, g, c):
    """``sum_{m>=1} (g^m)'(y)`` for small ``y`` from the flow approximation
    ``g^m(y) ~ (y^-g + c m)^(-1/g)``."""
    return y ** (-g - 1.0) * (g / c) * (y ** -g + 0.5 * c) ** (-1.0 / g)


class PMMeasure:
    """Constants of the invariant measure from the induced transfer operator.

    ``density`` is the normalised invariant density of the return map on
    ``[1/2, 1]``; ``mean_return`` is ``E R`` on the section (``1 / mu(section)``);
    ``tail_constant`` is ``C`` in ``P(R > n) ~ C n^-alpha``.
    """

    def __init__(self, pm: PMMap, n_nodes=40, K=2000, K_mean=100_000):
        self.pm = pm
        g, c2 = pm.gamma, pm.c2
        self._c = g * c2
        self.K = K
        self._deg = n_nodes - 1
        k = np.arange(n_nodes)
        z = 0.75 + 0.25 * np.cos(np.pi * (k + 0.5) / n_nodes)
        pts, der = _branches(z, K, g, c2)
        x = 0.5 * (1.0 + pts)
        w = 0.5 * der
        tail = w[-1] * _tail_sum(pts[-1], g, self._c)
        V = self._vander(z)
        Vinv = np.linalg.inv(V)
        rows = np.einsum("ki,kij->ij", w, self._vander(x.ravel()).reshape(K + 1, n_nodes, n_nodes))
        rows += tail[:, None] * self._vander(np.array([0.5]))
        op = rows @ Vinv
        vals, vecs = np.linalg.eig(op)
        i = int(np.argmin(np.abs(vals - 1.0)))
        self.eigenvalue = float(vals[i].real)
        h = np.real(vecs[:, i])
        coef = np.linalg.solve(V, h)
        coef /= self._integral(coef)
        self.coef = coef
        self.nodes = z
        self.mean_return = self._mean_return(K_mean)
        self.tail_constant = float(self.density(0.5)) / 2.0 * self._c ** (-1.0 / g)

    def _vander(self, x):
        return cheb.chebvander(4.0 * np.asarray(x) - 3.0, self._deg)

    def _integral(self, coef):
        anti = cheb.chebint(coef, lbnd=-1.0)
        return float(cheb.chebval(1.0, anti)) / 4.0

    def density(self, x):
        return cheb.chebval(4.0 * np.asarray(x, dtype=float) - 3.0, self.coef)

    def cdf(self, x):
        """``int_{1/2}^x density``."""
        anti = cheb.chebint(self.coef, lbnd=-1.0)
        return cheb.chebval(4.0 * np.asarray(x, dtype=float) - 3.0, anti) / 4.0

    def _mean_return(self, K):
        g = self.pm.gamma
        xs = _preimages_of_half(K, g, self.pm.c2)
        head = float(self.cdf(0.5 * (1.0 + xs)).sum())
        # remaining cdf(1/2 + x_m / 2) ~ density(1/2) x_m / 2 with x_m ~ (x_K^-g + c (m-K))^(-1/g)
        A = xs[-1] ** -g
        tail = (A + 0.5 * self._c) ** (1.0 - 1.0 / g) / (self._c * (1.0 / g - 1.0))
        return 1.0 + head + float(self.density(0.5)) / 2.0 * tail

    @property
    def section_mass(self):
        return 1.0 / self.mean_return

    @property
    def stable_scale(self):
        """``(C / E R)^(1/alpha)``: tail measure of excursion lengths per unit time."""
        return (self.tail_constant / self.mean_return) ** self.pm.gamma

    def expectation(self, w, n_quad=32):
        """``E_mu w`` for a smooth vectorised ``w`` on ``[0, 1]``.

        Uses ``E_mu w = w(0) + E[V_w - w(0) R] / E R`` where ``V_w`` is the
        excursion sum over one return; the bracket decays fast in ``R``.
        """
        g, c2 = self.pm.gamma, self.pm.c2
        t, qw = np.polynomial.legendre.leggauss(n_quad)
        z = 0.75 + 0.25 * t
        qw = 0.25 * qw
        pts, der = _branches(z, self.K, g, c2)
        w0 = float(np.asarray(w(np.array([0.0])))[0])
        wv = np.asarray(w(pts.ravel()), dtype=float).reshape(pts.shape) - w0
        # S_k(z) = sum_{j=1..k} (w(g^j z) - w(0))
        S = np.vstack([np.zeros((1, z.size)), np.cumsum(wv[1:], axis=0)])
        x = 0.5 * (1.0 + pts)
        D = np.asarray(w(x.ravel()), dtype=float).reshape(x.shape) - w0 + S
        integrand = self.density(x) * D * 0.5 * der
        total = float((integrand.sum(axis=0) * qw).sum())
        tail = 0.5 * der[-1] * _tail_sum(pts[-1], g, self._c)
        d_tail = float(np.asarray(w(np.array([0.5])))[0]) - w0 + S[-1]
        total += float((self.density(0.5) * d_tail * tail * qw).sum())
        return w0 + total / self.mean_return
