"""Totally skewed alpha-stable skeletons with axis-supported spectral measure.

Jumps come from the LePage series: on ``[0, 1]`` the magnitudes are
``scale * G_k^(-1/alpha)`` with ``G_k`` the arrival times of a unit Poisson
process, directions are the unit axes ``e_i`` drawn with probability
``c_i``, times are uniform.  Given the K-th arrival the discarded jumps are a
Poisson cloud below ``r_K = scale * G_K^(-1/alpha)``, so subtracting the
compensator of the kept part gives an exact compensated sum up to the
(mean-zero) small-jump remainder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma as gamma_fn

from .decorated import Decoration, DecoratedPath
from .errors import ContractError, ParameterError, ShapeError
from .paths import LINEAR, CadlagPath, linear_path
from .stats import make_rng
from .young import jump_driver


@dataclass(frozen=True)
class StableSpec:
    alpha: float
    weights: tuple = (1.0,)
    K: int = 1000
    scale: float = 1.0
    horizon: tuple = (0.0, 1.0)

    def __post_init__(self):
        w = tuple(float(c) for c in np.atleast_1d(self.weights))
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "horizon", tuple(float(h) for h in self.horizon))
        if not 1.0 < self.alpha < 2.0:
            raise ParameterError(f"alpha must lie strictly inside (1, 2), got {self.alpha}")
        if any(c <= 0 for c in w) or abs(sum(w) - 1.0) > 1e-12:
            raise ParameterError("weights must be positive and sum to 1")
        if int(self.K) != self.K or self.K < 0:
            raise ParameterError("K must be a non-negative integer")
        if not self.scale > 0:
            raise ParameterError("scale must be positive")
        if self.horizon != (0.0, 1.0):
            raise ParameterError("only the horizon [0, 1] is supported")

    @property
    def e(self):
        return len(self.weights)

    def to_dict(self, seed=None):
        out = {"alpha": self.alpha, "weights": list(self.weights), "horizon": list(self.horizon),
               "K": int(self.K), "scale": self.scale}
        if seed is not None:
            out["seed"] = int(seed)
        return out

    @classmethod
    def from_dict(cls, obj):
        return cls(alpha=obj["alpha"], weights=tuple(obj["weights"]), K=int(obj["K"]),
                   scale=obj.get("scale", 1.0), horizon=tuple(obj.get("horizon", (0.0, 1.0))))


def compensator(spec: StableSpec, r_cut) -> np.ndarray:
    """Mean of jumps above ``r_cut`` per unit time, one entry per axis."""
    a = spec.alpha
    c = np.asarray(spec.weights)
    return a / (a - 1.0) * spec.scale ** a * np.power(r_cut, 1.0 - a)[..., None] * c


def small_jump_variance(spec: StableSpec, r_cut) -> np.ndarray:
    a = spec.alpha
    c = np.asarray(spec.weights)
    return a / (2.0 - a) * spec.scale ** a * np.power(r_cut, 2.0 - a)[..., None] * c


@dataclass(frozen=True)
class Jumps:
    times: np.ndarray
    sizes: np.ndarray
    axes: np.ndarray
    cutoff: float

    def vectors(self, e):
        out = np.zeros((self.times.size, e))
        out[np.arange(self.times.size), self.axes] = self.sizes
        return out


def sample_jumps(spec: StableSpec, seed, stream=0) -> Jumps:
    """The K largest jumps on ``[0, 1]``, sorted by time."""
    rng = make_rng(seed, stream)
    K = int(spec.K)
    arrivals = np.cumsum(rng.standard_exponential(K))
    sizes = spec.scale * arrivals ** (-1.0 / spec.alpha)
    axes = rng.choice(spec.e, size=K, p=np.asarray(spec.weights))
    times = rng.uniform(0.0, 1.0, size=K)
    # the uniform law has no atom at 0, but keep (0, 1] strictly
    times = np.where(times == 0.0, 1.0, times)
    order = np.argsort(times, kind="stable")
    cutoff = float(sizes[-1]) if K else math.inf
    return Jumps(times[order], sizes[order], axes[order], cutoff)


def sample_stable_skeleton(spec: StableSpec, seed, stream=0, return_jumps=False):
    """Compensated LePage skeleton: STEP jumps on a LINEAR drift, in ``R^e``.

    With ``K = 0`` the compensator is infinite; the path is then the zero
    drift (there is nothing to compensate).
    """
    jumps = sample_jumps(spec, seed, stream)
    e = spec.e
    if spec.K == 0:
        path = linear_path(np.zeros(e), np.zeros(e))
    else:
        drift = -compensator(spec, np.array(jumps.cutoff))
        path = jump_driver(list(zip(jumps.times, jumps.vectors(e))), linear_path(np.zeros(e), drift))
    return (path, jumps) if return_jumps else path


def sample_stable_endpoint(spec: StableSpec, n, seed, stream=0, small_jumps=True) -> np.ndarray:
    """``n`` independent copies of the value at time 1, shape ``(n, e)``.

    ``small_jumps`` adds the Gaussian approximation of the discarded
    compensated small jumps.
    """
    rng = make_rng(seed, stream)
    K = int(spec.K)
    if K == 0:
        raise ParameterError("endpoint sampling needs K >= 1")
    arrivals = np.cumsum(rng.standard_exponential((n, K)), axis=1)
    sizes = spec.scale * arrivals ** (-1.0 / spec.alpha)
    axes = rng.choice(spec.e, size=(n, K), p=np.asarray(spec.weights))
    out = np.zeros((n, spec.e))
    for i in range(spec.e):
        out[:, i] = np.where(axes == i, sizes, 0.0).sum(axis=1)
    cut = sizes[:, -1]
    out -= compensator(spec, cut)
    if small_jumps:
        out += rng.standard_normal((n, spec.e)) * np.sqrt(small_jump_variance(spec, cut))
    return out


def stable_char_fn(spec: StableSpec, s) -> complex:
    """``E exp(i s.G)`` for the law with spectral atoms ``c_i`` at ``e_i``,
    scaled by ``spec.scale``."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if s.shape != (spec.e,):
        raise ShapeError(f"argument must have shape ({spec.e},)")
    a = spec.alpha
    u = spec.scale * s
    factor = math.cos(math.pi * a / 2.0) * gamma_fn(1.0 - a)
    expo = sum(c * abs(ui) ** a * (1.0 - 1j * np.sign(ui) * math.tan(math.pi * a / 2.0))
               for c, ui in zip(spec.weights, u))
    return complex(np.exp(-expo * factor))


@dataclass(frozen=True)
class ProfileSet:
    """One LINEAR profile per axis, each starting at 0; ``gamma`` collects
    the endpoints as columns."""

    profiles: tuple

    def __post_init__(self):
        ps = tuple(self.profiles)
        object.__setattr__(self, "profiles", ps)
        if not ps:
            raise ParameterError("need at least one profile")
        d = ps[0].dim
        for p in ps:
            if p.domain != (0.0, 1.0) or p.dim != d:
                raise ShapeError("profiles must live on [0, 1] in a common dimension")
            if np.any(p.values[0] != 0.0):
                raise ContractError("profiles must start at 0")
            if np.any(p.modes != LINEAR) or p.has_custom_left():
                raise ContractError("profiles must be continuous LINEAR paths")

    @property
    def e(self):
        return len(self.profiles)

    @property
    def d(self):
        return self.profiles[0].dim

    @property
    def gamma(self) -> np.ndarray:
        return np.stack([p.values[-1] for p in self.profiles], axis=1)

    @classmethod
    def linear(cls, gamma):
        """Straight-line profiles ``s -> s * gamma[:, i]``."""
        g = np.atleast_2d(np.asarray(gamma, dtype=float))
        return cls(tuple(linear_path(np.zeros(g.shape[0]), g[:, i]) for i in range(g.shape[1])))


def decorate_levy(skeleton: CadlagPath, ps: ProfileSet, rtol=1e-12) -> DecoratedPath:
    """``Gamma L`` with excursion ``Gamma L(t-) + lambda P_i`` at each jump of
    size ``lambda`` along axis ``i``."""
    if skeleton.dim != ps.e:
        raise ShapeError(f"skeleton dimension {skeleton.dim} differs from e={ps.e}")
    G = ps.gamma
    out = skeleton.map_values(lambda x: x @ G.T)
    decs = []
    for k in skeleton.jump_indices():
        dl = skeleton.values[k] - skeleton.left[k]
        i = int(np.argmax(np.abs(dl)))
        lam = float(dl[i])
        off = np.delete(dl, i)
        if lam <= 0.0 or np.any(np.abs(off) > rtol * abs(lam)):
            raise ContractError(f"jump {dl} at t={skeleton.times[k]} is not along a positive axis")
        base = out.left[k]
        decs.append(Decoration(float(skeleton.times[k]),
                               ps.profiles[i].map_values(lambda p, b=base, s=lam: b + s * p)))
    return DecoratedPath(out, tuple(decs))
