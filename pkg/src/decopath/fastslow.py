"""Fast-slow Euler recursion driven by deterministic chaos, and its limit.

``x_{k+1} = x_k + A(x_k) / n + n^(-1/alpha) B(x_k) v(y_k)`` with ``y`` an
orbit of the PM map or the cusp billiard; ``X_n(t) = x_[nt]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .decorated import DecoratedPath
from .dynamics.billiard import _run
from .dynamics.pm import PMMap, pm_orbit_batch, pm_stationary
from .dynamics.returns import scaling
from .errors import DivergenceError, ParameterError, StatisticsError
from .levy import ProfileSet, StableSpec, decorate_levy, sample_stable_endpoint, sample_stable_skeleton
from .paths import STEP, CadlagPath
from .pvar import p_variation
from .stats import deciles, ks_two_sample, make_rng
from .young import SolveConfig, VectorField, solve_decorated_ode, solve_marcus

# rng streams derived from one seed
_FAST, _LIMIT = 1, 2


def pm_observable(pm: PMMap, w=lambda y: 1.0 - y):
    """``w - E_mu w`` and its profile endpoint ``v(0)``."""
    mean = pm.measure.expectation(w)
    return (lambda y: np.asarray(w(y), dtype=float) - mean), float(w(np.array([0.0]))[0] - mean)


def butterfly_observable(theta):
    theta = np.asarray(theta)
    return np.stack([np.cos(3.0 * theta), np.cos(5.0 * theta)], axis=-1)


@dataclass(frozen=True)
class FastSlowConfig:
    """``driver`` is a ``PMMap`` or a ``BilliardTable``; ``v`` maps fast
    states to ``R^d`` (PM: ``y``; billiard: ``theta``)."""

    n: int
    alpha: float
    vf: VectorField
    xi: tuple
    driver: object
    v: Callable
    M: int = 1
    seed: int = 0
    burn_in: int = 10_000

    def __post_init__(self):
        if self.n < 1 or self.M < 1:
            raise ParameterError("n and M must be positive")
        if not 1.0 < self.alpha < 2.0:
            raise ParameterError("alpha must lie in (1, 2)")
        object.__setattr__(self, "xi", tuple(np.atleast_1d(np.asarray(self.xi, dtype=float))))


def _initial_states(cfg: FastSlowConfig, m):
    rng = make_rng(cfg.seed, _FAST)
    if isinstance(cfg.driver, PMMap):
        return pm_stationary(cfg.driver, m, rng, cfg.burn_in)
    # the billiard's invariant measure is sampled exactly, no burn-in needed
    r, th = cfg.driver.sample_invariant(m, rng)
    return np.column_stack([r, th])


def _fast_values(cfg: FastSlowConfig, y0):
    """Observable along each member's orbit, shape ``(n, M, d)``."""
    if isinstance(cfg.driver, PMMap):
        orb, _ = pm_orbit_batch(cfg.driver, y0, cfg.n)
        vals = np.asarray(cfg.v(orb), dtype=float)
    else:
        tb = cfg.driver
        piece, q = tb.to_param(y0[:, 0])
        cols = []
        for j in range(y0.shape[0]):
            _, _, th, st = _run(int(piece[j]), float(q[j]), float(y0[j, 1]), cfg.n - 1, *tb._args())
            cols.append(th)
        vals = np.asarray(cfg.v(np.stack(cols, axis=1)), dtype=float)
    if vals.ndim == 2:
        vals = vals[..., None]
    return vals


def _recursion(cfg: FastSlowConfig, vals, keep_path):
    n = cfg.n
    dt = 1.0 / n
    c = scaling(n, cfg.alpha)
    x = np.tile(np.asarray(cfg.xi), (vals.shape[1], 1))
    path = [x.copy()] if keep_path else None
    for k in range(n):
        x = x + dt * cfg.vf.A(x) + c * np.einsum("mij,mj->mi", cfg.vf.B(x), vals[k])
        if not np.all(np.isfinite(x)) or np.abs(x).max() > 1e12:
            raise DivergenceError(f"slow state blew up at step {k}")
        if keep_path:
            path.append(x.copy())
    return x, path


def fastslow_run(cfg: FastSlowConfig, member=0) -> CadlagPath:
    """``X_n`` for one ensemble member as a STEP path with ``n + 1`` points."""
    y0 = _initial_states(cfg, member + 1)[member:member + 1]
    vals = _fast_values(cfg, y0)
    _, path = _recursion(cfg, vals, keep_path=True)
    return CadlagPath(np.arange(cfg.n + 1) / cfg.n, np.array([p[0] for p in path]), STEP)


def fastslow_endpoints(cfg: FastSlowConfig, chunk=500) -> np.ndarray:
    """``X_n(1)`` for all ``M`` members, shape ``(M, m)``."""
    y0 = _initial_states(cfg, cfg.M)
    out = []
    for s in range(0, cfg.M, chunk):
        vals = _fast_values(cfg, y0[s:s + chunk])
        out.append(_recursion(cfg, vals, keep_path=False)[0])
    return np.vstack(out)


@dataclass(frozen=True)
class LimitModel:
    """``S(L^P)`` ingredients: stable law of the skeleton and the profiles."""

    spec: StableSpec
    profiles: ProfileSet

    @classmethod
    def for_pm(cls, pm: PMMap, v0, K=200):
        spec = StableSpec(pm.alpha, (1.0,), K=K, scale=pm.measure.stable_scale)
        return cls(spec, ProfileSet.linear(np.array([[v0]])))


def limit_endpoints(model: LimitModel, cfg: FastSlowConfig, method="decorated",
                    solve_cfg: SolveConfig | None = None) -> np.ndarray:
    """``M`` draws of ``X(1)`` for the limit equation.

    ``method='additive'`` is the closed form ``xi + Gamma L(1)`` for
    ``A = 0`` and constant ``B = I``; ``'decorated'`` and ``'marcus'`` solve
    the limit equation path by path.
    """
    if method == "additive":
        G = model.profiles.gamma
        L = sample_stable_endpoint(model.spec, cfg.M, cfg.seed, _LIMIT)
        return np.asarray(cfg.xi) + L @ G.T
    out = []
    for j in range(cfg.M):
        sk = sample_stable_skeleton(model.spec, cfg.seed, stream=1000 + j)
        phi = decorate_levy(sk, model.profiles)
        if method == "decorated":
            X = solve_decorated_ode(cfg.vf, cfg.xi, phi, cfg=solve_cfg)
            out.append(X.skeleton.values[-1])
        elif method == "marcus":
            out.append(_marcus_from_decorated(cfg.vf, cfg.xi, phi, solve_cfg).values[-1])
        else:
            raise ParameterError(f"unknown limit method {method!r}")
    return np.array(out)


def _marcus_from_decorated(vf, xi, phi: DecoratedPath, solve_cfg):
    """Marcus solution of the skeleton driver (excursions must be straight)."""
    sk = phi.skeleton
    jumps = [(float(sk.times[k]), sk.values[k] - sk.left[k]) for k in sk.jump_indices()]
    cont = CadlagPath(sk.times, sk.values - _jump_part(sk), sk.modes, left=sk.left - _jump_part(sk, left=True))
    return solve_marcus(vf, xi, jumps, cont, cfg=solve_cfg)


def _jump_part(sk: CadlagPath, left=False):
    dj = np.zeros_like(sk.values)
    ks = sk.jump_indices()
    dj[ks] = sk.values[ks] - sk.left[ks]
    cum = np.cumsum(dj, axis=0)
    if left:
        cum[ks] -= dj[ks]
    return cum


@dataclass
class CompareReport:
    deciles_dynamics: np.ndarray
    deciles_limit: np.ndarray
    max_gap: float
    ks: float
    M: int

    def to_json(self):
        return json.dumps({"deciles_dynamics": self.deciles_dynamics.tolist(),
                           "deciles_limit": self.deciles_limit.tolist(),
                           "max_gap": self.max_gap, "ks": self.ks, "M": self.M})

    def table(self):
        rows = ["decile   dynamics      limit"]
        for q, a, b in zip(range(1, 10), np.atleast_2d(self.deciles_dynamics.T).T,
                           np.atleast_2d(self.deciles_limit.T).T):
            rows.append(f"{q / 10:6.1f} " + " ".join(f"{x:10.5f}" for x in np.ravel(a))
                        + " " + " ".join(f"{x:10.5f}" for x in np.ravel(b)))
        rows.append(f"max gap {self.max_gap:.5f}  KS {self.ks:.5f}")
        return "\n".join(rows)


def compare_samples(a, b, functional=np.arctan, min_samples=500) -> CompareReport:
    a = np.atleast_2d(np.asarray(a, dtype=float).T).T
    b = np.atleast_2d(np.asarray(b, dtype=float).T).T
    if min(a.shape[0], b.shape[0]) < min_samples:
        raise StatisticsError(f"need at least {min_samples} samples per side",
                              int(min(a.shape[0], b.shape[0])))
    fa, fb = functional(a), functional(b)
    da, db = deciles(fa), deciles(fb)
    ks = max(ks_two_sample(fa[:, j], fb[:, j]) for j in range(fa.shape[1]))
    return CompareReport(da, db, float(np.abs(da - db).max()), ks, int(a.shape[0]))


def ensemble_compare(cfg: FastSlowConfig, model: LimitModel, functional=np.arctan,
                     method="additive", solve_cfg=None) -> CompareReport:
    """Deciles of ``functional(X_n(1))`` against ``functional(X(1))``."""
    if cfg.M < 500:
        raise StatisticsError("ensemble_compare needs M >= 500", cfg.M)
    dyn = fastslow_endpoints(cfg)
    lim = limit_endpoints(model, cfg, method, solve_cfg)
    return compare_samples(dyn, lim, functional)


def pvar_quantiles(cfg: FastSlowConfig, ns, p, q=0.95, n_boot=200):
    """``q``-quantile of ``|W_n|_p`` for each ``n`` with a bootstrap standard
    error; ``W_n`` is the ``B = I``, ``A = 0`` slow path of each member."""
    rng = make_rng(cfg.seed, 3)
    out = []
    for n in ns:
        c = FastSlowConfig(n=int(n), alpha=cfg.alpha, vf=cfg.vf, xi=cfg.xi, driver=cfg.driver,
                           v=cfg.v, M=cfg.M, seed=cfg.seed, burn_in=cfg.burn_in)
        y0 = _initial_states(c, c.M)
        vals = _fast_values(c, y0)
        incr = scaling(c.n, c.alpha) * vals
        pv = []
        for j in range(c.M):
            path = np.vstack([np.zeros((1, incr.shape[2])), np.cumsum(incr[:, j], axis=0)])
            pv.append(p_variation(CadlagPath(np.arange(c.n + 1) / c.n, path, STEP), p))
        pv = np.array(pv)
        boot = [np.quantile(rng.choice(pv, pv.size), q) for _ in range(n_boot)]
        out.append((int(n), float(np.quantile(pv, q)), float(np.std(boot))))
    return out
