"""Young integrals and ODEs driven by sampled cadlag paths.

The drift is integrated against a scalar clock path (the identity by default,
``tau_inv`` on an extension) and the noise against the driver.  Affine cells
are integrated with classical RK4 substeps; jumps use either the forward rule
``X+ = X- + B(X-) dW`` or the Marcus rule (time-1 flow of ``B(.) dW``).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .decorated import DecoratedPath, collapse, delta_extension
from .errors import AccuracyError, DivergenceError, ParameterError, ShapeError
from .paths import LINEAR, STEP, CadlagPath, linear_path


@dataclass(frozen=True)
class VectorField:
    """``dX = A(X) dt + B(X) dW`` with ``A: R^m -> R^m`` and ``B: R^m -> R^{m x d}``.

    Both callables take arrays of shape ``(..., m)``.  ``lipschitz`` is a
    rough bound used only for reporting.
    """

    drift: Callable
    noise: Callable
    m: int
    d: int
    lipschitz: float = 1.0

    def A(self, x):
        return np.asarray(self.drift(x), dtype=float)

    def B(self, x):
        return np.asarray(self.noise(x), dtype=float)

    def rhs(self, x, dc, dw):
        return self.A(x) * dc + np.einsum("...ij,j->...i", self.B(x), dw)


def zero_drift(m):
    return lambda x: np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class SolveConfig:
    mesh: float = 0.01
    tol: float = 1e-9
    max_refinements: int = 12
    blowup: float = 1e12
    method: str = "rk4"
    refine: bool = True

    def __post_init__(self):
        if not self.mesh > 0 or not self.tol > 0:
            raise ParameterError("mesh and tol must be positive")
        if self.method not in ("rk4", "euler"):
            raise ParameterError(f"unknown method {self.method!r}")


@dataclass
class SolveInfo:
    refinements: int = 0
    mesh: float = 0.0
    endpoint_change: float = 0.0
    substeps: int = 0
    jumps: int = 0

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def _check_state(x, bound):
    n = float(np.max(np.abs(x)))
    if not math.isfinite(n) or n > bound:
        raise DivergenceError(f"solution norm {n:.3g} exceeds blow-up bound {bound:.3g}")


def _step(vf, x, dc, dw, method):
    if method == "euler":
        return x + vf.rhs(x, dc, dw)
    k1 = vf.rhs(x, dc, dw)
    k2 = vf.rhs(x + 0.5 * k1, dc, dw)
    k3 = vf.rhs(x + 0.5 * k2, dc, dw)
    k4 = vf.rhs(x + k3, dc, dw)
    return x + (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0


def _flow(vf, x, dc, dw, n, method, bound):
    for _ in range(n):
        x = _step(vf, x, dc / n, dw / n, method)
    _check_state(x, bound)
    return x


def marcus_flow(vf, x, dw, cfg, dc=0.0):
    """Time-1 flow of ``Z' = A(Z) dc + B(Z) dw`` refined until ``tol``."""
    size = abs(dc) + float(np.linalg.norm(dw))
    n = max(4, int(math.ceil(size / cfg.mesh)))
    prev = _flow(vf, x, dc, dw, n, "rk4", cfg.blowup)
    for _ in range(cfg.max_refinements):
        n *= 2
        cur = _flow(vf, x, dc, dw, n, "rk4", cfg.blowup)
        if np.max(np.abs(cur - prev)) < cfg.tol:
            return cur
        prev = cur
    raise AccuracyError("Marcus jump flow did not converge")


def _integrate(vf, xi, u, rc, lc, rw, lw, mesh, cfg, jump_rule):
    x = np.array(xi, dtype=float)
    ts, vs, ls, ms = [u[0]], [x.copy()], [x.copy()], []
    info = SolveInfo(mesh=mesh)
    for k in range(u.size - 1):
        dc = float(lc[k + 1, 0] - rc[k, 0])
        dw = lw[k + 1] - rw[k]
        size = abs(dc) + float(np.linalg.norm(dw))
        t0, t1 = u[k], u[k + 1]
        if size > 0.0:
            n = max(1, int(math.ceil(size / mesh)))
            info.substeps += n
            for i in range(1, n + 1):
                x = _step(vf, x, dc / n, dw / n, cfg.method)
                if i < n:
                    ti = t0 + (t1 - t0) * i / n
                    if ti <= ts[-1]:
                        continue
                    ts.append(ti)
                    vs.append(x.copy())
                    ls.append(x.copy())
                    ms.append(LINEAR)
            _check_state(x, cfg.blowup)
            mode = LINEAR
        else:
            mode = STEP
        left = x.copy()
        jc = float(rc[k + 1, 0] - lc[k + 1, 0])
        jw = rw[k + 1] - lw[k + 1]
        if jc != 0.0 or np.any(jw != 0.0):
            info.jumps += 1
            if jump_rule == "forward":
                x = x + vf.rhs(x, jc, jw)
            else:
                x = marcus_flow(vf, x, jw, cfg, dc=jc)
            _check_state(x, cfg.blowup)
        ts.append(t1)
        vs.append(x.copy())
        ls.append(left)
        ms.append(mode)
    return CadlagPath(np.array(ts), np.array(vs), np.array(ms, dtype=np.int8), left=np.array(ls)), info


def _prepare(driver, clock, vf, xi):
    if clock is None:
        clock = linear_path(driver.a, driver.b, driver.a, driver.b)
    if clock.domain != driver.domain:
        raise ShapeError("clock and driver domains differ")
    if clock.dim != 1:
        raise ShapeError("clock must be scalar")
    if driver.dim != vf.d:
        raise ShapeError(f"driver dimension {driver.dim} differs from vector field d={vf.d}")
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if xi.shape != (vf.m,):
        raise ShapeError(f"initial state shape {xi.shape} differs from m={vf.m}")
    u = np.union1d(driver.times, clock.times)
    rw, lw = driver.knots(u)
    rc, lc = clock.knots(u)
    moving = np.any(lc[1:, 0] != rc[:-1, 0]) or np.any(lw[1:] != rw[:-1])
    return xi, u, rc, lc, rw, lw, moving


def _solve(vf, xi, driver, cfg, clock, jump_rule, return_info):
    cfg = cfg or SolveConfig()
    xi, u, rc, lc, rw, lw, moving = _prepare(driver, clock, vf, xi)
    mesh = cfg.mesh
    path, info = _integrate(vf, xi, u, rc, lc, rw, lw, mesh, cfg, jump_rule)
    if moving and cfg.refine:
        for r in range(1, cfg.max_refinements + 1):
            mesh *= 0.5
            new, ninfo = _integrate(vf, xi, u, rc, lc, rw, lw, mesh, cfg, jump_rule)
            change = float(np.max(np.abs(new.values[-1] - path.values[-1])))
            path, info = new, ninfo
            info.refinements = r
            info.endpoint_change = change
            if change < cfg.tol:
                break
        else:
            raise AccuracyError(f"endpoint change {change:.3g} above tol after "
                                f"{cfg.max_refinements} mesh halvings")
    return (path, info) if return_info else path


def solve_young_ode(vf: VectorField, xi, driver: CadlagPath, cfg: SolveConfig | None = None,
                    clock: CadlagPath | None = None, return_info=False):
    """Solve ``dX = A(X) dC + B(X) dW`` with forward jumps.

    ``clock`` defaults to the identity time.  The output grid contains the
    driver grid plus RK4 substep points.
    """
    return _solve(vf, xi, driver, cfg, clock, "forward", return_info)


def solve_decorated_ode(vf: VectorField, xi, phi: DecoratedPath, delta=1.0,
                        cfg: SolveConfig | None = None, return_extension=False):
    """Insert, solve, collapse.

    The driver is the delta-extension of ``phi``; the clock is ``tau_inv``,
    which is frozen on fictitious intervals, so the drift is off while an
    excursion is played out.
    """
    ext = delta_extension(phi, delta)
    sol = solve_young_ode(vf, xi, ext.extended, cfg, clock=ext.clock_path())
    solved = ext.with_path(sol)
    out = collapse(solved)
    return (out, solved) if return_extension else out


def jump_driver(jumps, continuous: CadlagPath) -> CadlagPath:
    """``continuous + sum of jumps`` as one cadlag path."""
    if not jumps:
        return continuous
    jt = np.array([float(t) for t, _ in jumps])
    if np.any(np.diff(np.sort(jt)) == 0):
        raise ParameterError("jump times must be distinct")
    if jt.min() <= continuous.a or jt.max() > continuous.b:
        raise ParameterError("jump times must lie in (a, b]")
    order = np.argsort(jt)
    jt = jt[order]
    dv = np.array([np.atleast_1d(np.asarray(d, dtype=float)) for _, d in jumps])[order]
    if dv.shape[1] != continuous.dim:
        raise ShapeError("jump dimension differs from the continuous driver")
    g = np.union1d(continuous.times, jt)
    r, l = continuous.knots(g)
    c = continuous.refine(g)
    cum = np.vstack([np.zeros((1, dv.shape[1])), np.cumsum(dv, axis=0)])
    after = cum[np.searchsorted(jt, g, side="right")]
    before = cum[np.searchsorted(jt, g, side="left")]
    modes = np.where(np.any(l[1:] != r[:-1], axis=1), LINEAR, STEP).astype(np.int8)
    modes = np.where(c.modes == LINEAR, LINEAR, modes)
    vals = r + after
    lefts = l + before
    step = modes == STEP
    lefts[1:][step] = vals[:-1][step]
    return CadlagPath(g, vals, modes, left=lefts)


def solve_marcus(vf: VectorField, xi, jumps, drift_driver: CadlagPath,
                 cfg: SolveConfig | None = None, return_info=False):
    """Marcus solution: continuous part by RK4, each jump by the time-1 flow
    of ``dZ/ds = B(Z) dW`` from the pre-jump state."""
    driver = jump_driver(list(jumps), drift_driver)
    return _solve(vf, xi, driver, cfg, None, "marcus", return_info)


def young_integral(Y: CadlagPath, W: CadlagPath, tol=1e-10, max_refinements=20, closed_form=True):
    """``int Y dW`` with the left-point (forward) convention.

    On the union grid both paths are affine on every cell, so the limit of
    left-point sums is ``(Y_k + Y_{k+1}-) / 2 . dW`` per cell plus
    ``Y(t-) . jump W`` at jump times.  With ``closed_form=False`` left-point
    sums on uniformly refined grids are iterated until they settle.
    """
    if Y.domain != W.domain:
        raise ShapeError("integrand and integrator domains differ")
    if Y.dim not in (1, W.dim):
        raise ShapeError("integrand must be scalar or match the integrator dimension")
    u = np.union1d(Y.times, W.times)
    ry, ly = Y.knots(u)
    rw, lw = W.knots(u)

    def contract(y, w):
        return (y * w).sum(axis=-1) if Y.dim == W.dim else y[..., 0] * w.sum(axis=-1)

    if closed_form:
        cell = contract(0.5 * (ry[:-1] + ly[1:]), lw[1:] - rw[:-1]).sum()
        jump = contract(ly[1:], rw[1:] - lw[1:]).sum()
        return float(cell + jump)
    prev = None
    for r in range(max_refinements + 1):
        m = 2 ** r
        fr = np.arange(m) / m
        g = (u[:-1, None] + (u[1:] - u[:-1])[:, None] * fr[None, :]).ravel()
        g = np.append(g, u[-1])
        yr, _ = Y.knots(g)
        wr, _ = W.knots(g)
        val = float(contract(yr[:-1], wr[1:] - wr[:-1]).sum())
        if prev is not None and abs(val - prev) < tol:
            return val
        prev = val
    raise AccuracyError("left-point sums did not settle")
