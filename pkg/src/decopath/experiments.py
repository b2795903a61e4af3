"""Reproducible experiments behind the command line tool.

Each experiment takes a validated parameter dict, a seed and an output
directory, writes CSV/JSON artifacts and returns a small summary dict.
"""

from __future__ import annotations

import math
import os

import numpy as np
from scipy import integrate

from .decorated import Decoration, DecoratedPath, alpha_inf, linear_lift, restrict, trivial_lift
from .dynamics.billiard import BilliardTable, PhasePoint, billiard_orbit
from .dynamics.pm import PMMap, pm_orbit
from .dynamics.returns import ReturnStructure, birkhoff_wn, deepest_pair_gap, extract_profiles, observe, \
    return_stats
from .fastslow import FastSlowConfig, LimitModel, butterfly_observable, compare_samples, fastslow_endpoints, \
    limit_endpoints, pm_observable, pvar_quantiles
from .paths import LINEAR, STEP, CadlagPath, step_path
from .skorokhod import j1_dist
from .stats import make_rng
from .young import SolveConfig, VectorField, jump_driver, solve_decorated_ode, solve_marcus, solve_young_ode, \
    zero_drift

CSV_FMT = "%.9g"


# -- Example 1.1: a jump traversed along a curve h, B(x) = diag(1, x_1) ------

def example_field() -> VectorField:
    def B(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape + (2,))
        out[..., 0, 0] = 1.0
        out[..., 1, 1] = x[..., 0]
        return out
    return VectorField(zero_drift(2), B, 2, 2)


def butterfly_curve(s, end=(1.0, 1.0), amplitude=0.5, skew=0.3):
    """Figure-eight loop from 0 to ``end``; ``skew`` unbalances the lobes so
    the loop encloses non-zero signed area."""
    s = np.asarray(s, dtype=float)
    x = np.sin(2 * np.pi * s) + skew * (np.cos(4 * np.pi * s) - 1.0)
    y = np.sin(4 * np.pi * s)
    return np.stack([s * end[0] + amplitude * x, s * end[1] + amplitude * y], axis=-1)


def _butterfly_deriv(s, end=(1.0, 1.0), amplitude=0.5, skew=0.3):
    dx = 2 * np.pi * np.cos(2 * np.pi * s) - 4 * np.pi * skew * np.sin(4 * np.pi * s)
    dy = 4 * np.pi * np.cos(4 * np.pi * s)
    return np.stack([end[0] + amplitude * dx, end[1] + amplitude * dy], axis=-1)


# name -> (curve, derivative)
CURVES = {
    "diagonal": (lambda s: np.stack([s, s], axis=-1), lambda s: np.stack([np.ones_like(s)] * 2, axis=-1)),
    "parabola": (lambda s: np.stack([s, s ** 2], axis=-1), lambda s: np.stack([np.ones_like(s), 2 * s], axis=-1)),
    "butterfly": (butterfly_curve, _butterfly_deriv),
}


def curve_path(name, n_grid=4097) -> CadlagPath:
    s = np.linspace(0.0, 1.0, n_grid)
    return CadlagPath(s, CURVES[name][0](s), LINEAR)


def area_integral(name) -> float:
    """``int_0^1 h_1 h_2' ds`` by adaptive quadrature."""
    h, dh = CURVES[name]
    val, _ = integrate.quad(lambda s: float(h(np.array(s))[0] * dh(np.array(s))[1]), 0.0, 1.0,
                            epsabs=1e-13, epsrel=1e-13, limit=200)
    return float(val)


def prelimit_driver(name, n, n_grid=4097) -> CadlagPath:
    """0 before 1/2, then ``h`` played over ``[1/2, 1/2 + 1/n]``, then ``h(1)``."""
    s = np.linspace(0.0, 1.0, n_grid)
    h = CURVES[name][0](s)
    t = np.concatenate([[0.0], 0.5 + s / n, [1.0]])
    v = np.vstack([np.zeros((1, 2)), h, h[-1:]])
    return CadlagPath(t, v, LINEAR)


def jump_decorated(name, n_grid=4097) -> DecoratedPath:
    ex = curve_path(name, n_grid)
    sk = step_path([0.0, 0.5], [[0.0, 0.0], ex.values[-1]], domain=(0.0, 1.0))
    return DecoratedPath(sk, (Decoration(0.5, ex),))


def example_nonmarcus(params, seed, out):
    vf = example_field()
    cfg = SolveConfig(mesh=params["mesh"], tol=params["tol"])
    rows = []
    summary = {}
    for name in params["curves"]:
        oracle = area_integral(name)
        for n in params["n_values"]:
            X = solve_young_ode(vf, [0.0, 0.0], prelimit_driver(name, n, params["n_grid"]), cfg)
            rows.append((name, f"prelimit_n={n}", *X.values[-1]))
        Y = solve_decorated_ode(vf, [0.0, 0.0], jump_decorated(name, params["n_grid"]), cfg=cfg)
        rows.append((name, "decorated", *Y.skeleton.values[-1]))
        end = CURVES[name][0](np.array(1.0))
        M = solve_marcus(vf, [0.0, 0.0], [(0.5, end)], CadlagPath([0.0, 1.0], np.zeros((2, 2)), STEP), cfg)
        rows.append((name, "marcus", *M.values[-1]))
        T = solve_young_ode(vf, [0.0, 0.0], jump_decorated(name).skeleton, cfg)
        rows.append((name, "forward", *T.values[-1]))
        rows.append((name, "quadrature", float(end[0]), oracle))
        summary[name] = {"decorated": list(map(float, Y.skeleton.values[-1])), "quadrature": oracle,
                         "marcus": list(map(float, M.values[-1]))}
    write_rows(os.path.join(out, "example_nonmarcus.csv"), ["curve", "method", "x1", "x2"], rows)
    return summary


# -- Figure 2: Birkhoff sums of the cusp billiard ---------------------------

def billiard_run(params, seed):
    tb = BilliardTable(params["beta"], params["s_cut"])
    rng = make_rng(seed, 0)
    r0, th0 = tb.sample_invariant(1, rng)
    orbit = billiard_orbit(tb, PhasePoint(float(r0[0]), float(th0[0])), params["n"])
    return tb, orbit


def butterfly(params, seed, out):
    tb, orbit = billiard_run(params, seed)
    n = params["n"]
    theta = orbit.theta[:n]
    W = birkhoff_wn(theta, butterfly_observable, n, tb.alpha)
    rows = np.column_stack([W.times, W.values])
    write_array(os.path.join(out, "butterfly.csv"), ["t", "x", "y"], rows)
    rs = ReturnStructure.from_section(tb.in_section(orbit.piece[:n], orbit.param[:n]))
    vals = observe(theta, butterfly_observable)
    gap = deepest_pair_gap(vals, rs)
    summary = {"n": n, "alpha": tb.alpha, "deepest_pair_gap": gap,
               "deepest_returns": sorted(map(int, rs.times))[-2:]}
    try:
        prof = extract_profiles(vals, rs, params["depth"])
        write_array(os.path.join(out, "butterfly_profile.csv"), ["u", "x", "y"],
                    np.column_stack([prof.grid, prof.median]))
        summary["profile_residual"] = prof.residual
        summary["profile_count"] = int(prof.depths.size)
    except Exception as exc:  # too few deep excursions is reported, not fatal
        summary["profile_error"] = str(exc)
    return summary


# -- Marcus versus decorated with straight excursions ------------------------

def random_field(rng, m=2, d=2, scale=0.5) -> VectorField:
    """Smooth bounded field ``B(x) = B0 + B1 tanh(x)``, ``A(x) = a0 + a1 tanh(x)``."""
    B0 = rng.normal(0.0, scale, (m, d))
    B1 = rng.normal(0.0, scale, (m, d, m))
    a0 = rng.normal(0.0, scale, m)
    a1 = rng.normal(0.0, scale, (m, m))

    def A(x):
        return a0 + np.tanh(x) @ a1.T

    def B(x):
        return B0 + np.einsum("ijk,...k->...ij", B1, np.tanh(x))
    return VectorField(A, B, m, d)


def random_jump_path(rng, d=2, n_knots=4, n_jumps=(1, 4), scale=1.0) -> CadlagPath:
    """LINEAR random walk with a few superimposed jumps."""
    k = int(rng.integers(n_jumps[0], n_jumps[1] + 1))
    tc = np.sort(rng.uniform(0.05, 0.95, n_knots))
    jt = np.sort(rng.uniform(0.05, 0.95, k))
    t = np.union1d(np.concatenate([[0.0], tc, [1.0]]), jt)
    cont = np.cumsum(rng.normal(0.0, 0.3 * scale, (t.size, d)), axis=0)
    cont[0] = 0.0
    jumps = np.zeros((t.size, d))
    idx = np.searchsorted(t, jt)
    jumps[idx] = rng.normal(0.0, scale, (k, d))
    cum = np.cumsum(jumps, axis=0)
    values = cont + cum
    left = cont + cum - jumps
    return CadlagPath(t, values, LINEAR, left=left)


def marcus_pair(vf, xi, driver: CadlagPath, cfg):
    """Decorated solution of the linear lift and the Marcus solution."""
    Y = solve_decorated_ode(vf, xi, linear_lift(driver), cfg=cfg).skeleton
    ks = driver.jump_indices()
    jumps = [(float(driver.times[k]), driver.values[k] - driver.left[k]) for k in ks]
    dj = np.zeros_like(driver.values)
    dj[ks] = driver.values[ks] - driver.left[ks]
    cum = np.cumsum(dj, axis=0)
    cont = CadlagPath(driver.times, driver.values - cum, driver.modes, left=driver.left - (cum - dj))
    Z = solve_marcus(vf, xi, jumps, cont, cfg)
    return Y, Z


def sample_gap(Y: CadlagPath, Z: CadlagPath, times) -> float:
    """Largest gap of right values and left limits at the given times."""
    ry, ly = Y.knots(times)
    rz, lz = Z.knots(times)
    return float(max(np.abs(ry - rz).max(), np.abs(ly - lz).max()))


def marcus_check(params, seed, out):
    rng = make_rng(seed, 0)
    cfg = SolveConfig(mesh=params["mesh"], tol=params["tol"])
    rows = []
    if params.get("jumps") is not None:
        vf = random_field(rng)
        jl = [(float(t), np.asarray(dv, dtype=float)) for t, dv in params["jumps"]]
        base = CadlagPath([0.0, 0.5, 1.0], [[0.0, 0.0], [0.3, -0.2], [0.1, 0.4]], LINEAR)
        drv = jump_driver(jl, base)
        Y, Z = marcus_pair(vf, [0.0, 0.0], drv, cfg)
        rows.append(("explicit", len(jl), sample_gap(Y, Z, drv.times)))
    else:
        for i in range(params["n_drivers"]):
            vf = random_field(rng)
            drv = random_jump_path(rng)
            Y, Z = marcus_pair(vf, rng.normal(0.0, 0.5, 2), drv, cfg)
            rows.append((f"random_{i}", int(drv.jump_indices().size), sample_gap(Y, Z, drv.times)))
    vf = example_field()
    for name in ("diagonal", "butterfly"):
        Y = solve_decorated_ode(vf, [0.0, 0.0], jump_decorated(name, params["n_grid"]), cfg=cfg).skeleton
        end = CURVES[name][0](np.array(1.0))
        Z = solve_marcus(vf, [0.0, 0.0], [(0.5, end)], CadlagPath([0.0, 1.0], np.zeros((2, 2)), STEP), cfg)
        rows.append((f"example_{name}", 1, sample_gap(Y, Z, np.array([0.0, 0.5, 1.0]))))
    write_rows(os.path.join(out, "marcus_check.csv"), ["case", "jumps", "max_gap"], rows)
    return {"max_gap_linear": max(r[2] for r in rows if not r[0].startswith("example")),
            "gap_diagonal": rows[-2][2], "gap_butterfly": rows[-1][2]}


# -- metric properties --------------------------------------------------------

def random_simple_path(rng, n=None, d=1) -> CadlagPath:
    """Random STEP or LINEAR path on [0, 1] with a handful of knots."""
    n = int(rng.integers(2, 7)) if n is None else n
    t = np.concatenate([[0.0], np.sort(rng.uniform(0.02, 0.98, n - 1)), [1.0]])
    v = rng.normal(0.0, 1.0, (t.size, d))
    return CadlagPath(t, v, STEP if rng.random() < 0.5 else LINEAR)


def metric_properties(rng, n_pairs, delta=0.01):
    """Counts of violations of the metric properties on random pairs."""
    tol = 1e-9
    viol = {"lift_equals_j1": 0, "subinterval": 0, "stretch_bound": 0, "delta_stability": 0}
    worst = {k: -math.inf for k in viol}
    for _ in range(n_pairs):
        h1, h2 = random_simple_path(rng), random_simple_path(rng)
        a = alpha_inf(trivial_lift(h1), trivial_lift(h2), delta).value
        s = j1_dist(h1, h2).value
        e = abs(a - s) - 2 * delta
        worst["lift_equals_j1"] = max(worst["lift_equals_j1"], e)
        viol["lift_equals_j1"] += e > tol
        p1, p2 = linear_lift(h1), linear_lift(h2)
        c = float(rng.uniform(0.1, 0.9))
        whole = alpha_inf(p1, p2, delta).value
        left = alpha_inf(restrict(p1, 0.0, c), restrict(p2, 0.0, c), delta).value
        right = alpha_inf(restrict(p1, c, 1.0, keep_start=False), restrict(p2, c, 1.0, keep_start=False),
                          delta).value
        e = whole - max(left, right) - 4 * delta
        worst["subinterval"] = max(worst["subinterval"], e)
        viol["subinterval"] += e > tol
        phi, h = stretched_pair(rng)
        e = alpha_inf(phi, trivial_lift(h), delta).value - (h.b - h.a) - 2 * delta
        worst["stretch_bound"] = max(worst["stretch_bound"], e)
        viol["stretch_bound"] += e > tol
        a1 = alpha_inf(p1, p2, delta).value
        a2 = alpha_inf(p1, p2, 2 * delta).value
        e = abs(a2 - a1) - 2 * delta
        worst["delta_stability"] = max(worst["delta_stability"], e)
        viol["delta_stability"] += e > tol
    return viol, worst


def stretched_pair(rng, a=0.0, b=None):
    """``phi`` constant on ``[a, b)`` with a random excursion at ``b``, and
    ``h`` the excursion stretched over ``[a, b]``."""
    b = float(rng.uniform(0.2, 1.0)) if b is None else b
    n = int(rng.integers(3, 8))
    s = np.concatenate([[0.0], np.sort(rng.uniform(0.05, 0.95, n - 2)), [1.0]])
    vals = rng.normal(0.0, 1.0, (n, 1))
    vals[0] = 0.0
    ex = CadlagPath(s, vals, LINEAR)
    sk = CadlagPath([a, b], [[0.0], vals[-1]], STEP)
    phi = DecoratedPath(sk, (Decoration(b, ex),))
    h = ex.retime(a, b)
    return phi, h


def metrics_suite(params, seed, out):
    rng = make_rng(seed, 0)
    viol, worst = metric_properties(rng, params["n_pairs"], params["delta"])
    rows = [(k, params["n_pairs"], viol[k], worst[k]) for k in viol]
    write_rows(os.path.join(out, "metrics_suite.csv"), ["property", "cases", "violations", "worst_excess"], rows)
    return {"violations": {k: int(v) for k, v in viol.items()}}


# -- tails and fast-slow ----------------------------------------------------

def tails(params, seed, out):
    rows = []
    summary = {}
    if "pm" in params["systems"]:
        pm = PMMap(params["gamma"])
        y = pm_orbit(pm, float(make_rng(seed, 0).uniform(0.0, 1.0)), params["n_steps"])
        st = return_stats(ReturnStructure.from_section(y >= 0.5), alpha=pm.alpha)
        rows += _stat_rows("pm", pm.alpha, st)
        summary["pm"] = st["overall"].alpha
    if "billiard" in params["systems"]:
        tb, orbit = billiard_run({"beta": params["beta"], "s_cut": params["s_cut"],
                                  "n": params["n_steps"]}, seed)
        st = return_stats(ReturnStructure.from_section(tb.in_section(orbit.piece, orbit.param)),
                          alpha=tb.alpha)
        rows += _stat_rows("billiard", tb.alpha, st)
        summary["billiard"] = st["overall"].alpha
    write_rows(os.path.join(out, "tails.csv"), ["system", "quantity", "value", "target"], rows)
    return summary


def _stat_rows(name, alpha, st):
    rows = [(name, "returns", st["returns"], float("nan"))]
    for key in ("overall", "label_0", "label_1"):
        if key in st:
            rows.append((name, f"hill_{key}", st[key].alpha, alpha))
    for lag, val in st["clustering"].items():
        rows.append((name, f"clustering_{lag}", val, float("nan")))
    return rows


def unit_field():
    return VectorField(zero_drift(1), lambda x: np.ones(np.shape(x) + (1,)), 1, 1)


def fastslow_compare(params, seed, out):
    pm = PMMap(params["gamma"])
    v, v0 = pm_observable(pm)
    cfg = FastSlowConfig(n=params["n"], alpha=pm.alpha, vf=unit_field(), xi=(0.0,), driver=pm, v=v,
                         M=params["M"], seed=seed, burn_in=params["burn_in"])
    dyn = fastslow_endpoints(cfg)
    lim = limit_endpoints(LimitModel.for_pm(pm, v0, K=params["K"]), cfg, "additive")
    rep = compare_samples(dyn, lim, np.arctan)
    write_array(os.path.join(out, "fastslow_endpoints.csv"), ["member", "dynamics", "limit"],
                np.column_stack([np.arange(cfg.M), dyn[:, 0], lim[:, 0]]))
    with open(os.path.join(out, "fastslow_compare.json"), "w", encoding="utf-8") as fh:
        fh.write(rep.to_json())
    with open(os.path.join(out, "fastslow_compare.txt"), "w", encoding="utf-8") as fh:
        fh.write(rep.table() + "\n")
    summary = {"max_gap": rep.max_gap, "ks": rep.ks}
    if params.get("tightness_ns"):
        tcfg = FastSlowConfig(n=10, alpha=pm.alpha, vf=unit_field(), xi=(0.0,), driver=pm, v=v,
                              M=params["tightness_M"], seed=seed, burn_in=params["burn_in"])
        q = pvar_quantiles(tcfg, params["tightness_ns"], pm.alpha + 0.3)
        write_rows(os.path.join(out, "tightness.csv"), ["n", "q95", "stderr"], q)
        summary["tightness"] = q
    return summary


# -- output helpers -------------------------------------------------------

def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return CSV_FMT % x
    return str(x)


def write_rows(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join(_fmt(x) for x in r) + "\n")


def write_array(path, header, arr):
    np.savetxt(path, np.asarray(arr, dtype=float), fmt=CSV_FMT, delimiter=",",
               header=",".join(header), comments="")


EXPERIMENTS = {
    "example-nonmarcus": example_nonmarcus,
    "butterfly": butterfly,
    "marcus-check": marcus_check,
    "metrics-suite": metrics_suite,
    "tails": tails,
    "fastslow-compare": fastslow_compare,
}
