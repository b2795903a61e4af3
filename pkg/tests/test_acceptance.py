"""The nine acceptance criteria, each at its stated tolerance and time budget.

Every test records one PASS/FAIL line that pytest prints in its summary.
"""

import csv
import itertools
import math
import time

import numpy as np
from scipy import stats as sps

from decopath.cli import default_config, load_config, run_experiment
from decopath.decorated import alpha_inf, alpha_pvar, linear_lift, pvar_decorated, trivial_lift
from decopath.dynamics.billiard import BilliardTable, PhasePoint, billiard_orbit, billiard_push
from decopath.dynamics.returns import ReturnStructure
from decopath.experiments import (CURVES, area_integral, example_field, jump_decorated, marcus_pair,
                                  metric_properties, prelimit_driver, random_field, random_jump_path,
                                  random_simple_path, sample_gap)
from decopath.levy import StableSpec, sample_jumps, sample_stable_endpoint, stable_char_fn
from decopath.paths import LINEAR, STEP, CadlagPath, interleaved_points, step_path
from decopath.pvar import p_variation
from decopath.stats import hill, make_rng
from decopath.young import SolveConfig, VectorField, solve_decorated_ode, solve_marcus, solve_young_ode, \
    zero_drift


def _finish(record, n, checks, t0, budget):
    dt = time.perf_counter() - t0
    checks = dict(checks, runtime=(dt < budget, f"{dt:.1f}s < {budget}s"))
    ok = all(c[0] for c in checks.values())
    detail = "; ".join(f"{k} {v[1]}" for k, v in checks.items())
    record(n, ok, detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def test_criterion_1_nonmarcus_example(record):
    t0 = time.perf_counter()
    vf = example_field()
    cfg = SolveConfig()
    checks = {}
    for name, exact in (("parabola", 2.0 / 3.0), ("diagonal", 0.5)):
        quad = area_integral(name)
        ends = {n: solve_young_ode(vf, [0.0, 0.0], prelimit_driver(name, n, 1025), cfg).values[-1]
                for n in (100, 1000, 10_000)}
        err = abs(ends[10_000][1] - exact)
        checks[f"{name} n=1e4"] = (err < 1e-3 and abs(quad - exact) < 1e-10 and abs(ends[10_000][0] - 1) < 1e-9,
                                   f"x2={ends[10_000][1]:.7f} err={err:.1e}")
    M = solve_marcus(vf, [0.0, 0.0], [(0.5, np.array([1.0, 1.0]))],
                     CadlagPath([0.0, 1.0], np.zeros((2, 2)), STEP), cfg).values[-1]
    checks["marcus (s,s)"] = (abs(M[1] - 0.5) < 1e-3, f"x2={M[1]:.7f}")
    _finish(record, 1, checks, t0, 10)


def test_criterion_2_marcus_equivalence(record):
    t0 = time.perf_counter()
    rng = make_rng(2024, 0)
    cfg = SolveConfig()
    gaps = []
    for _ in range(100):
        vf = random_field(rng)
        drv = random_jump_path(rng)
        Y, Z = marcus_pair(vf, rng.normal(0.0, 0.5, 2), drv, cfg)
        gaps.append(sample_gap(Y, Z, drv.times))
    worst = max(gaps)
    vf = example_field()
    Y = solve_decorated_ode(vf, [0.0, 0.0], jump_decorated("butterfly", 2049), cfg=cfg).skeleton
    end = CURVES["butterfly"][0](np.array(1.0))
    Z = solve_marcus(vf, [0.0, 0.0], [(0.5, end)], CadlagPath([0.0, 1.0], np.zeros((2, 2)), STEP), cfg)
    jump_gap = float(np.abs(Y.eval(0.5) - Z.eval(0.5)).max())
    # the decorated value is the quadrature of h1 h2', the Marcus one is 1/2
    oracle_gap = abs(area_integral("butterfly") - 0.5)
    checks = {
        "linear profiles": (worst < 1e-6, f"max gap {worst:.1e} over 100 drivers"),
        "butterfly": (jump_gap > 0.01 and abs(jump_gap - oracle_gap) < 1e-4,
                      f"gap at jump {jump_gap:.4f} (quadrature {oracle_gap:.4f})"),
    }
    _finish(record, 2, checks, t0, 60)


def test_criterion_3_metric_properties(record):
    t0 = time.perf_counter()
    viol, worst = metric_properties(make_rng(3, 0), 500, delta=0.01)
    checks = {k: (viol[k] == 0, f"{viol[k]} violations (worst excess {worst[k]:.1e})") for k in viol}
    _finish(record, 3, checks, t0, 120)


def _brute_pvar(points, p):
    n = points.shape[0]
    best = 0.0
    for r in range(n - 1):
        for inner in itertools.combinations(range(1, n - 1), r):
            idx = (0,) + inner + (n - 1,)
            s = 0.0
            for i, j in zip(idx[:-1], idx[1:]):
                d = 0.0
                for c in range(points.shape[1]):
                    e = points[i, c] - points[j, c]
                    d += e * e
                s += math.sqrt(d) ** p
            best = max(best, s)
    return best ** (1.0 / p)


def _small_path(rng):
    d = int(rng.integers(1, 3))
    if rng.random() < 0.5:
        n = int(rng.integers(2, 13))
        t = np.linspace(0.0, 1.0, n)
        return CadlagPath(t, rng.normal(0.0, 1.0, (n, d)), LINEAR)
    n = int(rng.integers(2, 7))
    return step_path(np.linspace(0.0, 1.0, n + 1)[:-1], rng.normal(0.0, 1.0, (n, d)), domain=(0.0, 1.0))


def test_criterion_4_pvar_exact_and_interpolation(record):
    t0 = time.perf_counter()
    rng = make_rng(4, 0)
    mismatch = 0
    worst_rel = 0.0
    for _ in range(200):
        h = _small_path(rng)
        pts = interleaved_points(h)
        assert pts.shape[0] <= 12
        for p in (1.3, 2.0, 2.7, 4.0):
            a, b = p_variation(h, p), _brute_pvar(pts, p)
            if a != b:
                mismatch += 1
                worst_rel = max(worst_rel, abs(a - b) / b)
    interp_bad = 0
    for _ in range(200):
        h = random_simple_path(rng, n=int(rng.integers(3, 30)), d=int(rng.integers(1, 3)))
        p = float(rng.uniform(1.0, 3.0))
        q = p + float(rng.uniform(0.1, 3.0))
        lhs = p_variation(h, q)
        rhs = p_variation(h, math.inf) ** (1 - p / q) * p_variation(h, p) ** (p / q)
        interp_bad += lhs > rhs * (1 + 1e-12)
    lemma_bad = 0
    worst_ratio = 0.0
    for _ in range(200):
        lift = linear_lift if rng.random() < 0.5 else trivial_lift
        f1, f2 = lift(random_simple_path(rng)), lift(random_simple_path(rng))
        p, q = 1.5, 3.0
        A = alpha_inf(f1, f2, 0.01).value
        Q = alpha_pvar(f1, f2, q, 0.01, resolution=9).value
        X = pvar_decorated(f1, p) + pvar_decorated(f2, p)
        bound = (1 + X ** (p / q)) * (A ** (1 - p / q) + A)
        worst_ratio = max(worst_ratio, Q / bound if bound > 0 else 0.0)
        lemma_bad += Q > bound * (1 + 1e-12)
    checks = {
        "exhaustive": (mismatch == 0, f"{mismatch} mismatches of 800 (worst rel {worst_rel:.1e})"),
        "interpolation": (interp_bad == 0, f"{interp_bad} violations of 200"),
        "q-var bound": (lemma_bad == 0, f"{lemma_bad} violations of 200 (max ratio {worst_ratio:.3f})"),
    }
    _finish(record, 4, checks, t0, 60)


def _scalar_linear_field():
    return VectorField(zero_drift(1), lambda x: np.asarray(x)[..., None], 1, 1)


def test_criterion_5_young_solver(record):
    t0 = time.perf_counter()
    vf = _scalar_linear_field()
    W = CadlagPath([0.0, 1.0], [[0.0], [1.0]], LINEAR)
    e_err = abs(solve_young_ode(vf, [1.0], W).values[-1, 0] - math.e)
    rng = make_rng(5, 0)
    exact = True
    for _ in range(20):
        n = int(rng.integers(2, 10))
        vals = np.cumsum(rng.normal(0.0, 0.5, (n, 1)), axis=0)
        drv = step_path(np.linspace(0.0, 1.0, n + 1)[:-1], vals, domain=(0.0, 1.0))
        x = 1.0
        for k in range(1, n):
            x = x + x * (vals[k, 0] - vals[k - 1, 0])
        exact &= solve_young_ode(vf, [1.0], drv).values[-1, 0] == x
    errs = []
    for mesh in (0.5, 0.25, 0.125):
        X = solve_young_ode(vf, [1.0], W, SolveConfig(mesh=mesh, refine=False)).values[-1, 0]
        errs.append(abs(X - math.e))
    order = min(math.log2(errs[0] / errs[1]), math.log2(errs[1] / errs[2]))
    checks = {
        "X(1)=e": (e_err < 1e-6, f"err {e_err:.1e}"),
        "forward jumps": (exact, "exact" if exact else "mismatch"),
        "rk4 order": (order >= 3.8, f"{order:.2f}"),
    }
    _finish(record, 5, checks, t0, 5)


def test_criterion_6_levy_sampler(record):
    t0 = time.perf_counter()
    jumps = sample_jumps(StableSpec(1.5, K=100_000), seed=6)
    h = hill(jumps.sizes, k=10_000)
    spec = StableSpec(1.5, (0.5, 0.5), K=64)
    X = sample_stable_endpoint(spec, 100_000, seed=6)
    worst_z = 0.0
    for s in ([0.3, 0.0], [0.0, 0.7], [0.5, -0.5], [-1.0, 0.4], [1.2, 1.2]):
        arg = X @ np.asarray(s)
        c, sn = np.cos(arg), np.sin(arg)
        phi = stable_char_fn(spec, s)
        se_c, se_s = c.std() / math.sqrt(arg.size), sn.std() / math.sqrt(arg.size)
        worst_z = max(worst_z, abs(c.mean() - phi.real) / se_c, abs(sn.mean() - phi.imag) / se_s)
    w = (0.2, 0.3, 0.5)
    ax = sample_jumps(StableSpec(1.5, w, K=100_000), seed=7).axes
    counts = np.bincount(ax, minlength=3)
    z_axes = max(abs(counts[i] - 1e5 * w[i]) / math.sqrt(1e5 * w[i] * (1 - w[i])) for i in range(3))
    checks = {
        "hill": (abs(h.alpha - 1.5) < 0.1, f"{h.alpha:.3f}"),
        "char fn": (worst_z < 3, f"max |z| {worst_z:.2f}"),
        "axis counts": (z_axes < 3, f"max |z| {z_axes:.2f}"),
    }
    _finish(record, 6, checks, t0, 30)


def test_criterion_7_billiard(record):
    t0 = time.perf_counter()
    tb = BilliardTable(3.0)
    rng = make_rng(7, 0)
    r, th = tb.sample_invariant(1_000_000, rng)
    r3, th3, ok = billiard_push(tb, r, th, 3)
    H, _, _ = np.histogram2d(r3[ok], np.sin(th3[ok]), bins=20, range=[[0, tb.perimeter], [-1, 1]])
    pval = sps.chisquare(H.ravel()).pvalue
    r1, th1, ok1 = billiard_push(tb, r[:1000], th[:1000], 1)
    r2, th2, ok2 = billiard_push(tb, r1, -th1, 1)
    rev = float(max(np.abs(r2 - r[:1000]).max(), np.abs(th2 + th[:1000]).max()))
    p0 = PhasePoint(float(r[0]), float(th[0]))
    orbit = billiard_orbit(tb, p0, 10_000_000)
    rs = ReturnStructure.from_section(tb.in_section(orbit.piece, orbit.param))
    h = hill(rs.times)
    checks = {
        "chi2": (pval > 0.01 and ok.all(), f"p={pval:.3f}"),
        "reversal": (rev < 1e-9 and ok1.all() and ok2.all(), f"err {rev:.1e}"),
        "return hill": (abs(h.alpha - 1.5) < 0.15, f"{h.alpha:.3f} (k={h.k})"),
    }
    _finish(record, 7, checks, t0, 300)


def test_criterion_8_butterfly_collapse(record, tmp_path):
    t0 = time.perf_counter()
    status, man = run_experiment(load_config("butterfly", out=str(tmp_path)))
    with open(tmp_path / "butterfly.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    gap = man["summary"]["deepest_pair_gap"] if status == 0 else math.inf
    checks = {
        "schema": (rows[0] == ["t", "x", "y"] and len(rows) == 100_002, f"header {rows[0]}, {len(rows) - 1} rows"),
        "deepest pair": (gap < 0.1, f"gap {gap:.2e}"),
    }
    _finish(record, 8, checks, t0, 300)


def test_criterion_9_weak_convergence(record, tmp_path):
    t0 = time.perf_counter()
    cfg = load_config("fastslow-compare", out=str(tmp_path))
    assert cfg.seed == default_config("fastslow-compare")["seed"]
    status, man = run_experiment(cfg)
    s = man.get("summary", {})
    gap = s.get("max_gap", math.inf)
    q = [row[1] for row in s.get("tightness", [])]
    mono = len(q) == 3 and all(a >= b for a, b in zip(q[:-1], q[1:]))
    checks = {
        "decile gap": (status == 0 and gap < 0.1, f"{gap:.3f} (n=1e4, M=2000)"),
        "tightness": (mono, "q95 " + ", ".join(f"{x:.3f}" for x in q)),
    }
    _finish(record, 9, checks, t0, 600)
