"""Acceptance criteria, one PASS/FAIL line each (printed in the terminal summary).

Criteria 3 to 9 are Monte Carlo studies at desk scale and take several minutes
on one core; set SHAPEDECOMP_THREADS to spread them over worker processes.
"""

import json
import time
import warnings

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import convex_bruteforce, isotonic_bruteforce
from shapedecomp.additive import backfit
from shapedecomp.bench import (
    ADDITIVE_N_GRID,
    DEFAULT_N_GRID,
    METHOD,
    alpha_sweep,
    convergence_study,
    cv_split_robustness,
    fit_slope,
    m_sweep,
)
from shapedecomp.convexreg import fit_convex_lse
from shapedecomp.core import AlphaGrid, Shape, split
from shapedecomp.decomp import TIE_RTOL, select_alpha
from shapedecomp.isotonic import isotonic_regression, pava
from shapedecomp.simgen import ScenarioSpec, generate

REPS = 50
ADDITIVE_REPS = 30
SMOKE_REPS = 10
N_MIN = 2000


def slope_of(scenario, n_grid=DEFAULT_N_GRID, reps=REPS):
    report = convergence_study(scenario, n_grid, reps, base_seed=2024)
    return fit_slope(report, N_MIN)[(scenario, METHOD)], report


def means_text(report):
    return ", ".join(f"{n}:{m:.3g}" for n, m in report.mean_mse().items())


# 1
def test_c01_isotonic_oracle(criterion):
    rng = np.random.default_rng(1)
    worst, t0 = 0.0, time.perf_counter()
    for _ in range(500):
        n = int(rng.integers(1, 13))
        y = rng.normal(size=n) * rng.choice([0.1, 1.0, 10.0])
        w = rng.uniform(0.05, 5.0, size=n)
        worst = max(worst, float(np.max(np.abs(pava(y, w) - isotonic_bruteforce(y, w)))))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 5.0
    criterion("C1 isotonic oracle", ok, f"max |diff| {worst:.2e} (<= 1e-9), {elapsed:.2f}s (< 5s)")
    assert ok


# 2
def test_c02_convex_oracle(criterion):
    rng = np.random.default_rng(2)
    worst = kkt = 0.0
    t0 = time.perf_counter()
    for _ in range(200):
        n = int(rng.integers(3, 11))
        x = np.sort(rng.uniform(0, 1, n))
        while np.diff(x).min() < 1e-3:
            x = np.sort(rng.uniform(0, 1, n))
        y = rng.normal(size=n) + rng.uniform(-5, 5) * (x - 0.5) ** 2
        w = rng.uniform(0.1, 5.0, size=n)
        fit = fit_convex_lse(x, y, w)
        worst = max(worst, float(np.max(np.abs(fit.values - convex_bruteforce(x, y, w)))))
        r = w * (y - fit.values)
        kkt = max(kkt, abs(r.sum()), abs(np.dot(r, x)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and kkt <= 1e-6 and elapsed < 60.0
    criterion("C2 convex oracle", ok, f"max |diff| {worst:.2e}, KKT {kkt:.2e} (<= 1e-6), {elapsed:.1f}s (< 60s)")
    assert ok


# 3
def test_c03_s1_convergence(criterion):
    s, rep = slope_of("S1")
    ok = s <= -0.55 and abs(s + 0.70) <= 0.15
    criterion("C3 S1 slope", ok, f"{s:.3f} (<= -0.55 and within 0.15 of -0.70); mean MSE {means_text(rep)}")
    assert ok


# 4
def test_c04_s3_convergence(criterion):
    s, rep = slope_of("S3")
    ok = s <= -0.65 and abs(s + 0.80) <= 0.15
    criterion("C4 S3 slope", ok, f"{s:.3f} (<= -0.65 and within 0.15 of -0.80); mean MSE {means_text(rep)}")
    assert ok


# 5
def test_c05_s2_adaptive(criterion):
    s, rep = slope_of("S2")
    ok = s <= -0.80
    criterion("C5 S2 slope", ok, f"{s:.3f} (<= -0.80); mean MSE {means_text(rep)}")
    assert ok


def test_c05_s4_adaptive(criterion):
    s, rep = slope_of("S4")
    ok = s <= -0.80
    criterion("C5 S4 slope", ok, f"{s:.3f} (<= -0.80); mean MSE {means_text(rep)}")
    assert ok


# 6
def test_c06_a1_2d(criterion):
    s, rep = slope_of("A1_2d", ADDITIVE_N_GRID, ADDITIVE_REPS)
    ok = s <= -0.55
    criterion("C6 S1-2d slope", ok, f"{s:.3f} (<= -0.55); mean MSE {means_text(rep)}")
    assert ok


def test_c06_a2_2d(criterion):
    s, rep = slope_of("A2_2d", ADDITIVE_N_GRID, ADDITIVE_REPS)
    ok = s <= -0.70
    criterion("C6 S2-2d slope", ok, f"{s:.3f} (<= -0.70); mean MSE {means_text(rep)}")
    assert ok


def test_c06_5d_smoke(criterion):
    slopes = {sc: slope_of(sc, ADDITIVE_N_GRID, SMOKE_REPS)[0] for sc in ("A3_5d", "A4_5d")}
    ok = all(s < 0 for s in slopes.values())
    criterion("C6 5d smoke", ok, ", ".join(f"{k} {v:.3f}" for k, v in slopes.items()) + " (< 0)")
    assert ok


# 7
def test_c07_alpha_plateau(criterion):
    plateau = [3.0, 4.0, 6.0, 8.0, 12.0]
    rows = alpha_sweep("S1", [5000], [0.1] + plateau, reps=REPS, seed=7)
    mse = {r["alpha"]: r["mean_mse"] for r in rows}
    vals = np.array([mse[a] for a in plateau])
    ratio = vals.max() / vals.min()
    lift = mse[0.1] / vals.min()
    ok = ratio <= 2.0 and lift >= 3.0
    detail = ", ".join(f"{a:g}:{m:.3g}" for a, m in mse.items())
    criterion("C7 alpha plateau", ok, f"max/min {ratio:.2f} (<= 2), MSE(0.1)/min {lift:.0f} (>= 3); {detail}")
    assert ok


# 8
def test_c08_cv_split_robustness(criterion):
    rows = cv_split_robustness("S1", 500, n_splits=300, data_seed=8)
    q1, q3 = np.percentile(np.log10([r["mse"] for r in rows]), [25, 75])
    ok = q3 - q1 <= 0.35
    criterion("C8 cv-split IQR", ok, f"IQR log10 MSE {q3 - q1:.3f} (<= 0.35), quartiles {q1:.2f}..{q3:.2f}")
    assert ok


# 9
def _m_sweep_check(family, criterion):
    rows = m_sweep(family, [1, 2, 3, 4, 5], n=5000, reps=REPS, seed=9)
    mse = np.array([r["mean_mse"] for r in rows])
    corr = float(np.corrcoef(np.arange(1, 6), mse)[0, 1])
    ok = corr >= 0.9
    criterion(f"C9 {family} m-sweep", ok, f"Pearson {corr:.3f} (>= 0.9); mean MSE " + ", ".join(f"{v:.3g}" for v in mse))
    return ok


def test_c09_s2_m_sweep(criterion):
    assert _m_sweep_check("S2", criterion)


def test_c09_s4_m_sweep(criterion):
    assert _m_sweep_check("S4", criterion)


# 10
def test_c10_performance(criterion):
    rng = np.random.default_rng(10)
    pava(rng.normal(size=100))  # compile outside the timed region
    x = np.sort(rng.uniform(size=1_000_000))
    y = np.sin(6 * x) + rng.normal(0, 0.1, x.size)
    t0 = time.perf_counter()
    isotonic_regression(x, y)
    t_iso = time.perf_counter() - t0
    data = generate(ScenarioSpec("S1", n=10_000, seed=10))
    t0 = time.perf_counter()
    select_alpha(data, AlphaGrid.default(), Shape.MONOTONE, seed=10)
    t_sel = time.perf_counter() - t0
    ok = t_iso < 1.0 and t_sel < 5.0
    criterion("C10 performance", ok, f"isotonic n=1e6 {t_iso:.3f}s (< 1s), S1 selection n=1e4 {t_sel:.3f}s (< 5s)")
    assert ok


# 11
finite = st.floats(-1e3, 1e3, allow_nan=False)


@st.composite
def weighted(draw):
    n = draw(st.integers(3, 30))
    return draw(arrays(float, n, elements=finite)), draw(arrays(float, n, elements=st.floats(0.1, 10)))


@settings(max_examples=100, deadline=None)
@given(weighted(), st.floats(-50, 50), st.floats(0.05, 20))
def _isotonic_properties(p, c, s):
    y, w = p
    f = pava(y, w)
    scale = max(1.0, np.abs(y).max())
    assert np.all(np.diff(f) >= 0)
    assert np.array_equal(pava(f, w), f)
    assert abs(np.dot(w, y - f)) <= 1e-10 * scale * w.sum()
    tol = 1e-10 * scale * max(1.0, abs(c), s)
    assert np.allclose(pava(y + c, w), f + c, atol=tol, rtol=0)
    assert np.allclose(pava(s * y, w), s * f, atol=tol, rtol=0)


@settings(max_examples=60, deadline=None)
@given(weighted(), st.floats(-5, 5), st.floats(-5, 5), st.floats(0.1, 10))
def _convex_properties(p, a, b, s):
    y, w = p
    n = len(y)
    x = (np.arange(n) + 0.5) / n
    y = y / max(1.0, np.abs(y).max())
    f = fit_convex_lse(x, y, w).values
    assert np.all(np.diff(np.diff(f) / np.diff(x)) >= -1e-8)
    r = w * (y - f)
    assert abs(r.sum()) <= 1e-8 * w.sum() and abs(np.dot(r, x)) <= 1e-8 * w.sum()
    assert np.allclose(fit_convex_lse(x, f, w).values, f, atol=1e-7, rtol=0)
    assert np.allclose(fit_convex_lse(x, y + a + b * x, w).values, f + a + b * x, atol=1e-7, rtol=0)
    assert np.allclose(fit_convex_lse(x, s * y, w).values, s * f, atol=1e-7 * s, rtol=0)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["S1", "S3"]))
def _selection_properties(seed, scenario):
    spec = ScenarioSpec(scenario, n=300, seed=seed)
    data = generate(spec)
    grid = AlphaGrid(AlphaGrid.default().values, refine=bool(seed % 2))
    model = select_alpha(data, grid, spec.shape, seed=seed)
    sses = np.array([s for _, s in model.table])
    cut = sses.min() * (1 + TIE_RTOL)
    assert model.alpha == min(a for a, s in model.table if s <= cut)
    again = select_alpha(data, grid, spec.shape, seed=seed)
    assert json.dumps(again.to_dict()) == json.dumps(model.to_dict())
    q = np.linspace(-0.5, 1.5, 401)
    g = model.best.g(q)
    if spec.shape is Shape.MONOTONE:
        assert np.all(np.diff(g) >= 0)
    else:
        assert np.all(np.diff(g, 2) >= -1e-9 * max(1.0, np.abs(g).max()))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["A1_2d", "A2_2d", "A3_5d"]), st.floats(0, 10))
def _backfit_properties(seed, scenario, alpha):
    spec = ScenarioSpec(scenario, n=300, seed=seed)
    data = generate(spec)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fit = backfit(data, np.full(spec.d, alpha))
        assert fit == backfit(data, np.full(spec.d, alpha))
    trace = np.array(fit.risk_trace)
    assert np.all(np.diff(trace) <= 1e-12 * trace[0])
    for c in fit.components:
        assert np.all(np.diff(c.values) >= 0)
        assert abs(np.dot(c.values, c.weights)) / c.weights.sum() <= 1e-9


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 500))
def _seeded_determinism(seed, n):
    assert split(n, seed=seed) == split(n, seed=seed)
    spec = ScenarioSpec("A4_5d", n=n, seed=seed)
    a, b = generate(spec), generate(spec)
    assert a.x.tobytes() == b.x.tobytes() and a.y.tobytes() == b.y.tobytes()


def _check(fn):
    try:
        fn()
        return True, "holds"
    except Exception as e:  # report the falsifying example in the line
        return False, f"{type(e).__name__}: {str(e).splitlines()[0][:160]}"


def test_c11_properties(criterion):
    suites = {
        "isotonic monotone/idempotent/mean/shift-scale": _isotonic_properties,
        "convex convexity/KKT/idempotent/equivariance": _convex_properties,
        "selection argmin/determinism/shape": _selection_properties,
        "backfit risk descent/centering/determinism": _backfit_properties,
        "seeded split and generation determinism": _seeded_determinism,
    }
    results = {name: _check(fn) for name, fn in suites.items()}
    ok = all(r[0] for r in results.values())
    criterion("C11 property suites", ok, "; ".join(f"{k}: {v[1]}" for k, v in results.items()))
    assert ok
