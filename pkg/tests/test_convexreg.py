import numpy as np
import pytest

from oracles import convex_bruteforce
from shapedecomp.convexreg import (
    PiecewiseLinearFit,
    SolverNotConverged,
    convex_regression,
    evaluate_pwl,
    fit_convex_lse,
)


def slope_violation(fit):
    """Largest decrease between consecutive secant slopes, net of float rounding."""
    k, v = fit.knots, fit.values
    if len(k) < 3:
        return 0.0
    h = np.diff(k)
    rounding = 8 * np.finfo(float).eps * np.abs(v).max() / np.minimum(h[1:], h[:-1])
    return float(np.max(-np.diff(fit.slopes()) - rounding))


def random_instance(rng, n):
    # jittered grid keeps knots well separated
    x = (np.arange(n) + rng.uniform(0.1, 0.9, n)) / n
    y = rng.normal(size=n) + rng.uniform(-3, 3) * (x - 0.5) ** 2
    w = rng.uniform(0.2, 3, size=n)
    return x, y, w


def test_affine_is_fixed_point():
    k = np.array([0.0, 0.3, 1.0, 2.5, 4.0])
    y = 2 - 1.5 * k
    np.testing.assert_allclose(fit_convex_lse(k, y).values, y, atol=1e-12)


def test_three_point_examples():
    np.testing.assert_allclose(fit_convex_lse([0, 1, 2], [0, 1, 0]).values, [1 / 3] * 3, atol=1e-12)
    np.testing.assert_allclose(fit_convex_lse([0, 1, 2], [1, 0, 1]).values, [1, 0, 1], atol=1e-12)


def test_small_inputs_identity():
    assert fit_convex_lse([1.0], [2.0]).values.tolist() == [2.0]
    assert fit_convex_lse([1.0, 2.0], [5.0, -1.0]).values.tolist() == [5.0, -1.0]
    np.testing.assert_array_equal(fit_convex_lse([0, 1, 2, 3], [2, 2, 2, 2]).values, [2, 2, 2, 2])


def test_matches_bruteforce(rng):
    for _ in range(60):
        n = int(rng.integers(3, 9))
        x, y, w = random_instance(rng, n)
        np.testing.assert_allclose(fit_convex_lse(x, y, w).values, convex_bruteforce(x, y, w), atol=1e-6)


def test_kkt_moments_and_convexity(rng):
    for _ in range(50):
        n = int(rng.integers(3, 200))
        x, y, w = random_instance(rng, n)
        fit = fit_convex_lse(x, y, w)
        r = w * (y - fit.values)
        assert abs(r.sum()) <= 1e-6
        assert abs(np.dot(r, x)) <= 1e-6
        assert slope_violation(fit) <= 1e-8


def test_idempotent_and_linear_shift(rng):
    for _ in range(30):
        n = int(rng.integers(3, 100))
        x, y, w = random_instance(rng, n)
        f = fit_convex_lse(x, y, w).values
        np.testing.assert_allclose(fit_convex_lse(x, f, w).values, f, atol=1e-6)
        a, b = rng.normal(size=2) * 5
        np.testing.assert_allclose(fit_convex_lse(x, y + a + b * x, w).values, f + a + b * x, atol=1e-6)


def test_midpoint_convexity_of_evaluator(rng):
    x = np.sort(rng.uniform(size=500))
    y = np.sin(4 * (2 * x - 1)) + 20 * x**2 + rng.normal(0, 0.1, 500)
    fit = convex_regression(x, y)
    a, b = rng.uniform(-0.5, 1.5, size=(2, 5000))
    assert np.all(fit((a + b) / 2) <= (fit(a) + fit(b)) / 2 + 1e-8)


def test_evaluate_pwl_rules():
    assert evaluate_pwl(PiecewiseLinearFit([0, 1], [0, 1]), 2.0) == 2.0
    fit = PiecewiseLinearFit([0, 1, 2], [1, 0, 1])
    assert fit(1.0) == 0.0
    assert fit(1.5) == 0.5
    assert fit(-1.0) == 2.0
    assert PiecewiseLinearFit([1.0], [3.0])(np.array([0.0, 5.0])).tolist() == [3.0, 3.0]


def test_iteration_cap():
    rng = np.random.default_rng(0)
    x = np.sort(rng.uniform(size=300))
    y = np.sin(20 * x) + rng.normal(0, 0.1, 300)
    with pytest.raises(SolverNotConverged) as e:
        fit_convex_lse(x, y, max_iters=2)
    assert e.value.max_iters == 2


def test_large_problem_is_fast_and_convex():
    rng = np.random.default_rng(4)
    x = np.sort(rng.uniform(size=20_000))
    y = np.sin(4 * (2 * x - 1)) + 40 * x**2 + rng.normal(0, 0.1, x.size)
    fit = fit_convex_lse(x, y)
    r = y - fit.values
    assert abs(r.sum()) < 1e-6 and abs(np.dot(r, x)) < 1e-6
    assert slope_violation(fit) <= 1e-8


def test_json_round_trip():
    fit = fit_convex_lse([0, 1, 2, 3], [1, 0, 0.5, 3])
    assert PiecewiseLinearFit.from_dict(fit.to_dict()) == fit
