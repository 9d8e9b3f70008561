"""Weighted univariate isotonic regression by pool adjacent violators."""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .core import ShapeDecompError


class NonFiniteInput(ShapeDecompError):
    pass


class NonPositiveWeight(ShapeDecompError):
    pass


def _check_xyw(x, y, w):
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    w = np.ones_like(y) if w is None else np.asarray(w, dtype=float).reshape(-1)
    if not (len(x) == len(y) == len(w)) or len(x) == 0:
        raise ValueError(f"length mismatch or empty input: {len(x)}, {len(y)}, {len(w)}")
    if not (np.isfinite(x).all() and np.isfinite(y).all() and np.isfinite(w).all()):
        raise NonFiniteInput("x, y and w must be finite")
    if (w <= 0).any():
        raise NonPositiveWeight("weights must be positive")
    return x, y, w


def collapse_ties(x, y, w=None):
    """Sort by ``x`` and pool equal covariate values.

    Each group of tied ``x`` becomes a single knot carrying the summed weight
    and the weighted mean response, so the weighted least-squares problem is
    unchanged.

    Returns
    -------
    knots, pooled_y, pooled_w : ndarray
        ``knots`` strictly increasing.
    """
    x, y, w = _check_xyw(x, y, w)
    order = np.argsort(x, kind="stable")
    xs, ys, ws = x[order], y[order], w[order]
    new = np.empty(len(xs), dtype=bool)
    new[0] = True
    np.not_equal(xs[1:], xs[:-1], out=new[1:])
    if new.all():
        return xs, ys, ws
    group = np.cumsum(new) - 1
    pw = np.bincount(group, weights=ws)
    py = np.bincount(group, weights=ws * ys) / pw
    return xs[new], py, pw


@numba.njit(cache=True)
def _pava(y, w):
    n = y.shape[0]
    # block stack: weighted mean, total weight, end index (exclusive)
    mean = np.empty(n)
    wsum = np.empty(n)
    end = np.empty(n, dtype=np.int64)
    top = -1
    for i in range(n):
        top += 1
        mean[top] = y[i]
        wsum[top] = w[i]
        end[top] = i + 1
        while top > 0 and mean[top - 1] > mean[top]:
            tw = wsum[top - 1] + wsum[top]
            mean[top - 1] = (wsum[top - 1] * mean[top - 1] + wsum[top] * mean[top]) / tw
            wsum[top - 1] = tw
            end[top - 1] = end[top]
            top -= 1
    out = np.empty(n)
    start = 0
    for b in range(top + 1):
        for i in range(start, end[b]):
            out[i] = mean[b]
        start = end[b]
    return out


def pava(y, w=None) -> np.ndarray:
    """Weighted L2 projection of ``y`` onto non-decreasing sequences.

    Single forward pass over a stack of pooled blocks. Blocks merge only on a
    strict violation, so an already monotone ``y`` is returned unchanged.
    """
    y = np.ascontiguousarray(y, dtype=float)
    w = np.ones_like(y) if w is None else np.ascontiguousarray(w, dtype=float)
    if len(y) == 0:
        return y.copy()
    return _pava(y, w)


@dataclass(frozen=True, eq=False)
class StepFit:
    """Isotonic fit at its knots with linear interpolation between them.

    Outside ``[knots[0], knots[-1]]`` the boundary values are held constant.
    """

    knots: np.ndarray
    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        for name in ("knots", "values", "weights"):
            a = np.array(getattr(self, name), dtype=float).reshape(-1)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if not (len(self.knots) == len(self.values) == len(self.weights) >= 1):
            raise ValueError("knots, values and weights must have equal non-zero length")

    def __call__(self, q):
        return evaluate_step(self, q)

    def __eq__(self, other):
        if not isinstance(other, StepFit):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, k), getattr(other, k))
            for k in ("knots", "values", "weights")
        )

    def to_dict(self) -> dict:
        return {
            "knots": self.knots.tolist(),
            "values": self.values.tolist(),
            "weights": self.weights.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StepFit":
        return cls(d["knots"], d["values"], d["weights"])


def fit_isotonic(knots, y, w=None) -> StepFit:
    """Isotonic least-squares fit of ``y`` on strictly increasing ``knots``."""
    knots, y, w = _check_xyw(knots, y, w)
    if len(knots) > 1 and not (np.diff(knots) > 0).all():
        raise ValueError("knots must be strictly increasing; use collapse_ties first")
    return StepFit(knots, pava(y, w), w)


def isotonic_regression(x, y, w=None) -> StepFit:
    """Collapse ties in ``x`` then fit; convenience for unsorted data."""
    return fit_isotonic(*collapse_ties(x, y, w))


def evaluate_step(fit: StepFit, q):
    """Evaluate ``fit`` at ``q`` (scalar or array)."""
    if len(fit.knots) == 1:
        out = np.full(np.shape(q), fit.values[0])
    else:
        out = np.interp(q, fit.knots, fit.values)
    return float(out) if np.ndim(q) == 0 else out
