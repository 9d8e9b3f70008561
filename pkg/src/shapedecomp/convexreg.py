"""Univariate convex least-squares regression.

The fitted vector is piecewise linear in the covariate with kinks at a subset
of the design points. The solver is a primal active-set method over that kink
set: it starts from the weighted linear fit, repeatedly adds the design point
whose kink would most reduce the residual sum of squares, and, when a refit on
the enlarged kink set loses convexity, steps back along the segment to the
last convex point and drops the offending kink. Every refit is a weighted
least-squares problem in the hat-function basis on the current kinks, whose
normal equations are tridiagonal, so each iteration costs O(n).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solveh_banded

from .core import ShapeDecompError
from .isotonic import _check_xyw

MAX_ITERS = 10_000
KKT_TOL = 1e-8


class SolverNotConverged(ShapeDecompError):
    def __init__(self, max_iters: int, residual: float):
        self.max_iters = max_iters
        self.residual = residual
        super().__init__(f"convex LSE not converged after {max_iters} iterations (KKT residual {residual:.3e})")


@dataclass(frozen=True, eq=False)
class PiecewiseLinearFit:
    """Convex fit stored at its knots.

    Linear interpolation inside the knot range, linear extrapolation with the
    boundary secant slopes outside it.
    """

    knots: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        for name in ("knots", "values"):
            a = np.array(getattr(self, name), dtype=float).reshape(-1)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if not (len(self.knots) == len(self.values) >= 1):
            raise ValueError("knots and values must have equal non-zero length")

    def __call__(self, q):
        return evaluate_pwl(self, q)

    def __eq__(self, other):
        if not isinstance(other, PiecewiseLinearFit):
            return NotImplemented
        return np.array_equal(self.knots, other.knots) and np.array_equal(self.values, other.values)

    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.knots)

    def to_dict(self) -> dict:
        return {"knots": self.knots.tolist(), "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "PiecewiseLinearFit":
        return cls(d["knots"], d["values"])


def evaluate_pwl(fit: PiecewiseLinearFit, q):
    k, v = fit.knots, fit.values
    qa = np.asarray(q, dtype=float)
    if len(k) == 1:
        out = np.full(qa.shape, v[0])
    else:
        out = np.interp(qa, k, v)
        lo = qa < k[0]
        hi = qa > k[-1]
        if lo.any() or hi.any():
            s0 = (v[1] - v[0]) / (k[1] - k[0])
            s1 = (v[-1] - v[-2]) / (k[-1] - k[-2])
            out = np.where(lo, v[0] + s0 * (qa - k[0]), out)
            out = np.where(hi, v[-1] + s1 * (qa - k[-1]), out)
    return float(out) if np.ndim(q) == 0 else out


class _HatBasis:
    """Least-squares fits that are linear between a chosen set of design points."""

    def __init__(self, x, y, w):
        self.x, self.y, self.w = x, y, w
        self.wy = w * y

    def fit(self, nodes: np.ndarray) -> np.ndarray:
        x, w = self.x, self.w
        t = x[nodes]
        m = len(nodes) - 1
        seg = np.clip(np.searchsorted(t, x, side="right") - 1, 0, m - 1)
        lam = (x - t[seg]) / (t[seg + 1] - t[seg])
        a = 1.0 - lam
        size = m + 1
        diag = np.bincount(seg, weights=w * a * a, minlength=size)
        diag += np.bincount(seg + 1, weights=w * lam * lam, minlength=size)
        off = np.bincount(seg, weights=w * a * lam, minlength=m)
        rhs = np.bincount(seg, weights=self.wy * a, minlength=size)
        rhs += np.bincount(seg + 1, weights=self.wy * lam, minlength=size)
        ab = np.zeros((2, size))
        ab[0, 1:] = off
        ab[1] = diag
        v = solveh_banded(ab, rhs, check_finite=False)
        return a * v[seg] + lam * v[seg + 1]


def _kinks(x, theta, nodes):
    s = np.diff(theta[nodes]) / np.diff(x[nodes])
    return np.diff(s)


def _kkt(x, y, w, theta, in_set):
    """Largest positive directional gain over the cone generators ``(x - x_k)_+``.

    Returns the gains (zeroed on the current kink set and the endpoints) and
    the constant/linear residual moments.
    """
    r = w * (y - theta)
    rs = np.cumsum(r[::-1])[::-1]
    rxs = np.cumsum((r * x)[::-1])[::-1]
    gain = np.zeros_like(x)
    gain[1:-1] = (rxs[2:] - x[1:-1] * rs[2:])
    gain[in_set] = 0.0
    gain[0] = gain[-1] = 0.0
    return gain, abs(rs[0]), abs(rxs[0])


def _solve_scaled(x, y, w, max_iters, tol):
    n = len(x)
    W = w.sum()
    basis = _HatBasis(x, y, w)
    nodes = np.array([0, n - 1])
    in_set = np.zeros(n, dtype=bool)
    theta = basis.fit(nodes)
    # rounding guard for kink signs relative to the unit-scaled data
    eps = 1e-12
    it = 0
    while True:
        gain, m0, m1 = _kkt(x, y, w, theta, in_set)
        k = int(np.argmax(gain))
        resid = max(gain[k], m0, m1) / W
        if gain[k] / W <= tol:
            return theta, it, resid
        nodes = np.insert(nodes, np.searchsorted(nodes, k), k)
        in_set[k] = True
        while True:
            it += 1
            if it > max_iters:
                raise SolverNotConverged(max_iters, resid)
            cand = basis.fit(nodes)
            new_k = _kinks(x, cand, nodes)
            bad = new_k < -eps
            if not bad.any():
                theta = cand
                break
            old_k = _kinks(x, theta, nodes)
            ratio = np.full(len(new_k), np.inf)
            ratio[bad] = old_k[bad] / (old_k[bad] - new_k[bad])
            step = min(max(ratio.min(), 0.0), 1.0)
            theta = theta + step * (cand - theta)
            drop = bad & (ratio <= step)
            interior = nodes[1:-1]
            in_set[interior[drop]] = False
            nodes = np.concatenate([nodes[:1], interior[~drop], nodes[-1:]])


def fit_convex_lse(knots, y, w=None, max_iters: int = MAX_ITERS, tol: float = KKT_TOL) -> PiecewiseLinearFit:
    """Weighted least-squares projection of ``y`` onto convex sequences.

    Parameters
    ----------
    knots : array_like
        Strictly increasing design points (collapse ties beforehand).
    y, w : array_like
        Responses and positive weights.
    max_iters : int
        Cap on refits.
    tol : float
        KKT tolerance, measured on data rescaled to zero mean and unit
        variance and normalized by total weight.

    Raises
    ------
    SolverNotConverged
        If the active-set loop hits ``max_iters``.
    """
    x, y, w = _check_xyw(knots, y, w)
    if len(x) > 1 and not (np.diff(x) > 0).all():
        raise ValueError("knots must be strictly increasing; use collapse_ties first")
    if len(x) <= 2:
        return PiecewiseLinearFit(x, y)
    W = w.sum()
    mx = (w * x).sum() / W
    sx = np.sqrt((w * (x - mx) ** 2).sum() / W)
    my = (w * y).sum() / W
    sy = np.sqrt((w * (y - my) ** 2).sum() / W)
    if sy == 0.0:
        return PiecewiseLinearFit(x, np.full_like(y, my))
    theta, _, _ = _solve_scaled((x - mx) / sx, (y - my) / sy, w, max_iters, tol)
    return PiecewiseLinearFit(x, theta * sy + my)


def convex_regression(x, y, w=None, **kw) -> PiecewiseLinearFit:
    """Collapse ties in ``x`` then fit."""
    from .isotonic import collapse_ties

    return fit_convex_lse(*collapse_ties(x, y, w), **kw)
