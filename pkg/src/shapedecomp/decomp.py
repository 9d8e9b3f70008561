"""Shape-plus-parametric decomposition estimator for a scalar covariate.

For a candidate penalty scale ``alpha`` the responses are augmented to
``z = y + penalty(alpha, x)``, a shape-restricted fit ``g`` of ``z`` on ``x``
is computed on the training part of a random split, and the regression
estimate is ``f(x) = g(x) - penalty(alpha, x)``. The penalty scale is chosen
by validation error on the held-out part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .convexreg import PiecewiseLinearFit, fit_convex_lse
from .core import AlphaGrid, DataSet, DimensionMismatch, Shape, SplitIndices, split
from .isotonic import StepFit, collapse_ties, fit_isotonic

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
MAX_REFINE_EVALS = 30
# validation SSEs this close (relative) count as ties; absorbs summation rounding
TIE_RTOL = 1e-12

ShapeFit = Union[StepFit, PiecewiseLinearFit]


@dataclass(frozen=True)
class DecompFit:
    alpha: float
    shape: Shape
    g_fit: ShapeFit

    def g(self, q):
        return self.g_fit(q)

    def predict(self, q):
        return self.g_fit(q) - self.shape.penalty(self.alpha, q)

    __call__ = predict

    def to_dict(self) -> dict:
        return {"kind": "decomp", "alpha": self.alpha, "shape": self.shape.value, "g_fit": self.g_fit.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "DecompFit":
        shape = Shape(d["shape"])
        g_cls = StepFit if shape is Shape.MONOTONE else PiecewiseLinearFit
        return cls(float(d["alpha"]), shape, g_cls.from_dict(d["g_fit"]))


@dataclass(frozen=True)
class SelectedModel:
    """Result of split-based selection of the penalty scale.

    ``table`` lists every evaluated ``(alpha, validation SSE)`` pair: grid
    points first, then golden-section probes when refinement ran.
    """

    best: object
    split: SplitIndices
    table: tuple
    refined: bool = False
    config: dict = field(default_factory=dict)

    @property
    def alpha(self):
        return self.best.alpha

    def predict(self, q):
        return self.best.predict(q)

    __call__ = predict

    def to_dict(self) -> dict:
        return {
            "best": self.best.to_dict(),
            "split": self.split.to_dict(),
            "table": [[_alpha_json(a), float(s)] for a, s in self.table],
            "refined": bool(self.refined),
            "config": self.config,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SelectedModel":
        if d["best"]["kind"] == "additive":
            from .additive import AdditiveFit

            best = AdditiveFit.from_dict(d["best"])
        else:
            best = DecompFit.from_dict(d["best"])
        table = tuple((_alpha_load(a), float(s)) for a, s in d["table"])
        return cls(best, SplitIndices.from_dict(d["split"]), table, bool(d["refined"]), d.get("config", {}))


def _alpha_json(a):
    return float(a) if np.ndim(a) == 0 else [float(v) for v in a]


def _alpha_load(a):
    return float(a) if np.ndim(a) == 0 else tuple(float(v) for v in a)


def _univariate(data: DataSet) -> np.ndarray:
    if data.d != 1:
        raise DimensionMismatch(f"expected a single covariate, got d={data.d}")
    return data.x[:, 0]


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (math.isfinite(alpha) and alpha >= 0):
        raise ValueError(f"alpha must be finite and >= 0, got {alpha}")
    return alpha


def augment(data: DataSet, alpha: float, shape: Shape):
    """Return ``(x, z)`` with ``z = y + alpha*x`` or ``z = y + (alpha/2)*x**2``."""
    x = _univariate(data)
    alpha = _check_alpha(alpha)
    return x, data.y + shape.penalty(alpha, x)


def _shape_fitter(shape: Shape) -> Callable:
    return fit_isotonic if shape is Shape.MONOTONE else fit_convex_lse


class _PooledTrain:
    """Training data sorted and tie-collapsed once, reused across penalty scales.

    The penalty is a function of ``x`` alone, so pooling ``y`` and then adding
    the penalty at each knot gives the same weighted problem as pooling ``z``.
    """

    def __init__(self, train: DataSet, shape: Shape):
        x = _univariate(train)
        self.shape = shape
        self.knots, self.y, self.w = collapse_ties(x, train.y)
        self.fitter = _shape_fitter(shape)

    def fit(self, alpha: float) -> DecompFit:
        alpha = _check_alpha(alpha)
        z = self.y + self.shape.penalty(alpha, self.knots)
        return DecompFit(alpha, self.shape, self.fitter(self.knots, z, self.w))


def fit_for_alpha(train: DataSet, alpha: float, shape: Shape) -> DecompFit:
    """Shape-restricted fit of the augmented responses for one penalty scale."""
    return _PooledTrain(train, shape).fit(alpha)


def validation_sse(fit, data: DataSet) -> float:
    """Sum of squared residuals of ``fit`` on ``data``."""
    x = _univariate(data) if isinstance(fit, DecompFit) else data.x
    r = data.y - fit.predict(x)
    return float(np.dot(r, r))


def golden_section(func, lo: float, hi: float, max_evals: int = MAX_REFINE_EVALS):
    """Minimize ``func`` on ``[lo, hi]`` by golden-section search.

    Returns every ``(x, func(x))`` evaluated, in evaluation order.
    """
    evals = []

    def f(t):
        v = func(t)
        evals.append((t, v))
        return v

    if max_evals < 1 or not hi > lo:
        return evals
    c = hi - GOLDEN * (hi - lo)
    d = lo + GOLDEN * (hi - lo)
    fc = f(c)
    if max_evals < 2:
        return evals
    fd = f(d)
    while len(evals) < max_evals:
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - GOLDEN * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + GOLDEN * (hi - lo)
            fd = f(d)
    return evals


def refine_bracket(grid_values, best):
    """Nearest grid neighbours below and above ``best`` (or ``best`` itself at an edge)."""
    vals = sorted(set(grid_values))
    i = vals.index(best)
    lo = vals[i - 1] if i > 0 else vals[i]
    hi = vals[i + 1] if i + 1 < len(vals) else vals[i]
    return lo, hi


def pick_best(rows, rtol: float = TIE_RTOL):
    """Index of the winning row among ``(alpha_key, sse, refined)`` triples.

    Rows whose SSE is within ``rtol`` (relative) of the minimum are tied; among
    them grid rows beat refined ones, then the smallest ``alpha_key`` wins.
    """
    lowest = min(r[1] for r in rows)
    cut = lowest + rtol * abs(lowest)
    tied = [i for i in range(len(rows)) if rows[i][1] <= cut]
    return min(tied, key=lambda i: (rows[i][2], rows[i][0]))


def strictly_better(new: float, old: float, rtol: float = TIE_RTOL) -> bool:
    """True when ``new`` beats ``old`` by more than the tie tolerance."""
    return new < old - rtol * abs(old)


def select_alpha(
    data: DataSet,
    grid: AlphaGrid | None = None,
    shape: Shape = Shape.MONOTONE,
    seed: int = 0,
    validate_size: int | None = None,
) -> SelectedModel:
    """Split once, fit every candidate on the training part, keep the best on validation.

    Ties in validation SSE (within ``TIE_RTOL``) go to the smallest ``alpha``. With
    ``grid.refine`` a golden-section search runs between the grid neighbours
    of the winner; a refined value replaces the grid winner only when its SSE
    is strictly lower.
    """
    x = _univariate(data)
    grid = AlphaGrid.default() if grid is None else grid
    alphas = [float(v[0]) for v in grid.vectors(1)]
    sp = split(data.n, validate_size, seed)
    pooled = _PooledTrain(data.subset(sp.train), shape)
    xv, yv = x[sp.validate], data.y[sp.validate]

    fits = {}

    def score(alpha):
        fit = pooled.fit(alpha)
        r = yv - fit.predict(xv)
        fits[alpha] = fit
        return float(np.dot(r, r))

    rows = [(a, score(a), False) for a in alphas]
    best_i = pick_best(rows)
    refined = False
    if grid.refine:
        lo, hi = refine_bracket(alphas, rows[best_i][0])
        for a, s in golden_section(score, lo, hi):
            rows.append((a, s, True))
        new_i = pick_best(rows)
        if rows[new_i][2] and strictly_better(rows[new_i][1], rows[best_i][1]):
            best_i = new_i
            refined = True
    best_alpha = rows[best_i][0]
    config = {
        "shape": shape.value,
        "seed": int(seed),
        "validate_size": int(len(sp.validate)),
        "grid": [float(a) for a in alphas],
        "refine": bool(grid.refine),
    }
    table = tuple((a, s) for a, s, _ in rows)
    return SelectedModel(fits[best_alpha], sp, table, refined, config)


def predict(model, q):
    """Evaluate a fitted model (``SelectedModel`` or ``DecompFit``) at ``q``."""
    return model.predict(q)
