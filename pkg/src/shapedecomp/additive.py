"""Additive monotone-plus-linear estimation by backfitting.

Each coordinate gets a non-decreasing component fitted by isotonic regression
on the current partial residuals of the augmented response
``z = y + alpha @ x``. Components are re-centered to mean zero over the
training points after every update, with the removed constant moved into the
intercept. Penalty vectors are chosen by validation error exactly as in
:func:`shapedecomp.decomp.select_alpha`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import AlphaGrid, DataSet, DimensionMismatch, split
from .decomp import SelectedModel, golden_section, pick_best, refine_bracket, strictly_better
from .isotonic import StepFit, pava

MAX_SWEEPS = 100
REL_TOL = 1e-8


class NotConverged(UserWarning):
    """Backfitting stopped at the sweep cap; the fit is still usable."""

    def __init__(self, iterations: int, final_risk: float):
        self.iterations = iterations
        self.final_risk = final_risk
        super().__init__(f"backfitting stopped after {iterations} sweeps, training risk {final_risk:.6g}")


@dataclass(frozen=True, eq=False)
class AdditiveFit:
    alpha: tuple
    components: tuple
    intercept: float
    iterations: int
    final_risk: float
    converged: bool = True
    risk_trace: tuple = field(default=(), repr=False)

    @property
    def d(self) -> int:
        return len(self.components)

    def predict(self, x):
        """Evaluate at one point (length ``d``) or at rows of a ``(k, d)`` array."""
        xa = np.asarray(x, dtype=float)
        if xa.shape[-1] != self.d:
            raise DimensionMismatch(f"expected {self.d} coordinates, got {xa.shape[-1]}")
        out = self.intercept - xa @ np.asarray(self.alpha)
        for j, comp in enumerate(self.components):
            out = out + comp(xa[..., j])
        return float(out) if xa.ndim == 1 else out

    __call__ = predict

    def __eq__(self, other):
        if not isinstance(other, AdditiveFit):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def to_dict(self) -> dict:
        return {
            "kind": "additive",
            "alpha": [float(a) for a in self.alpha],
            "components": [c.to_dict() for c in self.components],
            "intercept": float(self.intercept),
            "iterations": int(self.iterations),
            "final_risk": float(self.final_risk),
            "converged": bool(self.converged),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AdditiveFit":
        return cls(
            tuple(float(a) for a in d["alpha"]),
            tuple(StepFit.from_dict(c) for c in d["components"]),
            float(d["intercept"]),
            int(d["iterations"]),
            float(d["final_risk"]),
            bool(d.get("converged", True)),
        )


class _Coordinate:
    """Sort order and tie groups of one covariate column, computed once."""

    def __init__(self, col: np.ndarray):
        order = np.argsort(col, kind="stable")
        xs = col[order]
        new = np.empty(len(xs), dtype=bool)
        new[0] = True
        np.not_equal(xs[1:], xs[:-1], out=new[1:])
        group_sorted = np.cumsum(new) - 1
        self.group = np.empty(len(col), dtype=np.int64)
        self.group[order] = group_sorted
        self.knots = xs[new]
        self.counts = np.bincount(group_sorted).astype(float)

    def fit(self, r: np.ndarray) -> np.ndarray:
        """Isotonic fit of ``r`` against this column, as values at the knots."""
        pooled = np.bincount(self.group, weights=r, minlength=len(self.knots)) / self.counts
        return pava(pooled, self.counts)


def _risk(resid):
    return float(np.dot(resid, resid))


def backfit(train: DataSet, alpha, max_iters: int = MAX_SWEEPS, tol: float = REL_TOL) -> AdditiveFit:
    """Fit the additive model for a fixed penalty vector.

    A sweep updates coordinates ``1..d`` in order. Iteration stops when a full
    sweep lowers the training risk by less than ``tol`` relative to its value
    before the sweep, or after ``max_iters`` sweeps (with a
    :class:`NotConverged` warning).
    """
    d = train.d
    alpha = np.asarray(alpha, dtype=float).reshape(-1)
    if alpha.shape != (d,):
        raise DimensionMismatch(f"alpha has {alpha.size} entries, data has d={d}")
    if not (np.isfinite(alpha).all() and (alpha >= 0).all()):
        raise ValueError("alpha entries must be finite and >= 0")
    if max_iters < 1 or not tol > 0:
        raise ValueError("need max_iters >= 1 and tol > 0")

    x = train.x
    z = train.y + x @ alpha
    coords = [_Coordinate(x[:, j]) for j in range(d)]
    values = [np.zeros(len(c.knots)) for c in coords]
    intercept = float(z.mean())
    resid = z - intercept
    risk = _risk(resid)
    trace = [risk]
    sweeps = 0
    converged = False
    while sweeps < max_iters:
        sweeps += 1
        before = risk
        for j, c in enumerate(coords):
            partial = resid + values[j][c.group]
            v = c.fit(partial)
            shift = float(np.dot(v, c.counts) / c.counts.sum())
            v = v - shift
            intercept += shift
            values[j] = v
            resid = partial - shift - v[c.group]
            risk = _risk(resid)
            trace.append(risk)
        if before - risk <= tol * before:
            converged = True
            break
    if not converged:
        warnings.warn(NotConverged(sweeps, risk), stacklevel=2)
    comps = tuple(StepFit(c.knots, v, c.counts) for c, v in zip(coords, values))
    return AdditiveFit(tuple(float(a) for a in alpha), comps, intercept, sweeps, risk, converged, tuple(trace))


def predict_additive(fit: AdditiveFit, x):
    return fit.predict(x)


def select_alpha_additive(
    data: DataSet,
    grid: AlphaGrid | None = None,
    seed: int = 0,
    validate_size: int | None = None,
    max_iters: int = MAX_SWEEPS,
    tol: float = REL_TOL,
) -> SelectedModel:
    """Split once, backfit every candidate vector on training rows, keep the best on validation.

    Scalar grid entries are replicated across coordinates. Ties go to the
    candidate with the smallest coordinate sum. Refinement (``grid.refine``)
    searches the common scale between grid neighbours and is only available
    when every grid entry is a scalar.
    """
    grid = AlphaGrid.default() if grid is None else grid
    d = data.d
    cands = grid.vectors(d)
    sp = split(data.n, validate_size, seed)
    train, val = data.subset(sp.train), data.subset(sp.validate)
    fits = {}

    def score(vec):
        key = tuple(float(a) for a in vec)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NotConverged)
            fit = backfit(train, vec, max_iters, tol)
        fits[key] = fit
        r = val.y - fit.predict(val.x)
        return key, float(np.dot(r, r))

    def order_key(key):
        return (math.fsum(key), key)

    rows = []
    for vec in cands:
        key, s = score(vec)
        rows.append((order_key(key), s, False, key))
    best_i = pick_best(rows)
    refined = False
    scalar_grid = all(np.ndim(v) == 0 for v in grid.values)
    if grid.refine and scalar_grid:
        scalars = [float(v) for v in grid.values]
        lo, hi = refine_bracket(scalars, rows[best_i][3][0])
        for t, s in golden_section(lambda t: score(np.full(d, t))[1], lo, hi):
            key = tuple([float(t)] * d)
            rows.append((order_key(key), s, True, key))
        new_i = pick_best(rows)
        if rows[new_i][2] and strictly_better(rows[new_i][1], rows[best_i][1]):
            best_i = new_i
            refined = True
    best_key = rows[best_i][3]
    config = {
        "shape": "additive-monotone",
        "seed": int(seed),
        "validate_size": int(len(sp.validate)),
        "grid": [list(map(float, v)) if np.ndim(v) else float(v) for v in grid.values],
        "refine": bool(grid.refine),
        "max_iters": int(max_iters),
        "tol": float(tol),
    }
    table = tuple((key, s) for _, s, _, key in rows)
    return SelectedModel(fits[best_key], sp, table, refined, config)
