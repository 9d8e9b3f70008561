"""Test regression functions and synthetic data generation.

Covariates are IID uniform on the unit cube and the noise is IID Gaussian.
The covariate and noise streams come from two children of
``np.random.SeedSequence(seed)``, so changing ``noise_sd`` never changes the
covariates.

Piecewise definitions use right-open intervals ``[(i-1)/m, i/m)`` with the
last interval closed at 1.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .core import DataSet, DimensionMismatch, Shape, ShapeDecompError


class DomainError(ShapeDecompError):
    pass


def _domain(x):
    xa = np.asarray(x, dtype=float)
    if not ((xa >= 0.0) & (xa <= 1.0)).all():
        raise DomainError("argument outside [0, 1]")
    return xa


def _out(x, v):
    return float(v) if np.ndim(x) == 0 else v


def _segment(x, m):
    return np.minimum(np.floor(x * m), m - 1).astype(np.int64)


def f1(x):
    """Triangle wave with slopes -3, 3, -3 on the thirds of [0, 1] (3-Lipschitz)."""
    xa = _domain(x)
    v = np.where(xa < 1 / 3, 1 - 3 * xa, np.where(xa < 2 / 3, -1 + 3 * xa, 3 - 3 * xa))
    return _out(x, v)


def step_levels(x, m: int):
    """Non-decreasing step function taking value ``i`` on the ``i``-th of ``m`` equal pieces."""
    if m < 1:
        raise ValueError("m must be >= 1")
    xa = _domain(x)
    return _out(x, _segment(xa, m) + 1.0)


def f2(x, m: int = 3, beta: float = 1.0):
    xa = _domain(x)
    return _out(x, step_levels(xa, m) + beta * xa)


def f3(x, gamma: float = 4.0):
    xa = _domain(x)
    return _out(x, np.sin(gamma * (2 * xa - 1)))


def convex_pieces(x, m: int):
    """Continuous piecewise-linear function with slopes -1, 0, ..., m-2 on ``m`` equal pieces, zero at 0."""
    if m < 1:
        raise ValueError("m must be >= 1")
    xa = _domain(x)
    slopes = np.arange(m, dtype=float) - 1.0
    left = np.concatenate([[0.0], np.cumsum(slopes / m)])
    j = _segment(xa, m)
    return _out(x, left[j] + slopes[j] * (xa - j / m))


def f4(x, m: int = 3, beta: float = 1.0):
    xa = _domain(x)
    return _out(x, convex_pieces(xa, m) + beta * xa * xa)


def _cols(x, d):
    xa = np.asarray(x, dtype=float)
    if xa.shape[-1] != d:
        raise DimensionMismatch(f"expected {d} coordinates, got {xa.shape[-1]}")
    return [xa[..., j] for j in range(d)]


def a1_2d(x):
    x1, x2 = _cols(x, 2)
    return f1(x1) - f1(x2)


def a2_2d(x):
    x1, x2 = _cols(x, 2)
    return f2(x1, 3, 1) - f2(x2, 3, 1)


def a3_5d(x):
    x1, x2, x3, x4, _ = _cols(x, 5)
    return f1(x1) - f1(x2) + x3 - x4 + 1


def a4_5d(x):
    x1, x2, x3, x4, x5 = _cols(x, 5)
    return f2(x1, 1, 0) + f2(1 - x2, 3, 3) + f2(x3, 3, 3) + f2(1 - x4, 1, 3) + f2(x5, 1, 3)


ADDITIVE_TRUTHS = {"A1_2d": (2, a1_2d), "A2_2d": (2, a2_2d), "A3_5d": (5, a3_5d), "A4_5d": (5, a4_5d)}


def additive_truth(scenario_id: str, x):
    """Evaluate an additive scenario's regression function at ``x`` (``d`` or ``(k, d)``)."""
    _, fn = ADDITIVE_TRUTHS[scenario_id]
    v = fn(x)
    return float(v) if np.ndim(v) == 0 else v


SCENARIOS = ("S1", "S2", "S3", "S4") + tuple(ADDITIVE_TRUTHS)
# parameters used when a ScenarioSpec leaves them unset
DEFAULTS = {
    "S1": {},
    "S2": {"m": 3, "beta": 1.0},
    "S3": {"gamma": 4.0},
    "S4": {"m": 3, "beta": 1.0},
}


@dataclass(frozen=True)
class ScenarioSpec:
    id: str
    n: int
    seed: int = 0
    noise_sd: float = 0.1
    m: int | None = None
    beta: float | None = None
    gamma: float | None = None

    def __post_init__(self):
        if self.id not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.id!r}; expected one of {SCENARIOS}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not (self.noise_sd >= 0 and math.isfinite(self.noise_sd)):
            raise ValueError("noise_sd must be finite and >= 0")
        for k, v in DEFAULTS.get(self.id, {}).items():
            if getattr(self, k) is None:
                object.__setattr__(self, k, v)
        if self.m is not None and self.m < 1:
            raise ValueError("m must be >= 1")

    @property
    def d(self) -> int:
        return ADDITIVE_TRUTHS[self.id][0] if self.id in ADDITIVE_TRUTHS else 1

    @property
    def additive(self) -> bool:
        return self.id in ADDITIVE_TRUTHS

    @property
    def shape(self) -> Shape:
        """Shape class the estimator should use for this scenario."""
        return Shape.CONVEX if self.id in ("S3", "S4") else Shape.MONOTONE

    def truth(self, x):
        """Regression function; ``x`` is ``(k,)`` for univariate scenarios, ``(k, d)`` otherwise."""
        if self.id == "S1":
            return f1(x)
        if self.id == "S2":
            return f2(x, self.m, self.beta)
        if self.id == "S3":
            return f3(x, self.gamma)
        if self.id == "S4":
            return f4(x, self.m, self.beta)
        return additive_truth(self.id, x)

    def to_dict(self) -> dict:
        return asdict(self)

    def with_(self, **kw) -> "ScenarioSpec":
        d = self.to_dict()
        d.update(kw)
        return ScenarioSpec(**d)


def draw_covariates(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    return rng.random((n, d))


def generate(spec: ScenarioSpec) -> DataSet:
    x_seq, noise_seq = np.random.SeedSequence(spec.seed).spawn(2)
    x = draw_covariates(np.random.default_rng(x_seq), spec.n, spec.d)
    noise = np.random.default_rng(noise_seq).standard_normal(spec.n)
    f = spec.truth(x[:, 0] if spec.d == 1 else x)
    return DataSet(x, f + spec.noise_sd * noise)
