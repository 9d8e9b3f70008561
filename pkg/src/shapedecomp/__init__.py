"""Nonparametric regression through shape-restricted decompositions.

A Lipschitz regression function is a non-decreasing function minus a linear
term, and a function with Lipschitz derivative is a convex function minus a
quadratic term. The estimators here fit the shape-restricted part by isotonic
or convex least squares on augmented responses and choose the scale of the
parametric term on a held-out split.
"""

from .additive import AdditiveFit, NotConverged, backfit, predict_additive, select_alpha_additive
from .convexreg import PiecewiseLinearFit, SolverNotConverged, convex_regression, evaluate_pwl, fit_convex_lse
from .core import (
    AlphaGrid,
    DataSet,
    DimensionMismatch,
    EmptyFile,
    EmptyGrid,
    InvalidSplitSize,
    MissingColumn,
    NonNumericCell,
    Shape,
    ShapeDecompError,
    SplitIndices,
    load_csv,
    log_grid,
    save_csv,
    split,
)
from .decomp import DecompFit, SelectedModel, augment, fit_for_alpha, predict, select_alpha, validation_sse
from .isotonic import StepFit, collapse_ties, evaluate_step, fit_isotonic, isotonic_regression, pava
from .simgen import ScenarioSpec, generate

__all__ = [
    "AdditiveFit",
    "AlphaGrid",
    "DataSet",
    "DecompFit",
    "DimensionMismatch",
    "EmptyFile",
    "EmptyGrid",
    "InvalidSplitSize",
    "MissingColumn",
    "NonNumericCell",
    "NotConverged",
    "PiecewiseLinearFit",
    "ScenarioSpec",
    "SelectedModel",
    "Shape",
    "ShapeDecompError",
    "SolverNotConverged",
    "SplitIndices",
    "StepFit",
    "augment",
    "backfit",
    "collapse_ties",
    "convex_regression",
    "evaluate_pwl",
    "evaluate_step",
    "fit_convex_lse",
    "fit_for_alpha",
    "fit_isotonic",
    "generate",
    "isotonic_regression",
    "load_csv",
    "log_grid",
    "pava",
    "predict",
    "predict_additive",
    "save_csv",
    "select_alpha",
    "select_alpha_additive",
    "split",
    "validation_sse",
]
