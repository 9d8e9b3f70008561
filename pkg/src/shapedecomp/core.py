"""Shared data types, CSV I/O, seeded splitting and the alpha grid.

Randomness everywhere in the package comes from numpy's ``PCG64`` bit
generator (``np.random.default_rng(seed)``), whose output stream is fixed
across platforms for a given integer seed.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class ShapeDecompError(Exception):
    """Base class for errors raised by this package."""


class MissingColumn(ShapeDecompError):
    pass


class NonNumericCell(ShapeDecompError):
    def __init__(self, row: int, col: str, value: str):
        self.row = row
        self.col = col
        self.value = value
        super().__init__(f"row {row}, column {col!r}: cannot parse {value!r} as a finite real")


class EmptyFile(ShapeDecompError):
    pass


class InvalidSplitSize(ShapeDecompError):
    pass


class InvalidData(ShapeDecompError):
    pass


class DimensionMismatch(ShapeDecompError):
    pass


class EmptyGrid(ShapeDecompError):
    pass


class Shape(enum.Enum):
    """Shape class of the nonparametric part.

    ``MONOTONE`` pairs with the linear term ``alpha * x``; ``CONVEX`` pairs
    with ``(alpha / 2) * x**2``.
    """

    MONOTONE = "monotone"
    CONVEX = "convex"

    def penalty(self, alpha: float, x):
        x = np.asarray(x, dtype=float)
        if self is Shape.MONOTONE:
            return alpha * x
        return 0.5 * alpha * x * x


@dataclass(frozen=True, eq=False)
class DataSet:
    """``n`` observations of a ``d``-dimensional covariate and a response.

    Rows keep their source order. Arrays are read-only copies.
    """

    x: np.ndarray
    y: np.ndarray
    columns: tuple[str, ...] = ()

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        y = np.array(self.y, dtype=float).reshape(-1)
        if x.ndim != 2 or x.shape[0] != y.shape[0]:
            raise InvalidData(f"x has shape {x.shape}, y has {y.shape[0]} rows")
        if x.shape[0] < 1 or x.shape[1] < 1:
            raise InvalidData("need at least one row and one covariate")
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise InvalidData("non-finite value in data")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if not self.columns:
            object.__setattr__(self, "columns", default_columns(x.shape[1]))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    def subset(self, idx) -> "DataSet":
        idx = np.asarray(idx, dtype=np.int64)
        return DataSet(self.x[idx], self.y[idx], self.columns)

    def __eq__(self, other):
        if not isinstance(other, DataSet):
            return NotImplemented
        return (
            self.columns == other.columns
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.y, other.y)
        )


def default_columns(d: int) -> tuple[str, ...]:
    return tuple(f"x{j + 1}" for j in range(d)) + ("y",)


def read_numeric_csv(path) -> tuple[list[str], np.ndarray]:
    """Header and a float table from a comma-separated file.

    Row numbers in errors are 1-based data rows (header excluded).
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptyFile(f"{path}: no header row")
        header = [h.strip() for h in header]
        rows = []
        for i, raw in enumerate(reader, start=1):
            if not raw:
                continue
            if len(raw) != len(header):
                raise NonNumericCell(i, "<row>", ",".join(raw))
            vals = []
            for col, cell in zip(header, raw):
                try:
                    v = float(cell)
                except ValueError:
                    raise NonNumericCell(i, col, cell) from None
                if not math.isfinite(v):
                    raise NonNumericCell(i, col, cell)
                vals.append(v)
            rows.append(vals)
    if not rows:
        raise EmptyFile(f"{path}: no data rows")
    return header, np.array(rows, dtype=float)


def load_csv(path, response_column: str = "y") -> DataSet:
    """Read a dataset; every column other than ``response_column`` is a covariate, in file order."""
    header, table = read_numeric_csv(path)
    if response_column not in header:
        raise MissingColumn(f"{path}: response column {response_column!r} not in {header}")
    yi = header.index(response_column)
    xcols = [j for j in range(len(header)) if j != yi]
    if not xcols:
        raise MissingColumn(f"{path}: no covariate columns besides {response_column!r}")
    columns = tuple(header[j] for j in xcols) + (response_column,)
    return DataSet(table[:, xcols], table[:, yi], columns)


def format_float(v: float) -> str:
    # 17 significant digits round-trip every double
    return format(float(v), ".17g")


def save_csv(data: DataSet, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(data.columns)
        for xi, yi in zip(data.x, data.y):
            w.writerow([format_float(v) for v in xi] + [format_float(yi)])


@dataclass(frozen=True, eq=False)
class SplitIndices:
    """Disjoint train / validation index sets (0-based, sorted)."""

    train: np.ndarray
    validate: np.ndarray
    seed: int

    def __eq__(self, other):
        if not isinstance(other, SplitIndices):
            return NotImplemented
        return (
            self.seed == other.seed
            and np.array_equal(self.train, other.train)
            and np.array_equal(self.validate, other.validate)
        )

    def to_dict(self) -> dict:
        return {
            "seed": int(self.seed),
            "train": [int(i) for i in self.train],
            "validate": [int(i) for i in self.validate],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SplitIndices":
        return cls(
            np.asarray(d["train"], dtype=np.int64),
            np.asarray(d["validate"], dtype=np.int64),
            int(d["seed"]),
        )


def default_validate_size(n: int) -> int:
    return int(round(math.sqrt(n)))


def split(n: int, validate_size: int | None = None, seed: int = 0) -> SplitIndices:
    """Draw a uniformly random validation subset of ``validate_size`` indices.

    ``validate_size`` defaults to ``round(sqrt(n))``.
    """
    if validate_size is None:
        validate_size = default_validate_size(n)
    if not (1 <= validate_size <= n - 1):
        raise InvalidSplitSize(f"validate_size={validate_size} must be in [1, {n - 1}] for n={n}")
    rng = np.random.default_rng(seed)
    validate = np.sort(rng.choice(n, size=validate_size, replace=False)).astype(np.int64)
    mask = np.ones(n, dtype=bool)
    mask[validate] = False
    train = np.flatnonzero(mask).astype(np.int64)
    train.setflags(write=False)
    validate.setflags(write=False)
    return SplitIndices(train, validate, int(seed))


def log_grid(lo: float = 1e-2, hi: float = 1e2, count: int = 16, include_zero: bool = True) -> list[float]:
    vals = list(np.geomspace(lo, hi, count)) if count > 1 else [float(lo)]
    if include_zero:
        vals = [0.0] + vals
    return [float(v) for v in vals]


@dataclass(frozen=True)
class AlphaGrid:
    """Candidate penalty scales.

    ``values`` holds one entry per candidate; each entry is a scalar (used for
    every coordinate) or a length-``d`` tuple. ``refine`` enables the
    golden-section search around the best grid point.
    """

    values: tuple = field(default_factory=lambda: tuple(log_grid()))
    refine: bool = False

    def __post_init__(self):
        vals = []
        for v in self.values:
            if np.ndim(v) == 0:
                vals.append(float(v))
            else:
                vals.append(tuple(float(t) for t in v))
        if not vals:
            raise EmptyGrid("alpha grid is empty")
        flat = np.concatenate([np.atleast_1d(np.asarray(v, dtype=float)) for v in vals])
        if not np.isfinite(flat).all():
            raise ValueError("alpha grid has non-finite entries")
        if (flat < 0).any():
            raise ValueError("alpha grid entries must be >= 0")
        object.__setattr__(self, "values", tuple(vals))

    @classmethod
    def default(cls, refine: bool = False) -> "AlphaGrid":
        return cls(tuple(log_grid()), refine)

    def vectors(self, d: int) -> list[np.ndarray]:
        """Candidates as length-``d`` arrays; scalars are replicated."""
        out = []
        for v in self.values:
            a = np.full(d, v, dtype=float) if np.ndim(v) == 0 else np.asarray(v, dtype=float)
            if a.shape != (d,):
                raise DimensionMismatch(f"alpha candidate {v} does not have dimension {d}")
            out.append(a)
        return out
