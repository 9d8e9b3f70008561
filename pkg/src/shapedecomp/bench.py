"""Simulation harness: MSE estimation, convergence slopes and robustness studies.

Every cell of an experiment draws its seed from :func:`stable_seed`, a
BLAKE2b hash of the base seed and the cell coordinates, so any single cell
can be re-run on its own and results do not depend on execution order.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .additive import backfit, select_alpha_additive
from .core import AlphaGrid, ShapeDecompError
from .decomp import fit_for_alpha, select_alpha
from .simgen import ScenarioSpec, generate

N_TEST = 100_000
DEFAULT_N_GRID = (250, 500, 1000, 2000, 4000, 8000)
ADDITIVE_N_GRID = (500, 1000, 2000, 4000, 8000)
DEFAULT_REPS = 50
METHOD = "lse+parametric"
THREADS_ENV = "SHAPEDECOMP_THREADS"


class InsufficientGrid(ShapeDecompError):
    pass


class InsufficientSplits(ShapeDecompError):
    pass


def stable_seed(*parts) -> int:
    """63-bit seed from the ``str`` of each part, stable across runs and platforms."""
    h = hashlib.blake2b("\x1f".join(str(p) for p in parts).encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little") >> 1


def default_workers() -> int:
    return max(1, int(os.environ.get(THREADS_ENV, "1")))


def _map(func, items, workers):
    if workers is None:
        workers = default_workers()
    if workers <= 1 or len(items) <= 1:
        return [func(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(func, items, chunksize=max(1, len(items) // (4 * workers))))


def estimate_mse(predictor, truth, n_test: int = N_TEST, seed: int = 0, d: int = 1) -> float:
    """Mean squared distance between ``predictor`` and ``truth`` over fresh uniform covariates.

    Observation noise is not included.
    """
    if n_test < 1:
        raise ValueError("n_test must be >= 1")
    x = np.random.default_rng(seed).random((n_test, d))
    if d == 1:
        x = x[:, 0]
    diff = np.asarray(predictor(x), dtype=float) - np.asarray(truth(x), dtype=float)
    return float(np.mean(diff * diff))


def fit_selected(spec: ScenarioSpec, data, seed: int, grid: AlphaGrid | None = None):
    """Run the selector appropriate to the scenario."""
    if spec.additive:
        return select_alpha_additive(data, grid, seed=seed)
    return select_alpha(data, grid, spec.shape, seed=seed)


def _alpha_value(a):
    return float(a) if np.ndim(a) == 0 else [float(v) for v in a]


@dataclass
class BenchReport:
    records: list = field(default_factory=list)
    slopes: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def sort(self) -> "BenchReport":
        self.records.sort(key=lambda r: (r["scenario"], r["method"], r["n"], r["rep"]))
        return self

    def mean_mse(self, scenario: str | None = None, method: str = METHOD) -> dict:
        groups: dict = {}
        for r in self.records:
            if r["method"] == method and (scenario is None or r["scenario"] == scenario):
                groups.setdefault(r["n"], []).append(r["mse"])
        return {n: float(np.mean(v)) for n, v in sorted(groups.items())}

    def to_dict(self) -> dict:
        return {"config": self.config, "records": self.records, "slopes": self.slopes}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "BenchReport":
        d = json.loads(text)
        return cls(d["records"], d.get("slopes", []), d.get("config", {}))

    def save(self, path, csv_path=None) -> None:
        path = Path(path)
        path.write_text(self.to_json() + "\n", encoding="utf-8")
        csv_path = path.with_suffix(".csv") if csv_path is None else Path(csv_path)
        self.write_records_csv(csv_path)

    def write_records_csv(self, path) -> None:
        cols = ["scenario", "method", "n", "rep", "seed", "alpha", "mse"]
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            for r in self.records:
                a = r.get("alpha")
                a = ";".join(repr(v) for v in a) if isinstance(a, list) else repr(a)
                w.writerow([r["scenario"], r["method"], r["n"], r["rep"], r["seed"], a, repr(r["mse"])])


def _convergence_cell(args):
    spec_dict, rep, base_seed, grid, n_test = args
    spec = ScenarioSpec(**spec_dict)
    data_seed = stable_seed(base_seed, spec.id, spec.n, rep, "data")
    split_seed = stable_seed(base_seed, spec.id, spec.n, rep, "split")
    test_seed = stable_seed(base_seed, spec.id, spec.n, rep, "test")
    data = generate(spec.with_(seed=data_seed))
    model = fit_selected(spec, data, split_seed, grid)
    mse = estimate_mse(model.predict, spec.truth, n_test, test_seed, spec.d)
    return {
        "scenario": spec.id,
        "method": METHOD,
        "n": spec.n,
        "rep": rep,
        "seed": data_seed,
        "alpha": _alpha_value(model.alpha),
        "mse": mse,
    }


def convergence_study(
    scenario,
    n_grid=DEFAULT_N_GRID,
    reps: int = DEFAULT_REPS,
    base_seed: int = 0,
    grid: AlphaGrid | None = None,
    n_test: int = N_TEST,
    workers: int | None = None,
    n_min: int | None = 2000,
) -> BenchReport:
    """Repeat generate / select / score over ``n_grid`` x ``reps``.

    ``scenario`` is a scenario id or a :class:`ScenarioSpec` (its ``n`` and
    ``seed`` are ignored). When ``n_min`` is set and at least two grid sizes
    reach it, the report carries the fitted log-log slope.
    """
    base = scenario if isinstance(scenario, ScenarioSpec) else ScenarioSpec(scenario, n=1)
    n_grid = [int(n) for n in n_grid]
    if n_grid != sorted(n_grid):
        raise ValueError("n_grid must be sorted ascending")
    if reps < 1:
        raise ValueError("reps must be >= 1")
    grid = AlphaGrid.default() if grid is None else grid
    cells = [(base.with_(n=n, seed=0).to_dict(), rep, base_seed, grid, n_test) for n in n_grid for rep in range(reps)]
    records = _map(_convergence_cell, cells, workers)
    config = {
        "study": "convergence",
        "scenario": base.with_(n=1, seed=0).to_dict(),
        "n_grid": n_grid,
        "reps": reps,
        "base_seed": base_seed,
        "grid": [_alpha_value(v) for v in grid.values],
        "refine": grid.refine,
        "n_test": n_test,
        "n_min": n_min,
    }
    report = BenchReport(records, [], config).sort()
    if n_min is not None and sum(n >= n_min for n in set(n_grid)) >= 2:
        report.slopes = [
            {"scenario": sc, "method": m, "slope": s, "n_min": n_min}
            for (sc, m), s in sorted(fit_slope(report, n_min).items())
        ]
    return report


def loglog_slope(ns, mses) -> float:
    """OLS slope of ``log(mse)`` on ``log(n)``."""
    lx = np.log(np.asarray(ns, dtype=float))
    ly = np.log(np.asarray(mses, dtype=float))
    lx = lx - lx.mean()
    return float(np.dot(lx, ly - ly.mean()) / np.dot(lx, lx))


def fit_slope(report: BenchReport, n_min: int = 2000) -> dict:
    """Slope per ``(scenario, method)`` of log mean MSE against log n, using ``n >= n_min``."""
    keys = sorted({(r["scenario"], r["method"]) for r in report.records})
    out = {}
    for sc, method in keys:
        means = {n: m for n, m in report.mean_mse(sc, method).items() if n >= n_min}
        if len(means) < 2:
            raise InsufficientGrid(f"{sc}/{method}: need two sample sizes >= {n_min}, have {sorted(means)}")
        out[(sc, method)] = loglog_slope(list(means), list(means.values()))
    return out


def _alpha_cell(args):
    spec_dict, alpha, rep, seed, n_test = args
    spec = ScenarioSpec(**spec_dict)
    data = generate(spec.with_(seed=stable_seed(seed, spec.id, spec.n, rep, "data")))
    if spec.additive:
        fit = backfit(data, np.full(spec.d, alpha))
    else:
        fit = fit_for_alpha(data, alpha, spec.shape)
    return estimate_mse(fit.predict, spec.truth, n_test, stable_seed(seed, spec.id, spec.n, rep, "test"), spec.d)


def alpha_sweep(scenario, n_list, alpha_list, reps: int = 20, seed: int = 0, n_test: int = N_TEST, workers=None):
    """Mean MSE for fixed penalty scales (no selection; all data used for fitting).

    The same datasets are reused across ``alpha_list`` for each ``(n, rep)``.
    Returns rows ``{"n", "alpha", "mean_mse"}``.
    """
    base = scenario if isinstance(scenario, ScenarioSpec) else ScenarioSpec(scenario, n=1)
    if any(a < 0 for a in alpha_list):
        raise ValueError("alpha values must be >= 0")
    cells = [
        (base.with_(n=int(n), seed=0).to_dict(), float(a), rep, seed, n_test)
        for n in n_list
        for a in alpha_list
        for rep in range(reps)
    ]
    mses = _map(_alpha_cell, cells, workers)
    rows = []
    i = 0
    for n in n_list:
        for a in alpha_list:
            rows.append({"n": int(n), "alpha": float(a), "mean_mse": float(np.mean(mses[i : i + reps]))})
            i += reps
    return rows


def _split_cell(args):
    spec_dict, data_seed, split_seed, grid, n_test, test_seed = args
    spec = ScenarioSpec(**spec_dict)
    data = generate(spec.with_(seed=data_seed))
    model = fit_selected(spec, data, split_seed, grid)
    mse = estimate_mse(model.predict, spec.truth, n_test, test_seed, spec.d)
    return {"split_seed": int(split_seed), "alpha": _alpha_value(model.alpha), "mse": mse}


def cv_split_robustness(
    scenario,
    n: int,
    n_splits: int = 300,
    data_seed: int = 0,
    split_seeds=None,
    grid: AlphaGrid | None = None,
    n_test: int = N_TEST,
    workers=None,
):
    """One dataset, many random splits; rows ``{"split_seed", "alpha", "mse"}``.

    All rows share one test sample so that only the split varies.
    """
    base = scenario if isinstance(scenario, ScenarioSpec) else ScenarioSpec(scenario, n=1)
    if split_seeds is None:
        split_seeds = [stable_seed(data_seed, base.id, n, k, "split") for k in range(n_splits)]
    split_seeds = list(split_seeds)
    if len(split_seeds) < 2:
        raise InsufficientSplits("need at least two splits")
    spec_dict = base.with_(n=int(n), seed=0).to_dict()
    test_seed = stable_seed(data_seed, base.id, n, "test")
    cells = [(spec_dict, data_seed, s, grid, n_test, test_seed) for s in split_seeds]
    return _map(_split_cell, cells, workers)


def m_sweep(family: str, m_list, n: int = 5000, reps: int = DEFAULT_REPS, seed: int = 0, beta: float = 1.0,
            grid: AlphaGrid | None = None, n_test: int = N_TEST, workers=None):
    """Mean MSE of the selected estimator against the number of pieces ``m``.

    ``family`` is ``"S2"`` (steps plus linear) or ``"S4"`` (convex pieces plus quadratic).
    """
    if family not in ("S2", "S4"):
        raise ValueError("family must be 'S2' or 'S4'")
    if not len(m_list):
        raise ValueError("m_list is empty")
    rows = []
    for m in m_list:
        spec = ScenarioSpec(family, n=1, m=int(m), beta=beta)
        rep = convergence_study(spec, [n], reps, stable_seed(seed, family, m), grid, n_test, workers, n_min=None)
        rows.append({"m": int(m), "mean_mse": rep.mean_mse(family)[n]})
    return rows
