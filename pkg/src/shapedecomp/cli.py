"""Command-line front end.

    shapedecomp simulate --scenario S1 --n 1000 --seed 7 --out data.csv
    shapedecomp fit --data data.csv --shape monotone --grid log:1e-2:1e2:16 --seed 7 --out model.json
    shapedecomp predict --model model.json --data new.csv --out pred.csv
    shapedecomp bench --suite convergence --scenario S1 --reps 50 --out report.json

Every JSON artifact carries a ``config`` block with the fully resolved
arguments; :func:`config_to_argv` turns it back into an argument list.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import bench
from .additive import select_alpha_additive
from .core import AlphaGrid, Shape, ShapeDecompError, format_float, load_csv, read_numeric_csv, save_csv
from .decomp import SelectedModel, select_alpha
from .simgen import SCENARIOS, ScenarioSpec, generate


def parse_grid(text: str) -> list[float]:
    """``log:<lo>:<hi>:<count>`` or ``list:v1,v2,...``; values must be >= 0."""
    kind, _, rest = text.partition(":")
    try:
        if kind == "log":
            lo, hi, count = rest.split(":")
            lo, hi, count = float(lo), float(hi), int(count)
            if not (0 < lo <= hi) or count < 1:
                raise ValueError
            vals = [float(v) for v in np.geomspace(lo, hi, count)] if count > 1 else [lo]
        elif kind == "list":
            vals = [float(v) for v in rest.split(",") if v.strip()]
            if not vals:
                raise ValueError
        else:
            raise ValueError
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid grid spec {text!r}; use log:<lo>:<hi>:<count> or list:v1,v2,...")
    if not all(np.isfinite(vals)) or min(vals) < 0:
        raise argparse.ArgumentTypeError(f"grid values must be finite and >= 0: {text!r}")
    return vals


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="shapedecomp", description="Shape-restricted decomposition regression.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="write a synthetic dataset as CSV plus a spec JSON")
    s.add_argument("--scenario", required=True, choices=SCENARIOS)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--noise-sd", type=float, default=0.1)
    s.add_argument("--m", type=int, default=None)
    s.add_argument("--beta", type=float, default=None)
    s.add_argument("--gamma", type=float, default=None)
    s.add_argument("--out", required=True)

    f = sub.add_parser("fit", help="select alpha and fit; writes model JSON")
    f.add_argument("--data", required=True)
    f.add_argument("--response", default="y")
    f.add_argument("--shape", choices=["monotone", "convex", "additive"], default=None,
                   help="default: monotone for one covariate, additive otherwise")
    f.add_argument("--grid", type=parse_grid, default=None, help="default log:1e-2:1e2:16")
    f.add_argument("--no-zero", action="store_true", help="do not append alpha = 0 to the grid")
    f.add_argument("--refine", action="store_true", help="golden-section refinement around the best grid alpha")
    f.add_argument("--seed", type=int, required=True)
    f.add_argument("--validate-size", type=int, default=None, help="default round(sqrt(n))")
    f.add_argument("--out", required=True)

    r = sub.add_parser("predict", help="evaluate a saved model on a CSV of covariates")
    r.add_argument("--model", required=True)
    r.add_argument("--data", required=True)
    r.add_argument("--response", default="y", help="column to drop if present")
    r.add_argument("--out", required=True)

    b = sub.add_parser("bench", help="run a simulation study")
    b.add_argument("--suite", required=True, choices=["convergence", "alpha", "cv", "msweep"])
    b.add_argument("--scenario", default="S1", choices=SCENARIOS)
    b.add_argument("--reps", type=int, default=bench.DEFAULT_REPS)
    b.add_argument("--n-grid", type=_int_list, default=None, help="convergence sizes, comma-separated")
    b.add_argument("--n", type=int, default=None, help="sample size for alpha/cv/msweep suites")
    b.add_argument("--alphas", type=_float_list, default=None, help="alpha suite values")
    b.add_argument("--splits", type=int, default=300, help="cv suite split count")
    b.add_argument("--m-list", type=_int_list, default=None, help="msweep piece counts")
    b.add_argument("--n-min", type=int, default=2000)
    b.add_argument("--n-test", type=int, default=bench.N_TEST)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--threads", type=int, default=None, help=f"worker processes (env {bench.THREADS_ENV})")
    b.add_argument("--out", required=True)
    return p


def _resolved(args) -> dict:
    cfg = {k: v for k, v in vars(args).items()}
    return json.loads(json.dumps(cfg))


def config_to_argv(config: dict) -> list[str]:
    """Rebuild an argument list from a resolved ``config`` block."""
    argv = [config["command"]]
    for k, v in config.items():
        if k == "command" or v is None or v is False:
            continue
        flag = "--" + k.replace("_", "-")
        if v is True:
            argv.append(flag)
        elif k == "grid":
            argv += [flag, "list:" + ",".join(format_float(a) for a in v)]
        elif isinstance(v, list):
            argv += [flag, ",".join(str(a) for a in v)]
        else:
            argv += [flag, str(v)]
    return argv


def _write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=1) + "\n", encoding="utf-8")


def cmd_simulate(args) -> None:
    spec = ScenarioSpec(args.scenario, args.n, args.seed, args.noise_sd, args.m, args.beta, args.gamma)
    save_csv(generate(spec), args.out)
    _write_json(Path(args.out).with_suffix(".json"), {"config": _resolved(args), "spec": spec.to_dict()})


def cmd_fit(args) -> None:
    data = load_csv(args.data, args.response)
    if args.shape is None:
        args.shape = "monotone" if data.d == 1 else "additive"
    if args.grid is None:
        args.grid = [float(v) for v in np.geomspace(1e-2, 1e2, 16)]
    if not args.no_zero and 0.0 not in args.grid:
        args.grid = [0.0] + list(args.grid)
    if args.validate_size is None:
        args.validate_size = int(round(np.sqrt(data.n)))
    grid = AlphaGrid(tuple(args.grid), args.refine)
    if args.shape == "additive":
        model = select_alpha_additive(data, grid, args.seed, args.validate_size)
    else:
        model = select_alpha(data, grid, Shape(args.shape), args.seed, args.validate_size)
    out = model.to_dict()
    out["columns"] = list(data.columns)
    out["config"] = _resolved(args)
    _write_json(args.out, out)


def load_model(path) -> SelectedModel:
    return SelectedModel.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def cmd_predict(args) -> None:
    blob = json.loads(Path(args.model).read_text(encoding="utf-8"))
    model = SelectedModel.from_dict(blob)
    header, table = read_numeric_csv(args.data)
    keep = [j for j, h in enumerate(header) if h != args.response]
    cols, x = [header[j] for j in keep], table[:, keep]
    pred = model.predict(x[:, 0] if blob["best"]["kind"] == "decomp" else x)
    pred = np.atleast_1d(pred)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols + ["prediction"])
        for xi, pi in zip(x, pred):
            w.writerow([format_float(v) for v in xi] + [format_float(pi)])


def cmd_bench(args) -> None:
    if args.threads is None:
        args.threads = bench.default_workers()
    spec = ScenarioSpec(args.scenario, n=1)
    if args.suite == "convergence":
        if args.n_grid is None:
            args.n_grid = list(bench.ADDITIVE_N_GRID if spec.additive else bench.DEFAULT_N_GRID)
        report = bench.convergence_study(spec, args.n_grid, args.reps, args.seed, n_test=args.n_test,
                                         workers=args.threads, n_min=args.n_min)
        report.config["cli"] = _resolved(args)
        report.save(args.out)
        return
    if args.suite == "alpha":
        args.n = 5000 if args.n is None else args.n
        args.alphas = args.alphas or [0.1, 1, 3, 4, 6, 8, 12]
        rows = bench.alpha_sweep(spec, [args.n], args.alphas, args.reps, args.seed, args.n_test, args.threads)
    elif args.suite == "cv":
        args.n = 500 if args.n is None else args.n
        rows = bench.cv_split_robustness(spec, args.n, args.splits, args.seed, n_test=args.n_test, workers=args.threads)
    else:
        args.n = 5000 if args.n is None else args.n
        args.m_list = args.m_list or [1, 2, 3, 4, 5]
        rows = bench.m_sweep(args.scenario, args.m_list, args.n, args.reps, args.seed, n_test=args.n_test,
                             workers=args.threads)
    _write_json(args.out, {"config": {"cli": _resolved(args)}, "rows": rows})
    with Path(args.out).with_suffix(".csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})


COMMANDS = {"simulate": cmd_simulate, "fit": cmd_fit, "predict": cmd_predict, "bench": cmd_bench}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        COMMANDS[args.command](args)
    except (ShapeDecompError, ValueError, OSError) as e:
        print(f"shapedecomp {args.command}: error: {e}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
