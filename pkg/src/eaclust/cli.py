"""Command-line front end: ``eaclust {fit,bic,evaluate,plot,reproduce}``.

Every subcommand writes one JSON object (or a table rendering of it) to
standard output or ``--out``. Failures still produce a report, with an
``error`` field, and a nonzero exit code: 2 usage, 3 data, 4 numerical.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, metrics
from .data import DataSpec, FIXTURE_CLASS_SIZES, fixture_path, load_csv, read_header
from .errors import DataError, EAClustError, InvalidArgumentError
from .experiments import METHODS, REPORT_VERSION, bic_sweep, reproduce_grid, run_method, run_report_row

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 2, 3, 4


def _add_data_flags(p, required=True):
    p.add_argument("--data", required=required, help="CSV path, or a bundled fixture name (wine, banknote, voles)")
    p.add_argument("--truth-col", help="column holding true classes (default: 'class' when present)")
    p.add_argument("--features", help="comma-separated feature columns (default: all but the truth column)")
    p.add_argument("--scale", action="store_true", help="standardize every feature column")


def _add_output_flags(p):
    p.add_argument("--out", help="write the report here instead of standard output")
    p.add_argument("--format", choices=("json", "table"), default="json")


def _add_method_flags(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--parents", type=int, default=2)
    p.add_argument("--clones", type=int, default=10)
    p.add_argument("--stagnation", type=int, default=3)
    p.add_argument("--restarts", type=int, default=25, help="k-means restarts")
    p.add_argument("--tol", type=float, default=1e-8, help="EM relative convergence tolerance")
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--ridge", type=float, default=0.0, help="added to covariance diagonals")
    p.add_argument("--threads", type=int, default=1, help="fitness-evaluation workers")
    p.add_argument("--max-generations", type=int, default=10_000)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eaclust", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"eaclust {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit one clustering method")
    p.add_argument("method", choices=METHODS)
    p.add_argument("--g", type=int, required=True, help="number of components")
    _add_data_flags(p)
    _add_method_flags(p)
    _add_output_flags(p)

    p = sub.add_parser("bic", help="BIC over a range of G")
    p.add_argument("--g-min", type=int, required=True)
    p.add_argument("--g-max", type=int, required=True)
    p.add_argument("--method", choices=("ea", "em"), default="em")
    _add_data_flags(p)
    _add_method_flags(p)
    _add_output_flags(p)

    p = sub.add_parser("evaluate", help="compare predicted labels with the truth")
    p.add_argument("--labels", required=True, help="labels file: one per line, or a fit report (JSON)")
    p.add_argument("--truth", help="truth file, one label per line")
    _add_data_flags(p, required=False)
    _add_output_flags(p)

    p = sub.add_parser("plot", help="2-d scatterplot of a labeling as SVG")
    p.add_argument("--labels", help="labels file or fit report (default: the truth column)")
    p.add_argument("--x", required=True, help="column for the horizontal axis")
    p.add_argument("--y", required=True, help="column for the vertical axis")
    p.add_argument("--svg", required=True, help="output SVG path")
    _add_data_flags(p)
    _add_output_flags(p)

    p = sub.add_parser("reproduce", help="EA over a stagnation x clones grid")
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--stagnation-grid", default="3,4,5")
    p.add_argument("--clones-grid", default="10,20,30,40")
    _add_data_flags(p)
    _add_method_flags(p)
    _add_output_flags(p)
    return parser


def _split(s):
    return [c.strip() for c in s.split(",") if c.strip()] if s else None


def _int_list(s, flag):
    try:
        vals = [int(v) for v in _split(s)]
    except (TypeError, ValueError):
        raise InvalidArgumentError(f"{flag} must be a comma-separated list of integers") from None
    if not vals:
        raise InvalidArgumentError(f"{flag} is empty")
    return vals


def resolve_data_path(name: str) -> Path:
    path = Path(name)
    if path.is_file():
        return path
    if name in FIXTURE_CLASS_SIZES:
        fp = fixture_path(name)
        if fp.is_file():
            return fp
        raise DataError(f"fixture {name!r} is not bundled; supply it as a CSV with a 'class' column")
    raise DataError(f"data file not found: {name}")


def load_data(args):
    path = resolve_data_path(args.data)
    truth = args.truth_col
    if truth is None and "class" in read_header(path):
        truth = "class"
    return load_csv(DataSpec(str(path), truth, _split(args.features), args.scale))


def read_labels(path) -> np.ndarray:
    """Labels from a fit report (JSON with ``final_labels``) or a one-per-line file."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"labels file not found: {path}")
    text = path.read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        try:
            labels = json.loads(text)["final_labels"]
        except (ValueError, KeyError):
            raise DataError(f"{path}: JSON without a 'final_labels' list") from None
    else:
        labels = [line.strip() for line in text.splitlines() if line.strip()]
    if not labels:
        raise DataError(f"{path}: no labels")
    return np.array([str(v) for v in labels])


def cmd_fit(args):
    data = load_data(args)
    return run_method(
        args.method, data, args.g, seed=args.seed, parents=args.parents, clones=args.clones,
        stagnation=args.stagnation, restarts=args.restarts, tol=args.tol, max_iter=args.max_iter,
        ridge=args.ridge, threads=args.threads, max_generations=args.max_generations,
    ).to_dict()


def _method_kwargs(args):
    return dict(seed=args.seed, parents=args.parents, clones=args.clones, stagnation=args.stagnation,
                restarts=args.restarts, tol=args.tol, max_iter=args.max_iter, ridge=args.ridge,
                threads=args.threads, max_generations=args.max_generations)


def cmd_bic(args):
    data = load_data(args)
    rows = bic_sweep(data, args.g_min, args.g_max, args.method, **_method_kwargs(args))
    return {"version": REPORT_VERSION, "command": "bic", "method": args.method, "n": data.n, "p": data.p,
            "rows": [vars(r) for r in rows]}


def cmd_evaluate(args):
    pred = read_labels(args.labels)
    if args.truth:
        truth = read_labels(args.truth)
    elif args.data:
        data = load_data(args)
        if data.truth is None:
            raise DataError("the data has no truth column; pass --truth-col or --truth")
        truth = data.truth.astype(str)
    else:
        raise InvalidArgumentError("evaluate needs --truth or --data")
    if truth.shape[0] != pred.shape[0]:
        raise InvalidArgumentError(f"{pred.shape[0]} predicted labels for {truth.shape[0]} true labels")
    return {"version": REPORT_VERSION, "command": "evaluate", **metrics.summary(truth, pred)}


def cmd_plot(args):
    from .plotting import scatter_svg

    data = load_data(args)
    names = list(data.feature_names)
    for col in (args.x, args.y):
        if col not in names:
            raise DataError(f"column {col!r} not among features {names}")
    if args.labels:
        labels = read_labels(args.labels)
    elif data.truth is not None:
        labels = data.truth.astype(str)
    else:
        raise DataError("no labels: pass --labels or a data file with a truth column")
    if labels.shape[0] != data.n:
        raise InvalidArgumentError(f"{labels.shape[0]} labels for {data.n} observations")
    X = data.observations
    groups = scatter_svg(X[:, names.index(args.x)], X[:, names.index(args.y)], labels, args.svg, args.x, args.y)
    return {"version": REPORT_VERSION, "command": "plot", "svg": str(args.svg), "groups": groups}


def cmd_reproduce(args):
    data = load_data(args)
    stag = _int_list(args.stagnation_grid, "--stagnation-grid")
    clones = _int_list(args.clones_grid, "--clones-grid")
    em = run_method("em", data, args.g, seed=args.seed, restarts=args.restarts, tol=args.tol,
                    max_iter=args.max_iter, ridge=args.ridge)
    reports = reproduce_grid(data, args.g, stag, clones, args.seed, args.restarts, args.threads)
    return {"version": REPORT_VERSION, "command": "reproduce", "G": args.g, "seed": args.seed,
            "em": run_report_row(em), "runs": [run_report_row(r) for r in reports]}


COMMANDS = {"fit": cmd_fit, "bic": cmd_bic, "evaluate": cmd_evaluate, "plot": cmd_plot, "reproduce": cmd_reproduce}


def render_table(report: dict) -> str:
    """Human-readable rendering of a report dict."""
    lines = []
    for key in sorted(report):
        val = report[key]
        if key == "confusion" and val:
            cm = metrics.ConfusionMatrix.from_dict(val)
            lines.append("confusion:")
            lines.extend("  " + row for row in str(cm).splitlines())
        elif key in ("rows", "runs") and val:
            cols = list(val[0])
            lines.append(f"{key}:")
            lines.append("  " + "\t".join(cols))
            lines.extend("  " + "\t".join(_fmt(r[c]) for c in cols) for r in val)
        elif key == "final_labels":
            lines.append(f"{key}: {' '.join(map(str, val))}")
        else:
            lines.append(f"{key}: {_fmt(val)}")
    return "\n".join(lines)


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, dict):
        return json.dumps(v, sort_keys=True)
    return str(v)


def _emit(report: dict, args) -> None:
    if args.format == "table":
        text = render_table(report) + "\n"
    else:
        text = json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report = COMMANDS[args.command](args)
        code = EXIT_OK
    except (EAClustError, ValueError) as exc:
        code = getattr(exc, "exit_code", EXIT_USAGE)
        report = {
            "version": REPORT_VERSION,
            "command": args.command,
            "error": {"type": type(exc).__name__, "message": str(exc), "exit_code": code},
        }
        if getattr(args, "method", None):
            report["method"] = args.method
        print(f"eaclust {args.command}: {exc}", file=sys.stderr)
    _emit(report, args)
    return code


if __name__ == "__main__":
    sys.exit(main())
