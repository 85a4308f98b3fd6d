"""``logan simulate|test|fdr|bench``.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
Reports are JSON with sorted keys and a header holding the resolved
configuration, so identical inputs give byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bench import FDR_ALPHAS, ROC_ALPHAS, BenchConfig, run_bench, summarize, write_metrics
from .bench import write_replications
from .dagfit import SOLVERS, NotearsConvergenceError, NotearsSettings
from .data import DataError, read_csv, write_csv
from .debias import DegenerateProjection
from .mediate import (
    LoganSettings,
    fdr_from_splits,
    report_multisplit,
    report_single,
    run_split,
)
from .sem import SCENARIOS, ModelError, ScenarioConfig, generate_scenario, mediation_strength
from .sem import sample, scenario_model

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# helpers
# --------------------------------------------------------------------------


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def _write_json(path, payload):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_clean(payload), indent=1, sort_keys=True) + "\n",
                    encoding="utf-8")


def _header(args):
    config = {k: v for k, v in vars(args).items() if k != "func"}
    return {"program": "logan", "version": __version__, "command": args.command,
            "config": config, "seed": getattr(args, "seed", None)}


def _alpha(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1), got {value}")
    return value


def _alpha_list(text):
    return [_alpha(t) for t in text.split(",") if t.strip()]


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _existing_file(text):
    if not Path(text).is_file():
        raise argparse.ArgumentTypeError(f"file not found: {text}")
    return text


def _settings(args):
    notears = NotearsSettings(lam=args.lam, kappa=args.kappa, threshold_c0=args.threshold_c0,
                              solver=args.solver)
    return LoganSettings(notears=notears, m=args.m, seed=args.seed)


def _load_data(args):
    exposure, outcome, mediators = args.exposure, args.outcome, args.mediators
    if args.roles:
        try:
            roles = json.loads(Path(args.roles).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"{args.roles}: cannot read role map: {exc}") from exc
        for key in ("exposure", "outcome"):
            if not isinstance(roles.get(key), str):
                raise DataError(f"{args.roles}: role map must name exactly one {key}")
        exposure, outcome = roles["exposure"], roles["outcome"]
        mediators = roles.get("mediators")
    elif mediators is not None:
        mediators = [m.strip() for m in mediators.split(",") if m.strip()]
    return read_csv(args.data, exposure=exposure, outcome=outcome, mediators=mediators)


def _resolve_mediator(data, token):
    if token in data.columns[1:-1]:
        return data.columns.index(token)
    try:
        q = int(token)
    except ValueError:
        raise UsageError(f"unknown mediator {token!r}") from None
    if not 1 <= q <= data.d:
        raise UsageError(f"mediator index {q} outside 1..{data.d}")
    return q


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_simulate(args):
    explicit = [args.d, args.p1, args.p2]
    if args.scenario and any(v is not None for v in explicit):
        raise UsageError("give either --scenario or --d/--p1/--p2, not both")
    if args.scenario:
        model = scenario_model(args.scenario, seed=args.seed)
    else:
        if any(v is None for v in explicit):
            raise UsageError("--d, --p1 and --p2 are required without --scenario")
        try:
            model = generate_scenario(ScenarioConfig(args.d, args.p1, args.p2, args.n, args.seed))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    data = sample(model, args.n, seed=args.seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = out / args.prefix
    write_csv(data, f"{stem}_data.csv")
    model.save(f"{stem}_model.json")
    delta = mediation_strength(model)
    with open(f"{stem}_delta.csv", "w", encoding="utf-8") as fh:
        fh.write("mediator,name,delta\n")
        for q, v in enumerate(delta, start=1):
            fh.write(f"{q},{data.columns[q]},{float(v)!r}\n")
    print(f"wrote {stem}_data.csv ({data.n} x {data.values.shape[1]}), "
          f"{stem}_model.json, {stem}_delta.csv")
    return EXIT_OK


def _print_test_table(reports):
    print(f"{'mediator':>12} {'decision':>9} {'p':>8}  per-half (p_exposure, p_outcome)")
    for r in reports:
        p = "-" if r.p_value is None else f"{r.p_value:.4f}"
        halves = "  ".join(f"[{h['p_exposure']:.3f}, {h['p_outcome']:.3f}]" for h in r.halves)
        print(f"{r.name:>12} {'reject' if r.reject else 'retain':>9} {p:>8}  {halves}")


def cmd_test(args):
    data = _load_data(args)
    if args.all == (args.q is not None):
        raise UsageError("give exactly one of --q or --all")
    targets = range(1, data.d + 1) if args.all else [_resolve_mediator(data, args.q)]
    settings = _settings(args)
    splits = [run_split(data, settings, s, keep_fits=False) for s in range(args.multisplit)]
    reports = []
    for q in targets:
        if args.multisplit > 1:
            rep = report_multisplit(splits, q, args.alpha, args.gamma, data.columns[q])
        else:
            rep = report_single(splits[0], q, args.alpha, data.columns[q])
        reports.append(rep)
    failed = sum(hr.failed for sr in splits for hr in sr.halves)
    payload = {"header": _header(args), "failed_halves": failed,
               "reports": [r.to_dict() for r in reports]}
    _write_json(args.out, payload)
    _print_test_table(reports)
    if failed:
        print(f"warning: {failed} half fit(s) failed and were retained by default",
              file=sys.stderr)
    return EXIT_OK


def cmd_fdr(args):
    data = _load_data(args)
    sr = run_split(data, _settings(args), keep_fits=False)
    main = fdr_from_splits(sr, args.alpha, True, list(data.columns))
    payload = {"header": _header(args), "logan": main.to_dict()}
    print(f"selected mediators at alpha = {args.alpha}:")
    for q, name in zip(main.selected, main.names or []):
        print(f"  {q:>4}  {name}")
    if not main.selected:
        print("  (none)")
    if args.baseline == "by":
        base = fdr_from_splits(sr, args.alpha, False, list(data.columns))
        payload["by"] = base.to_dict()
        print(f"BY baseline selects {len(base.selected)}: {', '.join(base.names) or '(none)'}")
    _write_json(args.out, payload)
    return EXIT_OK


def cmd_bench(args):
    model = scenario_model(args.scenario, seed=args.graph_seed)
    cfg = BenchConfig(n_values=tuple(args.n), replications=args.replications,
                      alphas=tuple(args.alphas), fdr_alphas=tuple(args.fdr_alphas),
                      n_splits=args.multisplit, gamma=args.gamma, seed=args.seed,
                      settings=_settings(args))

    def progress(done, total):
        if args.verbose:
            print(f"\r{done}/{total} replications", end="", file=sys.stderr, flush=True)

    results = run_bench(model, cfg, progress)
    if args.verbose:
        print(file=sys.stderr)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = summarize(results, model, cfg)
    write_metrics(rows, out / "metrics.csv")
    write_replications(results, out / "replications.csv")
    _write_json(out / "bench.json", {"header": _header(args), "bench": cfg.to_dict(),
                                     "delta": mediation_strength(model)})
    for row in rows:
        if row[0] in ("sigma2_mean", "failed_halves"):
            print(f"n={row[2]}: {row[0]} = {row[6]:.4g}")
    print(f"wrote {out / 'metrics.csv'}, {out / 'replications.csv'}, {out / 'bench.json'}")
    return EXIT_OK


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def _add_estimation(p):
    p.add_argument("--alpha", type=_alpha, default=0.05)
    p.add_argument("--m", type=int, default=2000, help="bootstrap draws (>= 100)")
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="L1 weight of the initial DAG fit (default: kappa*sqrt(log n / n))")
    p.add_argument("--kappa", type=float, default=0.5)
    p.add_argument("--threshold-c0", type=float, default=1e-3)
    p.add_argument("--solver", choices=SOLVERS, default="order")
    p.add_argument("--seed", type=int, default=0)


def _add_roles(p):
    p.add_argument("--data", type=_existing_file, required=True, help="CSV with a header row")
    p.add_argument("--exposure", help="exposure column (default: first column)")
    p.add_argument("--outcome", help="outcome column (default: last column)")
    p.add_argument("--mediators", help="comma-separated mediator columns (default: the rest)")
    p.add_argument("--roles", type=_existing_file,
                   help='JSON role map {"exposure": ..., "outcome": ..., "mediators": [...]}')


def build_parser():
    parser = argparse.ArgumentParser(prog="logan", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"logan {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="draw a dataset from a scenario")
    p.add_argument("--scenario", choices=sorted(SCENARIOS) + ["A-fixture"])
    p.add_argument("--d", type=_positive_int)
    p.add_argument("--p1", type=float)
    p.add_argument("--p2", type=float)
    p.add_argument("--n", type=_positive_int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--prefix", default="sim")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("test", help="test individual mediators")
    _add_roles(p)
    p.add_argument("--q", help="mediator index (1-based) or column name")
    p.add_argument("--all", action="store_true", help="test every mediator")
    _add_estimation(p)
    p.add_argument("--multisplit", type=_positive_int, default=1, metavar="S")
    p.add_argument("--gamma", type=_alpha, default=0.15)
    p.add_argument("--out", default="logan_test.json")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("fdr", help="FDR-controlled mediator selection")
    _add_roles(p)
    _add_estimation(p)
    p.set_defaults(alpha=0.1)
    p.add_argument("--baseline", choices=("none", "by"), default="none")
    p.add_argument("--out", default="logan_fdr.json")
    p.set_defaults(func=cmd_fdr)

    p = sub.add_parser("bench", help="replication benchmark")
    p.add_argument("--scenario", choices=sorted(SCENARIOS) + ["A-fixture"], default="A-fixture")
    p.add_argument("--graph-seed", type=int, default=0,
                   help="seed of the random graph for preset scenarios")
    p.add_argument("--n", type=_positive_int, nargs="+", default=[100, 200])
    p.add_argument("--replications", "-R", type=_positive_int, default=100)
    p.add_argument("--alphas", type=_alpha_list, default=list(ROC_ALPHAS))
    p.add_argument("--fdr-alphas", type=_alpha_list, default=list(FDR_ALPHAS))
    _add_estimation(p)
    p.add_argument("--multisplit", type=_positive_int, default=1, metavar="S")
    p.add_argument("--gamma", type=_alpha, default=0.15)
    p.add_argument("--out-dir", default="bench_out")
    p.add_argument("--verbose", "-v", action="store_true")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "m", 2000) < 100:
            raise UsageError("--m must be at least 100")
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"logan: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, ModelError) as exc:
        print(f"logan: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NotearsConvergenceError, DegenerateProjection, FloatingPointError,
            np.linalg.LinAlgError) as exc:
        print(f"logan: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"logan: I/O error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
