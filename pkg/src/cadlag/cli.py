"""Command-line interface: ``cadlag <verb> [options]``.

Exit codes: 0 on success, 1 on a domain or parse error, 2 on a usage error.
"""
import argparse
import csv
import inspect
import io
import json
import sys

from . import harness, laws
from .errors import CadlagError, ConfigError, ModeError
from .io import format_path, format_paths, read_measure, read_path
from .metrics import d_infinity, prokhorov_distance, skorokhod_distance
from .paths import DEFAULT_GRID_STEP, largest_jump, modulus, uniform_distance
from .simulate import (FUNCTIONALS, IncrementLaw, PiecewiseLinearCDF, SeededStream,
                       apply_functional, bridge_transform, donsker_path, empirical_path,
                       poisson_path)
from .walks import STAT_FIELDS, count_table, enumerate_walks

LAW_PARAMS = sorted({p for _, names in laws.LAWS.values() for p in names})
PROBES = ("tightness", "moment-condition", "local-limit", "multinomial-cov", "bridge-conditioning")
PROCESSES = ("donsker-D", "donsker-C", "poisson", "empirical", "bridge")


# probe -> (n, replicas); replicas of bridge-conditioning count accepted walks
_PROBE_DEFAULTS = {"tightness": (400, 2000), "moment-condition": (400, 20000),
                   "local-limit": (10_000, 1), "multinomial-cov": (1000, 100_000),
                   "bridge-conditioning": (400, 5000)}
_PROBE_TOLERANCES = {"tightness": 0.05, "local-limit": 0.01, "multinomial-cov": 0.01,
                     "bridge-conditioning": 0.04}


class UsageError(Exception):
    pass


def _num(x):
    return repr(float(x))


def _emit(args, text):
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _csv(rows):
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _record(args, fields):
    """Emit a flat record as plain lines, JSON or a two-column CSV."""
    if args.format == "json":
        return _json(fields)
    if args.format == "csv":
        return _csv([["field", "value"]] + [[k, v] for k, v in fields.items()])
    return "".join(f"{k} {v}\n" for k, v in fields.items())


# ---------------------------------------------------------------------------
# verbs


def cmd_paths(args):
    x = read_path(args.path)
    times, sizes = x.jumps()
    out = {"kind": "step" if x.is_step else "pl", "segments": x.n_segments,
           "sup": x.sup(), "inf": x.inf(), "largest_jump": largest_jump(x),
           "jumps": len(times)}
    if args.delta is not None:
        if args.exact and not x.is_step:
            raise ModeError("exact moduli need a piecewise-constant path")
        for kind in ("w", "w_prime", "w_double_prime"):
            m = modulus(x, args.delta, kind, grid_step=args.grid_step)
            out[kind], out[kind + "_error"] = m.value, m.error_bound
    if args.format is None:
        return "".join(f"{k} {v}\n" for k, v in out.items())
    return _record(args, out)


def cmd_metric(args):
    x, y = read_path(args.x), read_path(args.y)
    if args.kind == "uniform":
        value, err = uniform_distance(x, y), 0.0
    elif args.kind == "dinf":
        value, err = d_infinity(x, y, terms=args.terms, grid_step=args.grid_step)
    else:
        est = skorokhod_distance(x, y, args.kind, mode=args.mode, grid_step=args.grid_step)
        value, err = est.value, est.error_bound
    if args.format is None:
        return f"{value:.{args.precision}g}\n"
    return _record(args, {"kind": args.kind, "value": value, "error_bound": err})


def cmd_prokhorov(args):
    P, Q = read_measure(args.p), read_measure(args.q)
    value = prokhorov_distance(P, Q, flow=args.flow)
    if args.format is None:
        return f"{value:.{args.precision}g}\n"
    return _record(args, {"value": value, "method": "flow" if args.flow else "exact"})


def _law_value(name, params, control):
    fn, names = laws.LAWS[name]
    kw = {"control": control} if "control" in inspect.signature(fn).parameters else {}
    return fn(*(params[p] for p in names), **kw)


def cmd_law(args):
    fn, names = laws.LAWS[args.name]
    control = laws.SeriesControl(abs_tol=args.abs_tol, max_terms=args.max_terms)
    if args.table:
        with open(args.table, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            missing = [p for p in names if p not in (reader.fieldnames or [])]
            if missing:
                raise UsageError(f"table lacks columns {missing} for law {args.name!r}")
            rows = [list(names) + ["value"]]
            for row in reader:
                try:
                    params = {p: float(row[p]) for p in names}
                except ValueError as exc:
                    raise UsageError(f"table line {reader.line_num}: {exc}") from None
                rows.append([row[p] for p in names] + [_num(_law_value(args.name, params, control))])
        return _csv(rows)
    given = {p: getattr(args, p) for p in LAW_PARAMS if getattr(args, p) is not None}
    missing = [p for p in names if p not in given]
    extra = [p for p in given if p not in names]
    if missing or extra:
        raise UsageError(f"law {args.name!r} takes parameters {list(names)}")
    value = _law_value(args.name, given, control)
    if args.format is None:
        return f"{value:.{args.precision}g}\n"
    return _record(args, {"name": args.name, **given, "value": value})


def cmd_walks(args):
    stats = enumerate_walks(args.n)
    fields = tuple(f.strip() for f in args.fields.split(",") if f.strip())
    bad = [f for f in fields if f not in STAT_FIELDS]
    if bad or not fields:
        raise UsageError(f"fields must be drawn from {list(STAT_FIELDS)}")
    rows = count_table(stats, fields)
    if args.format == "json":
        return _json({"n": args.n, "convention": stats.convention, "total": stats.total,
                      "fields": list(fields), "rows": [list(r) for r in rows]})
    return _csv([list(fields) + ["count"]] + [list(r) for r in rows])


def _simulate_one(args, r):
    stream = SeededStream(args.seed, r)
    if args.process in ("donsker-D", "donsker-C", "bridge"):
        x = donsker_path(args.n, IncrementLaw(args.law), stream,
                         "D" if args.process == "donsker-D" else "C")
        return bridge_transform(x) if args.process == "bridge" else x
    if args.process == "poisson":
        return poisson_path(args.n, args.alpha, stream)
    return empirical_path(args.n, PiecewiseLinearCDF.uniform(), stream)


def cmd_simulate(args):
    if args.stat:
        rows = [["replica", "value"]]
        for r in range(args.replicas):
            rows.append([r, _num(apply_functional(_simulate_one(args, r), args.stat))])
        return _csv(rows)
    paths = [_simulate_one(args, r) for r in range(args.replicas)]
    return format_path(paths[0]) if len(paths) == 1 else format_paths(paths)


def _probe_report(args):
    deltas = [float(d) for d in args.deltas.split(",")]
    if args.experiment == "tightness":
        rep = harness.tightness_probe(args.process_name, args.n, args.replicas, deltas,
                                      args.epsilon, seed=args.seed, threshold=args.tolerance)
        d = rep.to_dict()
        d["passed"] = rep.monotone and rep.tight
        return d
    if args.experiment == "moment-condition":
        triples = [(0.0, 0.1, 0.2), (0.1, 0.3, 0.5), (0.0, 0.5, 1.0), (0.2, 0.25, 0.3),
                   (0.4, 0.7, 0.9), (0.6, 0.8, 1.0), (0.25, 0.5, 0.75), (0.5, 0.5, 0.6),
                   (0.3, 0.3 + 0.25 / args.n, 0.3 + 0.5 / args.n), (0.0, 0.9 / args.n, 0.95 / args.n)]
        rows = harness.moment_condition_probe(args.n, args.replicas, triples, seed=args.seed,
                                              law="rademacher")
        return {"rows": [vars(r) for r in rows], "passed": all(r.passed for r in rows)}
    if args.experiment == "local-limit":
        err = harness.local_limit_probe(args.n, args.p)
        return {"n": args.n, "p": args.p, "error": err, "tolerance": args.tolerance,
                "passed": err <= args.tolerance}
    if args.experiment == "multinomial-cov":
        probs = [float(v) for v in args.probs.split(",")]
        return vars(harness.multinomial_cov_probe(args.n, probs, args.replicas, seed=args.seed,
                                                  tolerance=args.tolerance))
    rep = harness.bridge_conditioning_probe(args.b, args.epsilon, args.n, args.replicas,
                                            seed=args.seed, tolerance=args.tolerance)
    return vars(rep)


def cmd_verify(args):
    if args.experiment in PROBES:
        if args.tolerance is None:
            args.tolerance = _PROBE_TOLERANCES.get(args.experiment)
        report = _probe_report(args)
        if args.format == "csv":
            flat = {k: v for k, v in report.items() if not isinstance(v, (list, dict))}
            return _csv([["field", "value"]] + [[k, v] for k, v in flat.items()])
        return _json(report)
    cfg = harness.ExperimentConfig.preset(args.experiment, n=args.n, replicas=args.replicas,
                                          seed=args.seed, tolerance=args.tolerance, law=args.law,
                                          workers=args.workers, alpha=args.alpha)
    report = harness.run_convergence_experiment(cfg)
    return report.to_csv() if args.format == "csv" else report.to_json()


# ---------------------------------------------------------------------------
# parser


def _positive_float(s):
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _nonneg_int(s):
    v = int(s)
    if v < 0:
        raise argparse.ArgumentTypeError("must be a nonnegative integer")
    return v


def _add_output(p, formats=("csv", "json"), default=None):
    p.add_argument("--format", choices=formats, default=default,
                   help="output format" if default else "output format; plain text when omitted")
    p.add_argument("--out", metavar="FILE", help="write to FILE instead of standard output")


class _HelpFormatter(argparse.ArgumentDefaultsHelpFormatter, argparse.RawDescriptionHelpFormatter):
    pass


def _verify_epilog():
    lines = ["experiment defaults (n, replicas, tolerance):"]
    for name, entry in sorted(harness.EXPERIMENTS.items()):
        reps = 100_000 if name == "poisson" else 20_000
        lines.append(f"  {name}: {entry['n']}, {reps}, {entry['tolerance']}")
    for name in PROBES:
        n, reps = _PROBE_DEFAULTS[name]
        lines.append(f"  {name}: {n}, {reps}, {_PROBE_TOLERANCES.get(name, 'none')}")
    return "\n".join(lines)


def build_parser():
    fmt = _HelpFormatter
    parser = argparse.ArgumentParser(prog="cadlag", allow_abbrev=False, description="Cadlag path metrics, limit laws "
                                     "and Monte Carlo checks of functional limit theorems.")
    sub = parser.add_subparsers(dest="verb", required=True, metavar="verb")

    p = sub.add_parser("paths", formatter_class=fmt, allow_abbrev=False, help="summaries and moduli of a path file")
    p.add_argument("path", help="path document")
    p.add_argument("--delta", type=float, default=None, help="modulus argument in (0, 1)")
    p.add_argument("--exact", action="store_true", help="exact moduli (step paths only)")
    p.add_argument("--grid-step", type=_positive_float, default=DEFAULT_GRID_STEP,
                   help="cell size for non-step paths")
    _add_output(p)
    p.set_defaults(func=cmd_paths)

    p = sub.add_parser("metric", formatter_class=fmt, allow_abbrev=False, help="distance between two path files")
    p.add_argument("x")
    p.add_argument("y")
    p.add_argument("--kind", choices=("d", "dcirc", "uniform", "dinf"), default="d")
    p.add_argument("--mode", choices=("exact", "grid"), default="exact")
    p.add_argument("--grid-step", type=_positive_float, default=DEFAULT_GRID_STEP)
    p.add_argument("--terms", type=_positive_int, default=20, help="truncation of dinf")
    p.add_argument("--precision", type=_positive_int, default=12,
                   help="significant digits of the plain output")
    _add_output(p)
    p.set_defaults(func=cmd_metric)

    p = sub.add_parser("prokhorov", formatter_class=fmt, allow_abbrev=False, help="Prokhorov distance of measure files")
    p.add_argument("p")
    p.add_argument("q")
    p.add_argument("--flow", action="store_true", help="max-flow method for many atoms")
    p.add_argument("--precision", type=_positive_int, default=12)
    _add_output(p)
    p.set_defaults(func=cmd_prokhorov)

    p = sub.add_parser("law", formatter_class=fmt, allow_abbrev=False, help="evaluate a limit law")
    p.add_argument("--name", required=True, choices=sorted(laws.LAWS))
    for name in LAW_PARAMS:
        p.add_argument(f"--{name}", type=float, default=None, help="law parameter")
    p.add_argument("--table", metavar="CSV", help="batch mode: one parameter set per row")
    p.add_argument("--abs-tol", type=_positive_float, default=laws.DEFAULT_CONTROL.abs_tol,
                   help="series truncation tolerance")
    p.add_argument("--max-terms", type=_positive_int, default=laws.DEFAULT_CONTROL.max_terms,
                   help="series term budget")
    p.add_argument("--precision", type=_positive_int, default=12)
    _add_output(p)
    p.set_defaults(func=cmd_law)

    p = sub.add_parser("walks", formatter_class=fmt, allow_abbrev=False, help="exact count tables of the simple walk")
    p.add_argument("--n", type=_nonneg_int, required=True, help="number of steps (at most 20)")
    p.add_argument("--fields", default=",".join(STAT_FIELDS),
                   help="comma-separated statistics to tabulate")
    _add_output(p, default="csv")
    p.set_defaults(func=cmd_walks)

    p = sub.add_parser("simulate", formatter_class=fmt, allow_abbrev=False, help="simulate pre-limit paths")
    p.add_argument("--process", choices=PROCESSES, default="donsker-D")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--replicas", type=_positive_int, default=1)
    p.add_argument("--seed", type=_nonneg_int, required=True)
    p.add_argument("--law", choices=("rademacher", "centered-uniform"), default="rademacher",
                   help="increment law of walk processes")
    p.add_argument("--alpha", type=_positive_float, default=2.0, help="Poisson rate")
    p.add_argument("--stat", choices=FUNCTIONALS[:-1], default=None,
                   help="emit functional values as CSV instead of paths")
    _add_output(p, formats=("json",), default="json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", formatter_class=fmt, allow_abbrev=False, epilog=_verify_epilog(),
                       help="run a convergence experiment or probe and report")
    p.add_argument("--experiment", required=True, choices=sorted(harness.EXPERIMENTS) + list(PROBES))
    p.add_argument("--seed", type=_nonneg_int, required=True)
    p.add_argument("--n", type=_positive_int, default=None, help="walk length (experiment default)")
    p.add_argument("--replicas", type=_positive_int, default=None,
                   help="Monte Carlo replicas (experiment default)")
    p.add_argument("--tolerance", type=_positive_float, default=None,
                   help="pass threshold (experiment default)")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--law", choices=("rademacher", "centered-uniform"), default="centered-uniform")
    p.add_argument("--alpha", type=_positive_float, default=2.0, help="Poisson rate")
    p.add_argument("--delta", dest="deltas", default="0.2,0.1,0.05,0.025",
                   help="comma-separated deltas for the tightness probe")
    p.add_argument("--epsilon", type=_positive_float, default=0.5,
                   help="tightness level, or conditioning width of bridge-conditioning")
    p.add_argument("--process", dest="process_name", default="donsker-D",
                   choices=("donsker-D", "donsker-C", "constant", "spike"))
    p.add_argument("--p", type=float, default=0.5, help="success probability (local-limit)")
    p.add_argument("--probs", default="0.2,0.3,0.5", help="cell probabilities (multinomial-cov)")
    p.add_argument("--b", type=_positive_float, default=1.0, help="level (bridge-conditioning)")
    _add_output(p, default="json")
    p.set_defaults(func=cmd_verify)
    return parser




def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.verb == "verify" and args.experiment in PROBES:
        n, reps = _PROBE_DEFAULTS[args.experiment]
        args.n = args.n if args.n is not None else n
        args.replicas = args.replicas if args.replicas is not None else reps
    try:
        text = args.func(args)
    except (UsageError, ConfigError) as exc:
        parser.exit(2, f"cadlag {args.verb}: error: {exc}\n")
    except (CadlagError, OSError) as exc:
        sys.stderr.write(f"cadlag {args.verb}: {type(exc).__name__}: {exc}\n")
        return 1
    _emit(args, text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
