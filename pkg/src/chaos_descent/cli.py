"""Command line front end.

Subcommands:

* ``solve``   — run one solver configuration, write the trace (csv/json).
* ``compare`` — run a multi-trial experiment, write per-trial and
  aggregate curves plus a manifest.
* ``verify``  — run the full theory-check suite; exit 2 if any check fails.
* ``coeffs``  — emit the shipped benchmark expansion table.
* ``bench``   — time the array kernels on every importable backend.

Exit codes: 0 success, 1 configuration/usage error, 2 verification failure.
Reruns of ``solve`` with the same config and seed are byte-identical as
long as ``--timing`` stays off (wall times are inherently nondeterministic).
"""

import argparse
import json
import pathlib
import sys

from .bench import BENCH_COLUMNS, run_benchmarks, speedup_summary
from .config import (basis_from_config, get_str, problem_from_config,
                     read_config, solver_from_config)
from .harness import plan_from_config, run_experiment
from .kernels import BACKEND
from .problems import ConfigurationError
from .solvers import TRACE_COLUMNS, run
from .target import benchmark_expansion

_METHOD_ALIASES = {"gd": "gd", "agd": "agd", "sa": "sa", "fixed": "fixed_gd"}


class _Parser(argparse.ArgumentParser):
    """argparse, but usage problems exit 1 instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser():
    parser = _Parser(prog="chaos-descent",
                     description="Spectral-expansion solvers for "
                                 "uncertainty-quantification optimization.")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    solve = sub.add_parser("solve", help="run one configuration")
    solve.add_argument("--config", required=True, help="config file path")
    solve.add_argument("--seed", type=int, default=None, help="rng seed")
    solve.add_argument("--method", choices=sorted(_METHOD_ALIASES),
                       default=None, help="override solver.method")
    solve.add_argument("--out", default=".", help="output directory")
    solve.add_argument("--format", choices=("csv", "json"), default="csv")
    solve.add_argument("--timing", action="store_true",
                       help="record wall times (breaks byte determinism)")

    compare = sub.add_parser("compare", help="run a multi-trial experiment")
    compare.add_argument("--config", required=True, help="config file path")
    compare.add_argument("--trials", type=int, default=None)
    compare.add_argument("--seed", type=int, default=None)
    compare.add_argument("--out", default=None, help="output directory")

    verify = sub.add_parser("verify", help="run the theory-check suite")
    verify.add_argument("--out", default=None, help="output directory")
    verify.add_argument("--nodes", type=int, default=1024)

    coeffs = sub.add_parser("coeffs", help="emit the benchmark expansion")
    coeffs.add_argument("--family", default="trigonometric",
                        choices=("trigonometric", "legendre"))
    coeffs.add_argument("--out", default=None, help="output directory")
    coeffs.add_argument("--format", choices=("csv", "json"), default="csv")

    bench = sub.add_parser("bench", help="time kernels per backend")
    bench.add_argument("--out", default=None, help="output directory")
    bench.add_argument("--format", choices=("csv", "json"), default="csv")
    bench.add_argument("--nodes", type=int, default=4096)
    bench.add_argument("--repeats", type=int, default=5)
    return parser


def _out_dir(path):
    out = pathlib.Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _trace_json(trace):
    rows = []
    for rec in trace.records:
        row = {}
        for j, name in enumerate(TRACE_COLUMNS):
            v = rec[j]
            row[name] = int(v) if name in ("k", "m", "elapsed_ns") else float(v)
        rows.append(row)
    return {"method": trace.method, "seed": trace.seed, "trial": trace.trial,
            "config_hash": trace.config_hash, "aborted_at": trace.aborted_at,
            "rows": rows}


def _cmd_solve(args):
    cfg = read_config(args.config)
    spec = basis_from_config(cfg)
    problem = problem_from_config(cfg)
    method = _METHOD_ALIASES[args.method] if args.method else None
    solver_cfg = solver_from_config(cfg, method=method, seed=args.seed,
                                    timing=args.timing)
    trace = run(problem, spec, solver_cfg)
    stem = pathlib.Path(args.config).stem
    name = f"{stem}_{trace.method}_seed{trace.seed}.{args.format}"
    path = _out_dir(args.out) / name
    if args.format == "csv":
        trace.to_csv(path)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(_trace_json(trace), fh, indent=2, sort_keys=True)
            fh.write("\n")
    status = (f"aborted at k={trace.aborted_at}" if trace.aborted_at
              is not None else "ok")
    print(f"{path} ({status})")
    return 0


def _cmd_compare(args):
    cfg = read_config(args.config)
    name = get_str(cfg, "experiment.name")
    out = args.out or str(pathlib.Path("out") / name)
    plan = plan_from_config(cfg, out=out, trials=args.trials, seed=args.seed)
    curves = run_experiment(plan)
    for label in sorted(curves):
        c = curves[label]
        final = c.column("err_trunc_mean")[-1]
        note = f", {c.aborted} aborted" if c.aborted else ""
        print(f"{label}: trials={c.trials}{note} "
              f"final_err_trunc={final:.6e}")
    print(f"artifacts in {out}")
    return 0


def _cmd_verify(args):
    from .verify import run_verify_suite
    out = None
    if args.out is not None:
        out = _out_dir(args.out) / "verify_report.json"
    doc = run_verify_suite(nodes=args.nodes, out=out)
    for check in doc["checks"]:
        if check["passed"] is None:
            verdict = "INFO"
        else:
            verdict = "PASS" if check["passed"] else "FAIL"
        slack = check.get("slack")
        extra = "" if slack is None else f" slack={slack:.3e}"
        print(f"{verdict} {check['name']}{extra}")
    if out is not None:
        print(f"report: {out}")
    return 0 if doc["passed"] else 2


def _cmd_coeffs(args):
    u = benchmark_expansion(args.family)
    if args.format == "csv":
        lines = ["index,coefficient"]
        lines += [f"{i},{repr(float(c))}" for i, c in enumerate(u.coeffs)]
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps({"family": args.family, "level": u.level,
                           "coefficients": [float(c) for c in u.coeffs]},
                          indent=2, sort_keys=True) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        path = _out_dir(args.out) / f"benchmark_{args.family}.{args.format}"
        path.write_text(text, encoding="utf-8")
        print(f"{path}")
    return 0


def _cmd_bench(args):
    results = run_benchmarks(nodes=args.nodes, repeats=args.repeats)
    speedups = speedup_summary(results)
    if args.format == "csv":
        lines = [",".join(BENCH_COLUMNS)]
        lines += [",".join(r.row()) for r in results]
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps({
            "backend_default": BACKEND,
            "results": [dict(zip(BENCH_COLUMNS, r.row())) for r in results],
            "speedup_numpy_over_compiled": speedups,
        }, indent=2, sort_keys=True) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        path = _out_dir(args.out) / f"bench.{args.format}"
        path.write_text(text, encoding="utf-8")
        print(f"{path}")
    if args.format == "csv":
        for key, ratio in sorted(speedups.items()):
            print(f"# speedup {key}: {ratio:.2f}x numpy/compiled")
    return 0


_COMMANDS = {"solve": _cmd_solve, "compare": _cmd_compare,
             "verify": _cmd_verify, "coeffs": _cmd_coeffs,
             "bench": _cmd_bench}


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
