"""Command-line entry point.

Exit codes: 0 success, 2 invalid input, 3 solver infeasibility (or a failed
self-check). The summary goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numba

from .config import SWEEP_PARAMS, load_config
from .errors import ConfigError
from .experiments import METHODS, TrialConfig, aggregate, emit_csv, emit_diagnostics, run_sweep, run_trial

EXIT_OK, EXIT_INVALID, EXIT_INFEASIBLE = 0, 2, 3

log = logging.getLogger("scvn")


def _threads(n: int) -> None:
    if n > 0:
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def _values(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad value list {text!r}") from exc


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    res = run_trial(TrialConfig(cfg, cfg.seed, args.method))
    if not res.ok:
        print(f"{args.method}: trial failed ({res.error})", file=sys.stderr)
        return EXIT_INFEASIBLE
    emit_csv([aggregate([res], args.method, "default", 0.0)], args.out)
    if args.diagnostics and res.history:
        emit_diagnostics(res.history, args.diagnostics)
    print(
        f"method={res.method} seed={res.seed} vehicles={res.n_vues} dropped={len(res.dropped)}\n"
        f"latency_s={res.latency:.6g} tsp_pps={res.tsp:.6g} eta_bar={res.eta_bar:.6g} "
        f"rho_bar={res.rho_bar:.6g}\n"
        f"unmatched={res.unmatched} violations={res.violations} feasible={res.feasible} "
        f"runtime_s={res.runtime_s:.3g}"
    )
    return EXIT_OK if res.feasible else EXIT_INFEASIBLE


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    records: dict = {}
    rows = run_sweep(cfg, args.param, args.values, args.trials, METHODS, records=records)
    emit_csv(rows, args.out)
    for r in rows:
        print(f"{r.method} {r.param}={r.value:g} latency_s={r.latency_s:.6g} tsp_pps={r.tsp_pps:.6g} "
              f"eta_bar={r.eta_bar:.6g} rho_bar={r.rho_bar:.6g} trials={r.trials}")
    failed = sum(not t.ok for trials in records.values() for t in trials)
    if failed:
        print(f"{failed} trial(s) failed", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_validate_queue(args) -> int:
    from .validation import validate_queue

    chk = validate_queue(args.configs, args.packets, args.seed)
    for a, s, u, e in zip(chk.analytic, chk.simulated, chk.utilization, chk.rel_errors):
        log.info("analytic=%.6g simulated=%.6g utilization=%.3f rel_err=%.4f", a, s, u, e)
    print(f"configs={args.configs} packets={args.packets} max_rel_error={chk.max_rel_error:.6g} "
          f"tolerance={args.tolerance:g}")
    return EXIT_OK if chk.passed(args.tolerance) else EXIT_INFEASIBLE


def cmd_oracle_check(args) -> int:
    from .validation import oracle_check, summarize_gaps

    chk = oracle_check(args.instances, args.seed)
    g = summarize_gaps(chk.gaps)
    print(
        f"instances={chk.instances} inner_cases={chk.inner_cases} prop2_failures={chk.prop2_failures} "
        f"prop1_failures={chk.prop1_failures} duality_violations={chk.duality_violations}/{chk.dual_checks}\n"
        f"feasible={g['n']} gap_mean={g['mean']:.6g} gap_max={g['max']:.6g} within_5pct={g['within_5pct']:.3g}"
    )
    return EXIT_OK if chk.passed else EXIT_INFEASIBLE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scvn", description="Semantic V2V pairing simulator and solver.")
    parser.add_argument("--threads", type=int, default=0, help="worker threads (0 = auto)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one trial")
    p.add_argument("config")
    p.add_argument("--method", choices=METHODS, default="s4")
    p.add_argument("--out", default="run.csv")
    p.add_argument("--diagnostics", help="per-iteration dual-loop CSV (s4 only)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="sweep one parameter for all methods")
    p.add_argument("config")
    p.add_argument("--param", choices=sorted(SWEEP_PARAMS), required=True)
    p.add_argument("--values", type=_values, required=True, help="comma-separated values")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--out", default="sweep.csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate-queue", help="closed-form queue vs simulation")
    p.add_argument("--configs", type=int, default=5)
    p.add_argument("--packets", type=int, default=10**6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=0.02)
    p.set_defaults(func=cmd_validate_queue)

    p = sub.add_parser("oracle-check", help="decomposition vs brute force on tiny instances")
    p.add_argument("--instances", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    _threads(args.threads)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
