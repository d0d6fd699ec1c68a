"""Run the standard parameter sweeps for all three methods and write one CSV each.

    python scripts/sweeps.py --trials 20 --out results/
"""

import argparse
import logging
import time
from pathlib import Path

from scvn.config import RunConfig, with_param
from scvn.experiments import emit_csv, run_sweep

SWEEPS = {
    "V": [20, 40, 60, 80, 100],
    "N": [8, 10, 12, 14, 16, 20],
    "xi": [0.8, 1.1, 1.4],
    "eta0": [0.4, 0.5, 0.6],
    "theta0": [0.05, 0.1, 0.2],
    "C": [16, 20, 24, 28],
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--only", nargs="*", choices=sorted(SWEEPS), help="subset of sweeps")
    ap.add_argument("--xi", type=float, nargs="*", default=[1.0],
                    help="run every sweep once per skew (e.g. 0.8 1.4 for paired curves)")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    logging.basicConfig(level=logging.WARNING)

    args.out.mkdir(parents=True, exist_ok=True)
    for param in args.only or SWEEPS:
        for xi in args.xi if param != "xi" else [None]:
            base = RunConfig(seed=args.seed) if xi is None else with_param(RunConfig(seed=args.seed), "xi", xi)
            t0 = time.perf_counter()
            rows = run_sweep(base, param, SWEEPS[param], args.trials)
            name = f"sweep_{param}.csv" if xi is None else f"sweep_{param}_xi{xi:g}.csv"
            emit_csv(rows, args.out / name)
            print(f"{name}: {len(rows)} rows in {time.perf_counter() - t0:.0f}s")


if __name__ == "__main__":
    main()
