"""Trace the dual loop on one default instance: dual value, incumbent, mismatch slack.

    python scripts/dual_trace.py --seed 3 --out trace.csv
"""

import argparse

from scvn.config import RunConfig
from scvn.experiments import emit_diagnostics, prepare_instance
from scvn.solver.s4 import run_s4


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="trace.csv")
    args = ap.parse_args()

    cfg = RunConfig(seed=args.seed)
    inst, dropped = prepare_instance(cfg, args.seed)
    res = run_s4(inst, cfg.solver, cfg.constraints.eta0, cfg.constraints.theta0)
    emit_diagnostics(res.history, args.out)
    print(f"vehicles={inst.n_vues} dropped={dropped} links={res.n_subproblems} p1_solves={res.p1_solves}")
    print(f"objective={res.objective:.6g} feasible={res.feasible} best_dual={res.best_dual:.6g} "
          f"incumbent_iteration={res.incumbent_iteration} runtime={res.runtime_s:.1f}s")


if __name__ == "__main__":
    main()
