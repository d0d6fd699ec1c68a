"""Semantic-communication vehicle pairing: simulator, solver and baselines."""

import numba

# probe OpenMP before TBB; the bundled TBB is too old and warns on every run
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
