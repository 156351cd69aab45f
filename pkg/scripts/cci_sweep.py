"""Largest-SCC fraction of the four-type CCI example against the fixed point.

Prints one row per mean degree with the Monte-Carlo estimate and both
fixed-point variants.

    python3 scripts/cci_sweep.py --n 2000 --replicates 200 --workers 4
"""

import argparse
import time

from irdgen.experiment import ExperimentConfig, alpha_predictor, sweep, sweep_configs

PARAMS = {
    "q": [0.1, 0.15, 0.25, 0.5],
    "P": [[0.2, 0.2], [0.0, 0.1], [0.5, 0.0]],
    "I": [[0, 1, 1], [1, 0, 1], [1, 1, 0], [0, 1, 0]],
    "J": [[1, 0], [0, 1], [1, 1], [0, 1]],
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--replicates", type=int, default=200)
    ap.add_argument("--seed", type=int, default=20240601)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--mu", type=float, nargs="+", default=[0.5, 1.0, 1.5, 2.0, 2.5, 3.0])
    args = ap.parse_args()

    base = ExperimentConfig("cci", {"mu": 1.0, **PARAMS}, args.n, args.replicates,
                            args.seed, ("scc_fraction",))
    configs = sweep_configs(base, "mu", args.mu)
    as_written = alpha_predictor("as_written")
    start = time.perf_counter()
    print(f"{'mu':>5} {'mc_mean':>9} {'ci':>8} {'coupled':>9} {'as_written':>11}")

    def show(row):
        other = as_written(configs[args.mu.index(row.parameter)])
        print(f"{row.parameter:5.2f} {row.mc_mean:9.4f} {row.mc_ci:8.4f} "
              f"{row.predicted_alpha:9.4f} {other:11.4f}", flush=True)

    sweep(configs, "mu", alpha_predictor("coupled"), workers=args.workers, on_row=show)
    print(f"# {time.perf_counter() - start:.1f}s")


if __name__ == "__main__":
    main()
