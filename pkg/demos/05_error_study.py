"""Small Monte Carlo study of estimation error against sample size.

A scaled-down version of the full experiment (the CLI `switchid
experiment` runs the real one): 10 trials per grid point instead of 100,
N up to 1e4 instead of 1e5.  Writes results.csv and three SVG figures to
demos/out/ and prints the mean-error table.  Trial seeds are shared
across grid points, so columns are paired and orderings are visible even
at this tiny trial count.

Run:  python3 demos/05_error_study.py
"""

import os

import numpy as np

from switchid import ExperimentConfig, run_experiment, write_figures, write_results_csv


def main():
    out = os.path.join(os.path.dirname(os.path.abspath(__file__)), "out")
    os.makedirs(out, exist_ok=True)

    cfg = ExperimentConfig(
        gamma_values=[0.1, 0.4, 0.6],
        Ku_noise_values=[1.0],
        Ku_input_values=[0.8],
        N_grid=[1_000, 3_000, 10_000],
        trials=10,
        seed_base=0,
        output_dir=out,
    )
    rows = run_experiment(cfg, progress=print)

    csv_path = os.path.join(out, "results.csv")
    write_results_csv(csv_path, rows)
    write_figures(cfg, rows)
    print("\nWrote %s and three SVG figures alongside it" % csv_path)

    print("\nMean EstErr (10 trials per cell):")
    print("%-8s" % "gamma", *["N=%d" % N for N in cfg.N_grid])
    for g in cfg.gamma_values:
        means = []
        for N in cfg.N_grid:
            v = [r.est_err for r in rows if r.gamma == g and r.N == N and np.isfinite(r.est_err)]
            means.append(float(np.mean(v)))
        print("%-8.1f" % g, *["%-8.4f" % m for m in means])
    print("\nRows also carry the theoretical bound and its validity flag;")
    print("at these N the bound is ~1e11, so every flag is 0 (see demo 04).")


if __name__ == "__main__":
    main()
