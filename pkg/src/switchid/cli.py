"""Command line front end.

Subcommands cover the pipeline stages: ``simulate`` a trajectory,
``identify`` a realization from one, ``selection`` and ``stability``
for the two offline searches, ``bound`` for finite-sample certificate
tables and ``experiment`` for the Monte Carlo study.

Exit codes: 0 success, 1 bad usage or configuration, 2 numerical
refusal (no stability certificate, singular Hankel matrix, diverging
simulation), 3 file I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from .bounds import (
    CertificateError,
    StabilityCertificate,
    compute_certificate,
    find_P,
    gamma_from_P,
    min_gamma_certificate,
    min_valid_N,
    load_P_matrix,
    save_bound_certificate,
    save_stability_certificate,
    schur_radius,
)
from .core import (
    SignalSpec,
    SwitchingDistribution,
    load_model_file,
    two_mode_benchmark,
    word_to_str,
)
from .experiment import (
    ExperimentConfig,
    run_experiment,
    write_figures,
    write_results_csv,
)
from .hokalman import (
    SelectionRankError,
    SingularHankelError,
    build_hankels,
    est_err,
    find_selection,
    load_selection,
    realize,
    required_words,
    save_realization,
    save_selection,
)
from .markov import empirical_markov_batch, true_markov_map
from .simulate import (
    DEFAULT_BURN_IN,
    DivergenceError,
    SimConfig,
    load_trajectory,
    save_trajectory,
    simulate,
)

DEFAULT_GAMMA = 0.6


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_model_flags(p: _Parser):
    p.add_argument("--model", help="model JSON file (default: built-in two-mode family)")
    p.add_argument(
        "--gamma",
        type=float,
        default=None,
        help="stability rate: family parameter for the built-in model, "
        f"certificate target otherwise (default {DEFAULT_GAMMA})",
    )


def _add_signal_flags(p: _Parser):
    p.add_argument("--ku-input", type=float, default=None, help="input amplitude bound")
    p.add_argument("--ku-noise", type=float, default=None, help="noise amplitude bound")


def _resolve_model(args):
    """Model, switching distribution and signal amplitudes from flags.

    File values are the base when --model is given; flag values win
    over file values; remaining gaps get benchmark-style defaults
    (uniform modes, inputs bounded by 0.8, noise bounded by 1).
    """
    gamma = args.gamma if args.gamma is not None else DEFAULT_GAMMA
    if args.model is not None:
        model, dist, signal = load_model_file(args.model)
        if dist is None:
            dist = SwitchingDistribution(np.full(model.nQ, 1.0 / model.nQ))
    else:
        model, dist = two_mode_benchmark(gamma)
        signal = None
    ku_input = getattr(args, "ku_input", None)
    ku_noise = getattr(args, "ku_noise", None)
    if signal is None:
        signal = SignalSpec(Ku_input=0.8, Ku_noise=1.0)
    if ku_input is not None or ku_noise is not None:
        signal = SignalSpec(
            Ku_input=ku_input if ku_input is not None else signal.Ku_input,
            Ku_noise=ku_noise if ku_noise is not None else signal.Ku_noise,
            Sigma_u=None,
        )
    return model, dist, signal, gamma


def cmd_simulate(args) -> int:
    model, dist, signal, _ = _resolve_model(args)
    cfg = SimConfig(
        model=model,
        dist=dist,
        signal=signal,
        N=args.N,
        burn_in=args.burn_in,
        seed=args.seed,
    )
    sample = simulate(cfg)
    counts = np.bincount(sample.q, minlength=model.nQ + 1)[1:]
    freqs = ", ".join(
        f"{c + 1}: {counts[c] / (sample.N + 1):.4f}" for c in range(model.nQ)
    )
    print(f"simulated N = {sample.N} (burn-in {args.burn_in}, seed {args.seed})")
    print(f"max |y| = {np.abs(sample.y).max():.6g}")
    print(f"mode frequencies: {freqs}")
    if args.out:
        save_trajectory(args.out, sample)
        print(f"trajectory written to {args.out}")
    return 0


def cmd_identify(args) -> int:
    model, dist, signal, _ = _resolve_model(args)
    if args.trajectory:
        sample = load_trajectory(args.trajectory)
    else:
        sample = simulate(
            SimConfig(
                model=model,
                dist=dist,
                signal=signal,
                N=args.N,
                burn_in=args.burn_in,
                seed=args.seed,
            )
        )
    if sample.N <= 2 * (2 * model.n + 1):
        raise ValueError(
            f"trajectory too short: N = {sample.N} but more than "
            f"{2 * (2 * model.n + 1)} samples are needed for n = {model.n}"
        )
    sel = load_selection(args.selection) if args.selection else find_selection(model)
    words = sorted(required_words(sel, model.nQ), key=lambda w: (len(w), w))
    mmap = empirical_markov_batch(sample, words, signal.sigma_u(model.m), dist)
    rr_hat = realize(build_hankels(mmap, sel), mmap[()])
    mmap_true = true_markov_map(model, words)
    rr_ref = realize(build_hankels(mmap_true, sel), mmap_true[()])
    print(f"selection rows: {[word_to_str(w) or 'e' for w in sel.alpha]}")
    print(
        "selection cols: "
        f"{[(word_to_str(mu) or 'e', q, l) for (mu, q, l) in sel.beta]}"
    )
    print(f"sigma_n(H_ab) estimate = {rr_hat.sigma_n:.6g} (true {rr_ref.sigma_n:.6g})")
    print(f"est_err = {est_err(rr_hat, rr_ref):.6g}")
    if args.out:
        save_realization(args.out, rr_hat, sel)
        print(f"realization written to {args.out}")
    return 0


def cmd_selection(args) -> int:
    model, _, _, _ = _resolve_model(args)
    sel = find_selection(model, exhaustive=args.exhaustive)
    words = sorted(required_words(sel, model.nQ), key=lambda w: (len(w), w))
    hs = build_hankels(true_markov_map(model, words), sel)
    sigma_n = float(np.linalg.svd(hs.H_ab, compute_uv=False)[-1])
    print(f"rows (alpha):  {[word_to_str(w) or 'e' for w in sel.alpha]}")
    print(
        "cols (beta):   "
        f"{[(word_to_str(mu) or 'e', q, l) for (mu, q, l) in sel.beta]}"
    )
    print(f"sigma_n(H_ab) = {sigma_n:.6g}")
    nwords = len(words)
    print(f"words required for the estimator: {nwords}")
    if args.out:
        save_selection(args.out, sel)
        print(f"selection written to {args.out}")
    return 0


def cmd_stability(args) -> int:
    model, dist, _, gamma = _resolve_model(args)
    if args.P:
        P = load_P_matrix(args.P)
        g, margin = gamma_from_P(model, P)
        if g > gamma:
            raise CertificateError(
                f"supplied P certifies gamma = {g:.6g}, above the target {gamma:.6g}"
            )
        cert = StabilityCertificate(
            P=P, gamma=g, margin=margin, schur_radius=schur_radius(model, dist)
        )
        print(f"supplied P accepted: certified gamma = {g:.6g}")
    else:
        cert = find_P(model, dist, gamma)
        print(f"certificate found: gamma = {cert.gamma:.6g} (target {gamma:.6g})")
    print(f"margin = {cert.margin:.6g}")
    print(f"schur radius = {cert.schur_radius:.6g}")
    if args.out:
        save_stability_certificate(args.out, cert)
        print(f"certificate written to {args.out}")
    return 0


def cmd_bound(args) -> int:
    model, dist, signal, gamma = _resolve_model(args)
    sel = load_selection(args.selection) if args.selection else find_selection(model)
    words = sorted(required_words(sel, model.nQ), key=lambda w: (len(w), w))
    mmap_true = true_markov_map(model, words)
    rr_ref = realize(build_hankels(mmap_true, sel), mmap_true[()])
    stability = find_P(model, dist, gamma)
    N_grid = args.N_grid if args.N_grid else [args.N]
    certs = [
        compute_certificate(
            model, dist, signal, sel, rr_ref.sigma_n, args.delta, N, stability=stability
        )
        for N in N_grid
    ]
    N_star = min_valid_N(
        model, dist, signal, sel, rr_ref.sigma_n, args.delta, stability=stability
    )
    print(f"sigma_n(H_ab) = {rr_ref.sigma_n:.6g}, delta = {args.delta}")
    print(f"{'N':>12}  {'K(delta,N)':>12}  {'bound':>12}  valid")
    for bc in certs:
        print(
            f"{bc.N:>12}  {bc.K_deltaN:>12.4g}  {bc.bound_EstErr:>12.4g}  "
            f"{'yes' if bc.valid else 'no'}"
        )
    print(f"smallest N with a valid bound: {N_star}")
    if args.out:
        if len(certs) == 1:
            save_bound_certificate(args.out, certs[0])
        else:
            with open(args.out, "w", newline="") as fh:
                writer = csv.writer(fh)
                keys = list(certs[0].to_dict().keys())
                writer.writerow(keys)
                for bc in certs:
                    d = bc.to_dict()
                    writer.writerow([d[k] for k in keys])
        print(f"certificate table written to {args.out}")
    return 0


def cmd_experiment(args) -> int:
    if args.config:
        cfg = ExperimentConfig.load(args.config)
    else:
        cfg = ExperimentConfig()
    if args.model:
        cfg.model_file = args.model
    if args.trials is not None:
        cfg.trials = args.trials
    if args.seed is not None:
        cfg.seed_base = args.seed
    if args.threads is not None:
        cfg.threads = args.threads
    if args.delta is not None:
        cfg.delta = args.delta
    if args.N_grid:
        cfg.N_grid = args.N_grid
    if args.out:
        cfg.output_dir = args.out
    os.makedirs(cfg.output_dir, exist_ok=True)
    rows = run_experiment(cfg, progress=print)
    csv_path = os.path.join(cfg.output_dir, "results.csv")
    write_results_csv(csv_path, rows)
    fig_paths = write_figures(cfg, rows)
    with open(os.path.join(cfg.output_dir, "config.json"), "w") as fh:
        json.dump(cfg.to_dict(), fh, indent=2)
        fh.write("\n")
    print(f"results written to {csv_path}")
    for p in fig_paths:
        print(f"figure written to {p}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="switchid", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("simulate", help="simulate one switched trajectory")
    _add_model_flags(p)
    _add_signal_flags(p)
    p.add_argument("--N", type=int, default=1000, help="trajectory length (default 1000)")
    p.add_argument("--burn-in", type=int, default=DEFAULT_BURN_IN)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="trajectory CSV path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("identify", help="estimate a realization from one trajectory")
    _add_model_flags(p)
    _add_signal_flags(p)
    p.add_argument("--trajectory", help="trajectory CSV (default: simulate internally)")
    p.add_argument("--selection", help="selection JSON (default: search)")
    p.add_argument("--N", type=int, default=10_000)
    p.add_argument("--burn-in", type=int, default=DEFAULT_BURN_IN)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="realization JSON path")
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("selection", help="search a nonsingular Hankel sub-basis")
    _add_model_flags(p)
    p.add_argument("--exhaustive", action="store_true", help="scan all subsets")
    p.add_argument("--out", help="selection JSON path")
    p.set_defaults(func=cmd_selection)

    p = sub.add_parser("stability", help="find or check a quadratic stability certificate")
    _add_model_flags(p)
    p.add_argument("--P", help="JSON file with a candidate P matrix to check")
    p.add_argument("--out", help="certificate JSON path")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("bound", help="finite-sample bound certificate table")
    _add_model_flags(p)
    _add_signal_flags(p)
    p.add_argument("--selection", help="selection JSON (default: search)")
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--N", type=int, default=100_000)
    p.add_argument("--N-grid", type=int, nargs="+", help="table over several N")
    p.add_argument("--out", help="certificate JSON (single N) or CSV (grid)")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("experiment", help="Monte Carlo error-versus-N study")
    p.add_argument("--config", help="experiment config JSON")
    p.add_argument("--model", help="model JSON overriding the built-in family")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=None, help="seed base")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--N-grid", type=int, nargs="+")
    p.add_argument("--out", help="output directory (default out)")
    p.set_defaults(func=cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "func"):
        parser.print_help()
        return 1
    try:
        return args.func(args)
    except (
        CertificateError,
        SingularHankelError,
        SelectionRankError,
        DivergenceError,
        np.linalg.LinAlgError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
