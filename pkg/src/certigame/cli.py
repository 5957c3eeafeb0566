"""Command-line entry point: run experiments, compare their CSVs."""

from __future__ import annotations

import argparse
import sys

from .efg import CertigameError
from .harness import (ExperimentConfig, compare_runs, format_comparison,
                      run_to_files)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="certigame",
        description="Black-box game solving with equilibrium certificates")
    sub = parser.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="run one experiment, write a CSV")
    runp.add_argument("--game", required=True,
                      help="game id, e.g. kuhn, goofspiel:3, leduc:3, "
                           "bandit:sec4:0.5:0.1")
    runp.add_argument("--algo", default="cert-lp",
                      choices=["cert-lp", "cert-lp-indep", "cert-cfr",
                               "cert-mccfr", "mccfr-baseline"])
    runp.add_argument("--iters", type=int, default=1000)
    runp.add_argument("--seed", type=int, default=0)
    runp.add_argument("--solve-every", type=int, default=100)
    runp.add_argument("--chance-mode", default=None,
                      choices=["known", "signature", "independent"])
    runp.add_argument("--expand", default="path",
                      choices=["path", "first-new"])
    runp.add_argument("--eval-every", type=int, default=1000)
    runp.add_argument("--out", required=True, help="CSV output path")
    runp.add_argument("--cert", default=None,
                      help="also write a certificate JSON here")
    runp.add_argument("--warning1-demo", action="store_true",
                      help="swap in the naive sampled-payoff estimator "
                           "(invalidates the certificate, on purpose)")
    runp.add_argument("--eps-bar", action="store_true",
                      help="track the cumulative average-regret bound")
    runp.add_argument("--eps-tilde", action="store_true",
                      help="track the sampled-loss bound (mccfr only)")
    runp.add_argument("--no-uncertainty", action="store_true",
                      help="skip per-step uncertainty accounting (faster)")
    runp.add_argument("--timings", action="store_true",
                      help="fill the wallclock column (breaks byte-"
                           "stability of the CSV)")
    runp.add_argument("--long", action="store_true",
                      help="allow full-scale runs on goofspiel:4 and "
                           "leduc:13")

    cmp_ = sub.add_parser("compare", help="summarize two or more run CSVs")
    cmp_.add_argument("paths", nargs="+", help="CSV files from `run`")
    return parser


def config_from_args(args):
    algo = args.algo
    loss_mode = "bounds"
    if args.warning1_demo:
        if algo not in ("cert-mccfr", "cert-lp"):  # cert-lp is the default
            raise CertigameError("the warning1 demo runs on cert-mccfr")
        algo = "cert-mccfr"
        loss_mode = "sampled-payoff"
    return ExperimentConfig(
        game_id=args.game,
        algo=algo,
        iterations=args.iters,
        seed=args.seed,
        solve_cadence=args.solve_every,
        chance_mode=args.chance_mode,
        expand_mode=args.expand,
        eval_every=args.eval_every,
        csv_path=args.out,
        cert_path=args.cert,
        eps_bar=args.eps_bar,
        eps_tilde=args.eps_tilde,
        loss_mode=loss_mode,
        track_uncertainty=not args.no_uncertainty,
        timings=args.timings,
        long_ok=args.long,
    )


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            config = config_from_args(args)
            rows, certifier = run_to_files(config)
            final = rows[-1]
            gap = ("-" if final.provable_gap is None
                   else f"{final.provable_gap:.6g}")
            print(f"{config.game_id} {config.algo} seed {config.seed}: "
                  f"t={final.playthroughs} nodes={final.nodes_expanded} "
                  f"provable_gap={gap} -> {config.csv_path}")
            if config.eps_bar:
                bars = [certifier.cumulative_bound_gap(p)
                        for p in range(1, certifier.pg.n + 1)]
                print("eps-bar: " +
                      " ".join(f"p{i + 1}={v:.6g}"
                               for i, v in enumerate(bars)))
            if config.eps_tilde:
                tils = [certifier.sampled_cumulative_bound_gap(p)
                        for p in range(1, certifier.pg.n + 1)]
                print("eps-tilde: " +
                      " ".join(f"p{i + 1}={v:.6g}"
                               for i, v in enumerate(tils)))
            return 0
        if args.command == "compare":
            print(format_comparison(compare_runs(args.paths)))
            return 0
    except CertigameError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
