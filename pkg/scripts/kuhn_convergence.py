"""Multi-seed convergence sweep on Kuhn: provable gap vs playthroughs.

Runs cert-lp and cert-cfr with unknown chance over log-spaced
checkpoints, writes one CSV of (algo, seed, t, provable_gap) rows, and
prints the fitted log-log decay slope of each algorithm's median curve.
"""

import argparse
import csv
import math
import statistics

from certigame.certify import ExactSolveCertifier, RegretCertifier
from certigame.games import get_game

CHECKPOINTS = [1000, 2154, 4642, 10000, 21544, 46416, 100000]


def make_certifier(algo, seed):
    rules = get_game("kuhn")
    if algo == "cert-lp":
        return ExactSolveCertifier(rules, seed=seed,
                                   track_uncertainty=False)
    return RegretCertifier(rules, seed=seed, backend="cfr",
                           track_uncertainty=False)


def run_curve(algo, seed, checkpoints):
    cert = make_certifier(algo, seed)
    marks = set(checkpoints)
    gaps = {}
    for i in range(1, max(checkpoints) + 1):
        cert.step()
        if i in marks:
            gaps[i] = cert.provable_gap()
    return gaps


def fitted_slope(ts, gaps):
    xs = [math.log(t) for t in ts]
    ys = [math.log(g) for g in gaps]
    mx = sum(xs) / len(xs)
    my = sum(ys) / len(ys)
    num = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    den = sum((x - mx) ** 2 for x in xs)
    return -num / den


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--max-t", type=int, default=100000)
    ap.add_argument("--out", default="kuhn_convergence.csv")
    args = ap.parse_args()
    checkpoints = [t for t in CHECKPOINTS if t <= args.max_t]

    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["algo", "seed", "t", "provable_gap"])
        for algo in ("cert-lp", "cert-cfr"):
            per_t = {t: [] for t in checkpoints}
            for seed in range(args.seeds):
                gaps = run_curve(algo, seed, checkpoints)
                for t, g in gaps.items():
                    per_t[t].append(g)
                    writer.writerow([algo, seed, t, repr(g)])
                print(f"{algo} seed {seed}: "
                      + " ".join(f"{gaps[t]:.4f}" for t in checkpoints),
                      flush=True)
            medians = [statistics.median(per_t[t]) for t in checkpoints]
            if len(checkpoints) >= 2:
                print(f"{algo} median slope: "
                      f"{fitted_slope(checkpoints, medians):.3f}")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
