"""Side-by-side demo: sound bound losses vs naive sampled-payoff losses.

Both learners run the same two-arm bandit (left arm Bernoulli, right arm
a known constant). The naive variant feeds raw observed payoffs to its
regret minimizer: its play converges to the good arm, but nothing makes
it revisit the other arm, so that arm's confidence radius stays wide and
the provable gap stalls. The sound variant minimizes optimistic bound
losses and keeps shrinking what it can prove.
"""

import argparse

from certigame.certify import RegretCertifier
from certigame.efg import expected_value
from certigame.games import get_game, oracle


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--game", default="bandit:sec4:0.3:0")
    ap.add_argument("--iters", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rules = get_game(args.game)
    tree = oracle(args.game)
    best = max(expected_value(tree, p, fallback_uniform=True)[0]
               for p in _pure_arm_profiles(tree))

    naive = RegretCertifier(rules, seed=args.seed, backend="mccfr",
                            loss_mode="sampled-payoff")
    sound = RegretCertifier(rules, seed=args.seed, backend="mccfr",
                            loss_mode="bounds")

    print(f"{'t':>6} {'naive_provable':>14} {'naive_true':>11} "
          f"{'sound_provable':>14} {'sound_true':>11}")
    for i in range(1, args.iters + 1):
        naive.step()
        sound.step()
        if i % max(1, args.iters // 10) == 0:
            row = [i]
            for cert in (naive, sound):
                ev = expected_value(tree, cert.average_profile(),
                                    fallback_uniform=True)[0]
                row += [cert.provable_gap(), best - ev]
            print(f"{row[0]:>6} {row[1]:>14.4f} {row[2]:>11.4f} "
                  f"{row[3]:>14.4f} {row[4]:>11.4f}", flush=True)
    print("\nthe naive column certifies nothing close to what it plays;"
          "\nthe sound column's provable gap keeps tracking its true gap")


def _pure_arm_profiles(tree):
    from certigame.efg import BehaviorProfile
    root = tree.root
    arms_node = root
    while arms_node.player in (0, None) and arms_node.children:
        arms_node = next(iter(arms_node.children.values()))
    key = arms_node.infoset
    for arm in arms_node.actions:
        yield BehaviorProfile({key: {arm: 1.0}})


if __name__ == "__main__":
    main()
