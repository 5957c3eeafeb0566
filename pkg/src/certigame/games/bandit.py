"""Single-player bandit games in tree form.

The root is the player's one decision over arms; each arm leads to a
chance node whose outcomes are terminal children carrying the reward.
These degenerate trees exercise the one-player corner of the machinery:
optimistic exact solving on them reduces to a UCB-style index rule.
"""

from __future__ import annotations

import itertools

from .base import GameRules, Observation, register_game, validate_finite

_counter = itertools.count(1)


class Bandit(GameRules):
    num_players = 1
    zero_sum = False

    def __init__(self, arms, game_id=None):
        """arms: list of (label, [(value, prob), ...])."""
        self.game_id = game_id
        self.arms = {}
        for label, outcomes in arms:
            total = sum(p for _, p in outcomes)
            if abs(total - 1.0) > 1e-9 or any(p < 0 for _, p in outcomes):
                raise ValueError("arm outcome probabilities must sum to 1")
            validate_finite([v for v, _ in outcomes])
            labels = [f"{v:g}" for v, _ in outcomes]
            if len(set(labels)) != len(labels):
                raise ValueError("duplicate outcome values in one arm")
            self.arms[label] = tuple((ol, float(v), float(p))
                                     for ol, (v, p) in zip(labels, outcomes))

    def _arm_bounds(self, label):
        vals = [v for _, v, _ in self.arms[label]]
        return (min(vals),), (max(vals),)

    def initial_state(self):
        return ()

    def next_state(self, state, action):
        return state + (action,)

    def describe(self, state):
        if state == ():
            spans = {a: self._arm_bounds(a) for a in self.arms}
            return Observation(
                path=(), player=1, infoset="arms",
                actions=tuple(self.arms), reward=(0.0,),
                lower=(min(lo[0] for lo, _ in spans.values()),),
                upper=(max(hi[0] for _, hi in spans.values()),),
                child_bounds=spans)
        if len(state) == 1:
            label = state[0]
            outs = self.arms[label]
            lo, hi = self._arm_bounds(label)
            return Observation(
                path=state, player=0, infoset=None,
                actions=tuple(ol for ol, _, _ in outs),
                reward=(0.0,), lower=lo, upper=hi,
                child_bounds={ol: ((v,), (v,)) for ol, v, _ in outs},
                chance_signature=f"arm:{label}",
                chance_probs=tuple(p for _, _, p in outs))
        label, out = state
        v = next(v for ol, v, _ in self.arms[label] if ol == out)
        return Observation(path=state, player=None, infoset=None,
                           actions=(), reward=(v,), lower=(v,), upper=(v,))


def bernoulli_vs_constant(p, eps):
    """Left arm Bernoulli on {0,1} with success p+eps, right arm constant 1/2."""
    q = p + eps
    if not 0.0 <= q <= 1.0:
        raise ValueError("bernoulli parameter out of range")
    return Bandit([("left", [(0.0, 1.0 - q), (1.0, q)]),
                   ("right", [(0.5, 1.0)])])


def rare_loss_vs_sure_loss(big_k):
    """Left arm pays -K w.p. 1/K else 0; right arm pays -1 surely."""
    if big_k < 1:
        raise ValueError("K must be at least 1")
    left = [(-float(big_k), 1.0 / big_k)]
    if big_k > 1:
        left.append((0.0, 1.0 - 1.0 / big_k))
    return Bandit([("left", left), ("right", [(-1.0, 1.0)])])


def make_bandit(arm_supports, game_id=None):
    """Register a custom bandit and return its game id.

    ``arm_supports`` is a list of reward distributions, one per arm, each
    a list of (value, probability) pairs. Custom ids are process-local.
    """
    arms = [(f"arm{i + 1}", outs) for i, outs in enumerate(arm_supports)]
    if game_id is None:
        game_id = f"bandit:custom{next(_counter)}"
    rules = Bandit(arms, game_id=game_id)
    return register_game(game_id, rules)
