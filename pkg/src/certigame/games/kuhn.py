"""Three-card Kuhn poker as a black-box simulator.

One chance node deals an ordered pair of distinct cards (six outcomes,
uniform), then the standard one-round betting tree: check/bet, then
fold/call when facing a bet. Residual bounds are pot-based and carry no
card information: a player can never lose more than their current
contribution plus one future chip, so every interior node is bounded by
[-2, 2] for player 1 and the mirror for player 2.
"""

from __future__ import annotations

import itertools

from .base import GameRules, Observation

CARDS = ("J", "Q", "K")
RANK = {"J": 0, "Q": 1, "K": 2}
DEALS = tuple(a + b for a, b in itertools.permutations(CARDS, 2))

SHOWDOWN_POT = {"kk": 1.0, "bc": 2.0, "kbc": 2.0}
FOLD_VALUE = {"bf": 1.0, "kbf": -1.0}       # player-1 utility
TO_ACT = {"": 1, "k": 2, "b": 2, "kb": 1}
MOVES = {"": ("k", "b"), "k": ("k", "b"),
         "b": ("f", "c"), "kb": ("f", "c")}
# (player 1, player 2) contribution so far / max future addition
CONTRIB = {"": (1, 1), "k": (1, 1), "b": (2, 1), "kb": (1, 2)}
MAX_ADD = {"": (1, 1), "k": (1, 1), "b": (0, 1), "kb": (1, 0)}


def _utility(deal, hist):
    if hist in FOLD_VALUE:
        u1 = FOLD_VALUE[hist]
    else:
        pot = SHOWDOWN_POT[hist]
        u1 = pot if RANK[deal[0]] > RANK[deal[1]] else -pot
    return (u1, -u1)


def _bounds(deal, hist):
    if hist in SHOWDOWN_POT or hist in FOLD_VALUE:
        u = _utility(deal, hist)
        return u, u
    c1, c2 = CONTRIB[hist]
    m1, m2 = MAX_ADD[hist]
    hi1 = float(c2 + m2)
    lo1 = -float(c1 + m1)
    return (lo1, -hi1), (hi1, -lo1)


class Kuhn(GameRules):
    game_id = "kuhn"
    num_players = 2
    zero_sum = True

    def initial_state(self):
        return None

    def next_state(self, state, action):
        if state is None:
            return (action, "")
        deal, hist = state
        return (deal, hist + action)

    def describe(self, state):
        if state is None:
            span = ((-2.0, -2.0), (2.0, 2.0))
            return Observation(
                path=(), player=0, infoset=None, actions=DEALS,
                reward=(0.0, 0.0), lower=span[0], upper=span[1],
                child_bounds={d: _bounds(d, "") for d in DEALS},
                chance_signature="deal",
                chance_probs=(1.0 / 6,) * 6)
        deal, hist = state
        path = (deal,) + tuple(hist)
        lo, hi = _bounds(deal, hist)
        if hist in SHOWDOWN_POT or hist in FOLD_VALUE:
            return Observation(path=path, player=None, infoset=None,
                               actions=(), reward=_utility(deal, hist),
                               lower=lo, upper=hi)
        player = TO_ACT[hist]
        card = deal[player - 1]
        return Observation(
            path=path, player=player, infoset=f"{card}|{hist}",
            actions=MOVES[hist], reward=(0.0, 0.0), lower=lo, upper=hi,
            child_bounds={a: _bounds(deal, hist + a) for a in MOVES[hist]})
