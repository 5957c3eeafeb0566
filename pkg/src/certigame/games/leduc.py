"""Leduc-style hold'em on a 2-suit deck with k ranks.

Suits never influence payoffs, so chance outcomes are ranks with
multiplicities: the first private card is uniform over k ranks, the
second is drawn from the 2k-1 remaining cards, and the community card
from the remaining 2k-2 (a rank disappears from the deck once both of
its cards are dealt). Community deal nodes that differ only in the order
of the private deal share a chance signature.

Betting: ante 1, two rounds with a two-wager cap each, fixed bet sizes
of 2 in round one and 4 in round two, player 1 acting first in both.
Payoffs are the loser's total contribution (fold pays the folder's
chips, showdown pays the matched pot; a pair beats everything, otherwise
higher rank wins and equal ranks tie).

Residual bounds are chip-based: a player can never lose more than their
current contribution plus the largest sum of future wagers, giving the
exact [-13, +13] envelope at the root for any k.
"""

from __future__ import annotations

from .base import GameRules, Observation

BETS = (2, 4)
CAP = 2          # wagers per round
ANTE = 1


def _round_actions(h):
    if h in ("", "k"):
        return ("k", "b")
    wagers = h.count("b") + h.count("r")
    return ("f", "c", "r") if wagers < CAP else ("f", "c")


def _round_over(h):
    return h == "kk" or (bool(h) and h[-1] == "c")


def _round_folded(h):
    return bool(h) and h[-1] == "f"


def _to_act(h):
    return 1 + (len(h) % 2)


def _round_contrib(h, bet):
    c = [0, 0]
    high = 0
    for i, ch in enumerate(h):
        actor = i % 2
        if ch in ("b", "r"):
            high += bet
            c[actor] = high
        elif ch == "c":
            c[actor] = high
    return c


class Leduc(GameRules):
    num_players = 2
    zero_sum = True

    def __init__(self, k):
        if k < 2:
            raise ValueError("invalid leduc size, need k >= 2")
        self.k = k
        self.game_id = f"leduc:{k}"

    # States are tuples tagged by stage:
    #   ("deal1",)
    #   ("deal2", r1)
    #   ("bet1", r1, r2, h1)
    #   ("community", r1, r2, h1)
    #   ("bet2", r1, r2, h1, comm, h2)
    #   ("fold", r1, r2, h1, comm, h2)   comm/h2 None if round-1 fold
    #   ("showdown", r1, r2, h1, comm, h2)

    def initial_state(self):
        return ("deal1",)

    def next_state(self, state, action):
        stage = state[0]
        if stage == "deal1":
            return ("deal2", int(action))
        if stage == "deal2":
            return ("bet1", state[1], int(action), "")
        if stage == "bet1":
            _, r1, r2, h1 = state
            h1 = h1 + action
            if _round_folded(h1):
                return ("fold", r1, r2, h1, None, None)
            if _round_over(h1):
                return ("community", r1, r2, h1)
            return ("bet1", r1, r2, h1)
        if stage == "community":
            _, r1, r2, h1 = state
            return ("bet2", r1, r2, h1, int(action), "")
        if stage == "bet2":
            _, r1, r2, h1, comm, h2 = state
            h2 = h2 + action
            if _round_folded(h2):
                return ("fold", r1, r2, h1, comm, h2)
            if _round_over(h2):
                return ("showdown", r1, r2, h1, comm, h2)
            return ("bet2", r1, r2, h1, comm, h2)
        raise ValueError("terminal state has no successors")

    def _contrib(self, state):
        h1 = state[3] if len(state) > 3 else ""
        h2 = state[5] if len(state) > 5 and state[5] is not None else ""
        c1 = _round_contrib(h1, BETS[0])
        c2 = _round_contrib(h2, BETS[1])
        return [ANTE + c1[i] + c2[i] for i in range(2)]

    def _utility(self, state):
        stage = state[0]
        c = self._contrib(state)
        if stage == "fold":
            h = state[5] if state[5] is not None else state[3]
            folder = (len(h) - 1) % 2
            u1 = c[1] if folder == 1 else -c[0]
            return (float(u1), -float(u1))
        r1, r2, comm = state[1], state[2], state[4]
        if r1 == r2:
            return (0.0, 0.0)
        if r1 == comm:
            win = 0
        elif r2 == comm:
            win = 1
        else:
            win = 0 if r1 > r2 else 1
        u1 = c[1] if win == 0 else -c[0]
        return (float(u1), -float(u1))

    def _bounds(self, state):
        stage = state[0]
        if stage in ("fold", "showdown"):
            u = self._utility(state)
            return u, u
        c = self._contrib(state)
        if stage in ("deal1", "deal2"):
            fut = [CAP * BETS[0] + CAP * BETS[1]] * 2
        elif stage == "bet1":
            rc = _round_contrib(state[3], BETS[0])
            fut = [CAP * BETS[0] - rc[i] + CAP * BETS[1] for i in range(2)]
        elif stage == "community":
            fut = [CAP * BETS[1]] * 2
        else:
            rc = _round_contrib(state[5], BETS[1])
            fut = [CAP * BETS[1] - rc[i] for i in range(2)]
        lo1 = -float(c[0] + fut[0])
        hi1 = float(c[1] + fut[1])
        return (lo1, -hi1), (hi1, -lo1)

    def _path(self, state):
        stage = state[0]
        if stage == "deal1":
            return ()
        out = [str(state[1])]
        if len(state) > 2:
            out.append(str(state[2]))
        if len(state) > 3:
            out.extend(state[3])
        if len(state) > 4 and state[4] is not None:
            out.append(str(state[4]))
            out.extend(state[5])
        return tuple(out)

    def _deal_counts(self, minus):
        counts = {}
        for r in range(self.k):
            c = 2 - minus.count(r)
            if c > 0:
                counts[r] = c
        return counts

    def describe(self, state):
        stage = state[0]
        path = self._path(state)
        lo, hi = self._bounds(state)
        if stage in ("fold", "showdown"):
            return Observation(path=path, player=None, infoset=None,
                               actions=(), reward=self._utility(state),
                               lower=lo, upper=hi)
        if stage in ("deal1", "deal2", "community"):
            if stage == "deal1":
                dealt, sig = [], "dealt:"
            elif stage == "deal2":
                dealt = [state[1]]
                sig = f"dealt:{state[1]}"
            else:
                dealt = [state[1], state[2]]
                sig = f"dealt:{min(dealt)},{max(dealt)}"
            counts = self._deal_counts(dealt)
            total = float(2 * self.k - len(dealt))
            actions = tuple(str(r) for r in counts)
            return Observation(
                path=path, player=0, infoset=None, actions=actions,
                reward=(0.0, 0.0), lower=lo, upper=hi,
                child_bounds={a: self._bounds(self.next_state(state, a))
                              for a in actions},
                chance_signature=sig,
                chance_probs=tuple(counts[r] / total for r in counts))
        if stage == "bet1":
            _, r1, r2, h = state
            player = _to_act(h)
            own = r1 if player == 1 else r2
            key = f"{own}|{h}"
        else:
            _, r1, r2, h1, comm, h = state
            player = _to_act(h)
            own = r1 if player == 1 else r2
            key = f"{own}|{h1}|{comm}|{h}"
        actions = _round_actions(h)
        return Observation(
            path=path, player=player, infoset=key, actions=actions,
            reward=(0.0, 0.0), lower=lo, upper=hi,
            child_bounds={a: self._bounds(self.next_state(state, a))
                          for a in actions})
