"""Goofspiel with random prize order and difference-based utility.

Each round a prize is revealed uniformly from the remaining deck, both
players secretly bid one card from their hand, and the higher bid wins
the prize; ties split it (the split cancels in the utility difference,
which is what players optimize, so a tie is worth 0). The round result
is delivered as a reward at the node where it becomes known: the next
reveal node, or the terminal node after the last bid.

The last round is forced but still played out through the reveal and the
player-1 bid (each with a single action) so that trajectories always
contain one reveal and one bid per round; only player 2's forced final
bid is folded into the terminal node.

Residual bounds at any node are the already-banked reward plus/minus the
total value of all prizes whose rounds are still undecided.
"""

from __future__ import annotations

from dataclasses import dataclass

from .base import GameRules, Observation


@dataclass(frozen=True)
class GoofState:
    phase: str          # "reveal" | "bid1" | "bid2" | "end"
    remaining: tuple    # prizes not yet revealed
    hand1: tuple
    hand2: tuple
    revealed: tuple     # prizes in reveal order
    bids1: tuple
    bids2: tuple
    outcomes: tuple     # "1" | "2" | "t" per finished round
    pending: tuple      # reward delivered at the current node
    cur_bid1: object = None


def _score(c1, c2, prize):
    if c1 > c2:
        return (float(prize), -float(prize)), "1"
    if c2 > c1:
        return (-float(prize), float(prize)), "2"
    return (0.0, 0.0), "t"


def _span(reward, undecided):
    u = float(undecided)
    return ((reward[0] - u, reward[1] - u), (reward[0] + u, reward[1] + u))


class Goofspiel(GameRules):
    num_players = 2
    zero_sum = True

    def __init__(self, k):
        if k < 2:
            raise ValueError("invalid goofspiel size, need k >= 2")
        self.k = k
        self.game_id = f"goofspiel:{k}"

    def initial_state(self):
        deck = tuple(range(1, self.k + 1))
        return GoofState("reveal", deck, deck, deck, (), (), (), (),
                         (0.0, 0.0))

    def next_state(self, state, action):
        v = int(action)
        if state.phase == "reveal":
            rem = tuple(x for x in state.remaining if x != v)
            return GoofState("bid1", rem, state.hand1, state.hand2,
                             state.revealed + (v,), state.bids1,
                             state.bids2, state.outcomes, (0.0, 0.0))
        if state.phase == "bid1":
            hand1 = tuple(x for x in state.hand1 if x != v)
            prize = state.revealed[-1]
            if not hand1:
                # final round: fold player 2's forced bid into the terminal
                c2 = state.hand2[0]
                reward, res = _score(v, c2, prize)
                return GoofState("end", state.remaining, (), (),
                                 state.revealed, state.bids1 + (v,),
                                 state.bids2 + (c2,),
                                 state.outcomes + (res,), reward)
            return GoofState("bid2", state.remaining, hand1, state.hand2,
                             state.revealed, state.bids1 + (v,),
                             state.bids2, state.outcomes, (0.0, 0.0),
                             cur_bid1=v)
        if state.phase == "bid2":
            hand2 = tuple(x for x in state.hand2 if x != v)
            prize = state.revealed[-1]
            reward, res = _score(state.cur_bid1, v, prize)
            return GoofState("reveal", state.remaining, state.hand1, hand2,
                             state.revealed, state.bids1,
                             state.bids2 + (v,), state.outcomes + (res,),
                             reward)
        raise ValueError("terminal state has no successors")

    def _path(self, state):
        out = []
        full = len(state.bids2)
        if state.phase == "end":
            full -= 1      # the forced final bid is not a tree edge
        for i in range(len(state.revealed)):
            out.append(str(state.revealed[i]))
            if i < len(state.bids1):
                out.append(str(state.bids1[i]))
            if i < full:
                out.append(str(state.bids2[i]))
        return tuple(out)

    def describe(self, state):
        path = self._path(state)
        if state.phase == "end":
            lo, hi = _span(state.pending, 0)
            return Observation(path=path, player=None, infoset=None,
                               actions=(), reward=state.pending,
                               lower=lo, upper=hi)
        if state.phase == "reveal":
            undecided = sum(state.remaining)
            lo, hi = _span(state.pending, undecided)
            actions = tuple(str(p) for p in state.remaining)
            m = len(state.remaining)
            return Observation(
                path=path, player=0, infoset=None, actions=actions,
                reward=state.pending, lower=lo, upper=hi,
                child_bounds={a: _span((0.0, 0.0), undecided)
                              for a in actions},
                chance_signature=f"goof:{m}",
                chance_probs=(1.0 / m,) * m)

        prize = state.revealed[-1]
        undecided = prize + sum(state.remaining)
        lo, hi = _span((0.0, 0.0), undecided)
        if state.phase == "bid1":
            actions = tuple(str(c) for c in state.hand1)
            child_bounds = {}
            for a in actions:
                if len(state.hand1) == 1:
                    reward, _ = _score(int(a), state.hand2[0], prize)
                    child_bounds[a] = _span(reward, 0)
                else:
                    child_bounds[a] = (lo, hi)
            key = self._infoset(state, state.bids1)
            return Observation(path=path, player=1, infoset=key,
                               actions=actions, reward=(0.0, 0.0),
                               lower=lo, upper=hi,
                               child_bounds=child_bounds)
        actions = tuple(str(c) for c in state.hand2)
        future = sum(state.remaining)
        child_bounds = {}
        for a in actions:
            reward, _ = _score(state.cur_bid1, int(a), prize)
            child_bounds[a] = _span(reward, future)
        key = self._infoset(state, state.bids2)
        return Observation(path=path, player=2, infoset=key,
                           actions=actions, reward=(0.0, 0.0),
                           lower=lo, upper=hi, child_bounds=child_bounds)

    def _infoset(self, state, own_bids):
        rev = "+".join(str(p) for p in state.revealed)
        own = "+".join(str(c) for c in own_bids)
        res = "".join(state.outcomes)
        return f"r:{rev}|b:{own}|o:{res}"
