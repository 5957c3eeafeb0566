"""Black-box simulator interface, playthroughs, registry, oracle expansion.

A game exposes opaque states plus a ``describe`` view of the current node.
Everything a learner may legally see is in the Observation: the acting
player, an observation string naming the infoset, legal actions, the
utility gained at the node, residual utility bounds for the node and for
each child, and (for chance nodes) a signature that groups nodes sharing
one distribution. The true chance law is also reported so that oracle
expansion and known-chance runs can use it; estimators in the unknown
modes never read it.
"""

from __future__ import annotations

import math
import os
import random
from dataclasses import dataclass, field

from ..efg import (CertigameError, GameTree, IncompleteProfileError, Node,
                   uniform_dist)

DEFAULT_NODE_CAP = 500_000


class UnknownGameError(CertigameError):
    pass


class OracleTooLargeError(CertigameError):
    pass


@dataclass(frozen=True)
class Observation:
    """Everything the black box reveals at one visited node."""

    path: tuple
    player: object          # int (0 = chance) or None for terminals
    infoset: object         # observation string for player nodes
    actions: tuple
    reward: tuple
    lower: tuple            # residual bounds, own reward included
    upper: tuple
    child_bounds: dict = field(default_factory=dict)
    chance_signature: object = None
    chance_probs: object = None


@dataclass
class Trajectory:
    """One root-to-terminal playthrough; last step carries action None."""

    steps: list
    seed: int

    def __len__(self):
        return len(self.steps) - 1

    @property
    def terminal(self):
        return self.steps[-1][0]


class GameRules:
    """Abstract state-machine game. Subclasses are immutable."""

    game_id = None
    num_players = 1
    zero_sum = False

    def initial_state(self):
        raise NotImplementedError

    def describe(self, state):
        raise NotImplementedError

    def next_state(self, state, action):
        raise NotImplementedError


def _sample(rng, actions, probs):
    r = rng.random()
    acc = 0.0
    for a, p in zip(actions, probs):
        acc += p
        if r < acc:
            return a
    return actions[-1]


def play(game, profile=None, seed=0, fallback_uniform=True):
    """Run one playthrough and return its Trajectory.

    Player moves are sampled from ``profile`` where it covers the infoset
    and uniformly otherwise (unless fallback is disabled, which raises).
    Deterministic given (game, profile, seed).
    """
    if isinstance(game, str):
        game = get_game(game)
    rng = random.Random(seed)
    state = game.initial_state()
    steps = []
    while True:
        obs = game.describe(state)
        if not obs.actions:
            steps.append((obs, None))
            return Trajectory(steps, seed)
        if obs.player == 0:
            action = _sample(rng, obs.actions, obs.chance_probs)
        else:
            ikey = (obs.player, obs.infoset)
            d = profile.get(ikey) if profile is not None else None
            if d is None:
                if not fallback_uniform:
                    raise IncompleteProfileError("incomplete profile")
                d = uniform_dist(obs.actions)
            action = _sample(rng, obs.actions,
                             [d.get(a, 0.0) for a in obs.actions])
        steps.append((obs, action))
        state = game.next_state(state, action)


def trajectory_record(traj):
    """JSON-ready dict for one playthrough; one line of a JSONL log.

    Stores enough to replay the path against the rules: the action path,
    acting player, infoset observation, chosen action, and the reward
    collected at each visited node.
    """
    steps = []
    for obs, action in traj.steps:
        steps.append({"path": list(obs.path), "player": obs.player,
                      "infoset": obs.infoset, "action": action,
                      "reward": list(obs.reward)})
    return {"seed": traj.seed, "steps": steps}


def node_from_observation(obs, frontier=False):
    player = obs.player if obs.actions else None
    return Node(obs.path, player, obs.reward, obs.lower, obs.upper,
                actions=obs.actions,
                infoset=(obs.player, obs.infoset) if obs.infoset is not None
                and obs.player and obs.player > 0 else None,
                frontier=frontier,
                chance=obs.chance_probs if obs.player == 0 else None)


def oracle(game, node_cap=None):
    """Fully expand a game into an explicit GameTree with true chance law.

    Expansion refuses to exceed the node cap (CERTIGAME_NODE_CAP env var,
    default 500k).
    """
    if isinstance(game, str):
        game = get_game(game)
    if node_cap is None:
        node_cap = int(os.environ.get("CERTIGAME_NODE_CAP", DEFAULT_NODE_CAP))

    root_state = game.initial_state()
    root_obs = game.describe(root_state)
    root = node_from_observation(root_obs)
    tree = GameTree(root, game.num_players)
    stack = [(root, root_state, root_obs)]
    count = 1
    while stack:
        node, state, obs = stack.pop()
        for a in obs.actions:
            child_state = game.next_state(state, a)
            child_obs = game.describe(child_state)
            child = node_from_observation(child_obs)
            node.children[a] = child
            tree.nodes[child.path] = child
            count += 1
            if count > node_cap:
                raise OracleTooLargeError("oracle too large")
            if child_obs.actions:
                stack.append((child, child_state, child_obs))
    return tree


class TreeGame(GameRules):
    """Rules backed by an explicit tree; used for small custom games.

    Residual bounds are recomputed as exact min/max envelopes over the
    subtree, so the declared bounds of a TreeGame are always tight.
    """

    def __init__(self, game_id, tree, zero_sum=False, signature_fn=None):
        self.game_id = game_id
        self.num_players = tree.num_players
        self.zero_sum = zero_sum
        self.tree = tree
        self._signature_fn = signature_fn
        self._bounds = {}
        self._envelope(tree.root)

    def _envelope(self, node):
        n = self.num_players
        if not node.actions:
            lo = hi = tuple(node.reward)
        else:
            clo, chi = [], []
            for a in node.actions:
                l, h = self._envelope(node.children[a])
                clo.append(l)
                chi.append(h)
            lo = tuple(node.reward[i] + min(l[i] for l in clo)
                       for i in range(n))
            hi = tuple(node.reward[i] + max(h[i] for h in chi)
                       for i in range(n))
        node.lower = lo
        node.upper = hi
        self._bounds[node.path] = (lo, hi)
        return lo, hi

    def initial_state(self):
        return ()

    def next_state(self, state, action):
        return state + (action,)

    def describe(self, state):
        node = self.tree.nodes[state]
        sig = None
        if node.player == 0:
            sig = (self._signature_fn(node) if self._signature_fn
                   else "node:" + "/".join(node.path))
        return Observation(
            path=node.path,
            player=node.player if node.actions else None,
            infoset=node.infoset[1] if node.infoset else None,
            actions=node.actions,
            reward=node.reward,
            lower=node.lower,
            upper=node.upper,
            child_bounds={a: self._bounds[node.children[a].path]
                          for a in node.actions},
            chance_signature=sig,
            chance_probs=node.chance,
        )


_CUSTOM = {}
_CACHE = {}


def register_game(game_id, rules):
    """Register a process-local game instance under an id."""
    _CUSTOM[game_id] = rules
    _CACHE[game_id] = rules
    return game_id


def get_game(game_id):
    """Resolve a game id to rules. Unknown ids raise UnknownGameError."""
    got = _CACHE.get(game_id)
    if got is not None:
        return got
    if game_id in _CUSTOM:
        return _CUSTOM[game_id]

    from . import bandit, goofspiel, kuhn, leduc

    rules = None
    if game_id == "kuhn":
        rules = kuhn.Kuhn()
    elif game_id.startswith("goofspiel:"):
        rules = goofspiel.Goofspiel(_int_arg(game_id, 1))
    elif game_id.startswith("leduc:"):
        rules = leduc.Leduc(_int_arg(game_id, 1))
    elif game_id.startswith("bandit:sec4:"):
        parts = game_id.split(":")
        if len(parts) == 4:
            rules = bandit.bernoulli_vs_constant(float(parts[2]),
                                                 float(parts[3]))
    elif game_id.startswith("bandit:appB1:"):
        parts = game_id.split(":")
        if len(parts) == 3:
            rules = bandit.rare_loss_vs_sure_loss(int(parts[2]))
    if rules is None:
        raise UnknownGameError("no such game")
    rules.game_id = game_id
    _CACHE[game_id] = rules
    return rules


def _int_arg(game_id, pos):
    try:
        return int(game_id.split(":")[pos])
    except (IndexError, ValueError):
        raise UnknownGameError("no such game") from None


def validate_finite(values):
    for v in values:
        if not math.isfinite(v):
            raise ValueError("invalid bandit arm: unbounded support")
