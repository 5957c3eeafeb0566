"""Explicit extensive-form game trees with imperfect information.

Games are stored as explicit trees. Each node carries the utility gained
*at* that node (internal rewards are allowed, not only terminal payoffs)
together with per-player bounds on the residual utility collectible from
the node onward, where "residual" always includes the node's own reward.
Node identity is the action path from the root; information sets are
identified by (player, observation-string) pairs supplied by the game.

Player 0 is chance. Real players are numbered 1..n and indexed into
reward/bound vectors at position player-1.
"""

from __future__ import annotations

from dataclasses import dataclass, field


InfosetKey = tuple  # (player: int, key: str)
Sequence = tuple    # ((infoset_key_str, action), ...) for one player

PROB_TOL = 1e-9
POLYTOPE_TOL = 1e-7


class CertigameError(Exception):
    pass


class IncompleteProfileError(CertigameError):
    """A reachable decision node has no distribution in the profile."""


class PseudogameRequiredError(CertigameError):
    """Exact evaluation hit a frontier node; only bound evaluation applies."""


class ZeroSumRequiredError(CertigameError):
    pass


class InvalidSequenceFormError(CertigameError):
    pass


class ChancePolicyError(CertigameError):
    """A reachable chance node has no known distribution."""


class Node:
    """One tree node.

    ``player`` is 0 for chance, 1..n for players, and None for terminals.
    ``reward`` is the per-player utility gained at this node. ``lower`` and
    ``upper`` bound the residual utility from this node on (including
    ``reward``). A frontier node is a pseudo-leaf: only its bounds are
    known and it stores no children.
    """

    __slots__ = ("path", "player", "infoset", "actions", "children",
                 "reward", "lower", "upper", "frontier", "chance")

    def __init__(self, path, player, reward, lower, upper, actions=(),
                 infoset=None, frontier=False, chance=None):
        self.path = path
        self.player = player
        self.infoset = infoset
        self.actions = tuple(actions)
        self.children = {}
        self.reward = tuple(reward)
        self.lower = tuple(lower)
        self.upper = tuple(upper)
        self.frontier = frontier
        self.chance = chance if chance is None else tuple(chance)

    @property
    def is_terminal(self):
        return not self.frontier and not self.actions

    def __repr__(self):
        kind = "frontier" if self.frontier else (
            "terminal" if self.is_terminal else f"p{self.player}")
        return f"Node({'/'.join(self.path) or 'root'}, {kind})"


class GameTree:
    """A rooted tree of Nodes plus a by-path index.

    Trees double as oracle games (fully expanded, chance distributions
    attached to chance nodes) and as pseudogame trunks (frontier flags
    active, chance distributions estimated elsewhere).
    """

    def __init__(self, root, num_players):
        self.root = root
        self.num_players = num_players
        self.nodes = {}
        self._zs_cache = None
        self.index(root)

    def index(self, node):
        """Register node and all stored descendants in the path index."""
        stack = [node]
        while stack:
            nd = stack.pop()
            self.nodes[nd.path] = nd
            stack.extend(nd.children.values())

    @property
    def node_count(self):
        return len(self.nodes)

    def walk(self):
        stack = [self.root]
        while stack:
            nd = stack.pop()
            yield nd
            stack.extend(nd.children.values())

    @property
    def zero_sum(self):
        """Two players and every stored reward vector sums to ~0."""
        if self.num_players != 2:
            return False
        cached = self._zs_cache
        if cached is not None and cached[0] == len(self.nodes):
            return cached[1]
        ok = all(abs(nd.reward[0] + nd.reward[1]) <= PROB_TOL
                 for nd in self.nodes.values())
        self._zs_cache = (len(self.nodes), ok)
        return ok

    def chance_policy(self):
        """Map node path -> true action distribution, where known."""
        return {nd.path: dict(zip(nd.actions, nd.chance))
                for nd in self.nodes.values()
                if nd.player == 0 and nd.chance is not None}

    def reward_range(self, player):
        """Declared residual reward range at the root for one player."""
        i = player - 1
        return self.root.upper[i] - self.root.lower[i]


class BehaviorProfile:
    """Per-infoset action distributions, possibly for several players.

    ``dists`` maps (player, key) -> {action: probability}. A profile may
    be partial; callers decide whether missing infosets are an error or
    fall back to uniform.
    """

    def __init__(self, dists=None):
        self.dists = dict(dists or {})

    def get(self, infoset):
        return self.dists.get(infoset)

    def set(self, infoset, dist):
        self.dists[infoset] = dict(dist)

    def distribution(self, infoset, actions=None, fallback_uniform=False):
        d = self.dists.get(infoset)
        if d is None:
            if fallback_uniform and actions:
                p = 1.0 / len(actions)
                return {a: p for a in actions}
            raise IncompleteProfileError("incomplete profile")
        return d

    def merged_with(self, other):
        out = dict(self.dists)
        out.update(other.dists)
        return BehaviorProfile(out)

    def restricted_to(self, player):
        return BehaviorProfile({k: v for k, v in self.dists.items()
                                if k[0] == player})

    def copy(self):
        return BehaviorProfile({k: dict(v) for k, v in self.dists.items()})

    def __len__(self):
        return len(self.dists)

    def __repr__(self):
        return f"BehaviorProfile({len(self.dists)} infosets)"


def uniform_dist(actions):
    p = 1.0 / len(actions)
    return {a: p for a in actions}


def uniform_profile(game):
    """Uniform behavior at every player infoset of the tree."""
    dists = {}
    for nd in game.walk():
        if nd.player is not None and nd.player > 0 and nd.infoset is not None:
            if nd.infoset not in dists:
                dists[nd.infoset] = uniform_dist(nd.actions)
    return BehaviorProfile(dists)


@dataclass
class SequenceStrategy:
    """Sequence-form vector for one player.

    ``values`` maps Sequence -> reach contribution sigma(s). The empty
    sequence has value 1; at every infoset the children values sum to the
    parent sequence's value.
    """

    player: int
    values: dict = field(default_factory=dict)


def expected_value(game, profile, fallback_uniform=False):
    """Exact per-player expected utility of a profile on an oracle tree.

    Zero-probability branches are skipped, so infosets that the profile
    itself makes unreachable need not be covered. Hitting a reachable
    frontier node is an error: only pseudogame evaluation applies there.
    """
    n = game.num_players

    def value(node):
        if node.frontier:
            raise PseudogameRequiredError(
                "bounds required, use pseudogame evaluation")
        vals = list(node.reward)
        if not node.actions:
            return vals
        if node.player == 0:
            if node.chance is None:
                raise ChancePolicyError("chance policy required")
            dist = zip(node.actions, node.chance)
        else:
            d = profile.distribution(node.infoset, node.actions,
                                     fallback_uniform)
            dist = ((a, d.get(a, 0.0)) for a in node.actions)
        for a, p in dist:
            if p == 0.0:
                continue
            child = value(node.children[a])
            for i in range(n):
                vals[i] += p * child[i]
        return vals

    return tuple(value(game.root))


def best_response(game, player, opponents, fallback_uniform=False):
    """Pure best response of ``player`` against fixed opponent behavior.

    Returns (profile, value). Works under imperfect information: action
    choice at an infoset maximizes the counterfactual-reach-weighted sum
    of member-node continuation values, with infoset decisions resolved
    lazily (members' subtrees only reference strictly longer own
    sequences, so the recursion is well founded under perfect recall).
    """
    pi = player - 1

    # Pass 1: counterfactual reach (chance and opponents only) per node,
    # plus infoset membership for the responding player.
    reach = {}
    members = {}
    stack = [(game.root, 1.0)]
    while stack:
        node, r = stack.pop()
        reach[node.path] = reach.get(node.path, 0.0) + r
        if node.frontier:
            if r > PROB_TOL:
                raise PseudogameRequiredError(
                    "bounds required, use pseudogame evaluation")
            continue
        if not node.actions:
            continue
        if node.player == 0:
            if node.chance is None:
                raise ChancePolicyError("chance policy required")
            for a, p in zip(node.actions, node.chance):
                if p > 0.0:
                    stack.append((node.children[a], r * p))
        elif node.player == player:
            members.setdefault(node.infoset, []).append(node)
            for a in node.actions:
                stack.append((node.children[a], r))
        else:
            d = opponents.distribution(node.infoset, node.actions,
                                       fallback_uniform)
            for a in node.actions:
                p = d.get(a, 0.0)
                if p > 0.0:
                    stack.append((node.children[a], r * p))

    value_memo = {}
    action_memo = {}

    def value(node):
        got = value_memo.get(node.path)
        if got is not None:
            return got
        if node.frontier:
            # only reachable through zero-probability edges; weight is 0
            v = 0.0
        elif not node.actions:
            v = node.reward[pi]
        elif node.player == 0:
            v = node.reward[pi]
            for a, p in zip(node.actions, node.chance):
                if p > 0.0:
                    v += p * value(node.children[a])
        elif node.player == player:
            v = node.reward[pi] + value(node.children[choose(node.infoset)])
        else:
            d = opponents.distribution(node.infoset, node.actions,
                                       fallback_uniform)
            v = node.reward[pi]
            for a in node.actions:
                p = d.get(a, 0.0)
                if p > 0.0:
                    v += p * value(node.children[a])
        value_memo[node.path] = v
        return v

    def choose(ikey):
        got = action_memo.get(ikey)
        if got is not None:
            return got
        nodes = members[ikey]
        actions = nodes[0].actions
        weighted = [(nd, reach[nd.path]) for nd in nodes
                    if reach[nd.path] > 0.0]
        best_a, best_s = actions[0], None
        for a in actions:
            s = sum(r * value(nd.children[a]) for nd, r in weighted)
            if best_s is None or s > best_s + PROB_TOL:
                best_a, best_s = a, s
        action_memo[ikey] = best_a
        return best_a

    root_value = value(game.root)
    # Resolve every encountered infoset so the returned profile is total
    # over the player's reachable decision space.
    for ikey in list(members):
        choose(ikey)
    profile = BehaviorProfile(
        {ikey: {a: (1.0 if a == action_memo[ikey] else 0.0)
                for a in members[ikey][0].actions}
         for ikey in members})
    return profile, root_value


def nash_gap(game, profile, fallback_uniform=False):
    """Sum of both players' best-response improvements; 0 at equilibrium."""
    if game.num_players != 2 or not game.zero_sum:
        raise ZeroSumRequiredError("zero-sum required")
    _, v1 = best_response(game, 1, profile, fallback_uniform)
    _, v2 = best_response(game, 2, profile, fallback_uniform)
    return v1 + v2


def to_sequence_form(profile, player, game):
    """Sequence-form vector of one player's behavior on a tree.

    Missing infoset distributions are treated as uniform (the same
    convention used everywhere else for off-support play).
    """
    values = {(): 1.0}

    def walk(node, seq):
        if node.frontier or not node.actions:
            return
        if node.player == player:
            ikey = node.infoset
            d = profile.get(ikey)
            if d is None:
                d = uniform_dist(node.actions)
            v = values[seq]
            for a in node.actions:
                s2 = seq + ((ikey[1], a),)
                if s2 not in values:
                    values[s2] = v * d.get(a, 0.0)
                walk(node.children[a], s2)
        else:
            for a in node.actions:
                walk(node.children[a], seq)

    walk(game.root, ())
    return SequenceStrategy(player, values)


def from_sequence_form(seq, game):
    """Behavior profile realizing a sequence-form vector on a tree.

    Zero-reach infosets get uniform behavior. Polytope constraints are
    validated to POLYTOPE_TOL; violations raise InvalidSequenceFormError.
    """
    values = seq.values
    if abs(values.get((), 1.0) - 1.0) > POLYTOPE_TOL:
        raise InvalidSequenceFormError("invalid sequence-form vector")
    for v in values.values():
        if v < -POLYTOPE_TOL or v > 1.0 + POLYTOPE_TOL:
            raise InvalidSequenceFormError("invalid sequence-form vector")

    dists = {}

    def walk(node, sq):
        if node.frontier or not node.actions:
            return
        if node.player == seq.player:
            ikey = node.infoset
            if ikey not in dists:
                parent = values.get(sq, 0.0)
                child_vals = [values.get(sq + ((ikey[1], a),), 0.0)
                              for a in node.actions]
                if abs(sum(child_vals) - parent) > POLYTOPE_TOL:
                    raise InvalidSequenceFormError(
                        "invalid sequence-form vector")
                if parent <= 0.0:
                    dists[ikey] = uniform_dist(node.actions)
                else:
                    raw = [max(0.0, v) / parent for v in child_vals]
                    norm = sum(raw)
                    dists[ikey] = {a: r / norm
                                   for a, r in zip(node.actions, raw)}
            for a in node.actions:
                walk(node.children[a], sq + ((ikey[1], a),))
        else:
            for a in node.actions:
                walk(node.children[a], sq)

    walk(game.root, ())
    return BehaviorProfile(dists)


def _implied_mass(seq, sums, premass, infoset_actions, total_weight):
    """Accumulated reach mass routed through a sequence so far.

    For sequences that existed when past strategies were recorded this is
    just the accumulated sum; mass reaching an infoset that did not yet
    exist is spread uniformly over its actions.
    """
    if not seq:
        return total_weight
    key = seq[-1][0]
    base = sums.get(seq, 0.0)
    if key in premass:
        base += premass[key] / len(infoset_actions[key])
    return base


def average_profile(profiles, weights=None):
    """Weighted average of sequence-form strategies, as behavior.

    Strategies are taken in chronological order and may live on growing
    (nested) sequence spaces: weight recorded before an infoset existed
    is credited to the parent sequence and treated as uniform at the new
    infoset from its first appearance on.
    """
    if not profiles:
        raise ValueError("nothing to average")
    if weights is None:
        weights = [1.0] * len(profiles)
    if sum(weights) <= 0.0:
        raise ValueError("nothing to average")
    player = profiles[0].player

    sums = {}
    premass = {}           # infoset key string -> frozen pre-creation mass
    infoset_actions = {}   # infoset key string -> action list
    infoset_seq = {}       # infoset key string -> its parent sequence
    total_w = 0.0

    for sp, w in zip(profiles, weights):
        if sp.player != player:
            raise ValueError("profiles belong to different players")
        for s in sorted(sp.values, key=len):
            if not s:
                continue
            key, action = s[-1]
            if key not in infoset_actions:
                infoset_actions[key] = [action]
                infoset_seq[key] = s[:-1]
                premass[key] = _implied_mass(s[:-1], sums, premass,
                                             infoset_actions, total_w)
            elif action not in infoset_actions[key]:
                infoset_actions[key].append(action)
        for s, v in sp.values.items():
            sums[s] = sums.get(s, 0.0) + w * v
        total_w += w

    dists = {}
    for key, actions in infoset_actions.items():
        parent = infoset_seq[key]
        share = premass[key] / len(actions)
        masses = [sums.get(parent + ((key, a),), 0.0) + share
                  for a in actions]
        total = sum(masses)
        if total <= 0.0:
            dists[(player, key)] = uniform_dist(actions)
        else:
            dists[(player, key)] = {a: m / total
                                    for a, m in zip(actions, masses)}
    return BehaviorProfile(dists)
