"""Shared builders for small hand-made games used across the tests."""

import itertools
import random

from certigame.efg import GameTree, Node, BehaviorProfile, expected_value
from certigame.games import TreeGame


def build_tree(spec, num_players):
    """Build a GameTree from nested dicts.

    A node spec holds optional keys: player (0 = chance), infoset (key
    string), reward (per-player tuple), chance (probabilities aligned
    with the children order), children ({action: spec}). Nodes without
    children are terminal. Residual bounds are set to exact envelopes.
    """

    def rec(path, sp):
        reward = tuple(float(v) for v in sp.get("reward",
                                                (0.0,) * num_players))
        children = sp.get("children")
        if not children:
            return Node(path, None, reward, reward, reward)
        player = sp.get("player", 1)
        infoset = sp.get("infoset")
        node = Node(path, player, reward, reward, reward,
                    actions=tuple(children),
                    infoset=(player, infoset) if infoset else None,
                    chance=sp.get("chance"))
        for a, csp in children.items():
            node.children[a] = rec(path + (a,), csp)
        return node

    root = rec((), spec)
    _envelope(root, num_players)
    return GameTree(root, num_players)


def _envelope(node, n):
    if not node.actions:
        node.lower = node.upper = tuple(node.reward)
        return node.lower, node.upper
    los, his = [], []
    for a in node.actions:
        lo, hi = _envelope(node.children[a], n)
        los.append(lo)
        his.append(hi)
    node.lower = tuple(node.reward[i] + min(l[i] for l in los)
                       for i in range(n))
    node.upper = tuple(node.reward[i] + max(h[i] for h in his)
                       for i in range(n))
    return node.lower, node.upper


def matrix_game(rows, cols, payoff):
    """Simultaneous two-player matrix game, row player moving first.

    The column player's single infoset hides the row choice. payoff
    maps (row, col) to a per-player utility tuple.
    """
    children = {}
    for r in rows:
        sub = {c: {"reward": payoff(r, c)} for c in cols}
        children[r] = {"player": 2, "infoset": "col", "children": sub}
    spec = {"player": 1, "infoset": "row", "children": children}
    return build_tree(spec, 2)


def matching_pennies():
    return matrix_game(("h", "t"), ("h", "t"),
                       lambda r, c: (1.0, -1.0) if r == c else (-1.0, 1.0))


def rps():
    beats = {("r", "s"), ("s", "p"), ("p", "r")}

    def pay(r, c):
        if r == c:
            return (0.0, 0.0)
        return (1.0, -1.0) if (r, c) in beats else (-1.0, 1.0)

    return matrix_game(("r", "p", "s"), ("r", "p", "s"), pay)


def matching_pennies_rules():
    return TreeGame("mp", matching_pennies(), zero_sum=True)


def three_player_toy():
    """Tiny general-sum 3-player game with one infoset per player."""
    spec = {"player": 1, "infoset": "a", "children": {}}
    for a in ("l", "r"):
        mid = {"player": 2, "infoset": "b", "children": {}}
        for b in ("l", "r"):
            leaf = {"player": 3, "infoset": "c", "children": {}}
            for c in ("l", "r"):
                base = {"l": 1.0, "r": 0.0}
                leaf["children"][c] = {"reward": (
                    base[a] + 0.5 * base[c],
                    base[b] - 0.25 * base[a],
                    0.75 * base[c] + 0.1 * base[b])}
            mid["children"][b] = leaf
        spec["children"][a] = mid
    return build_tree(spec, 3)


def three_player_rules():
    return TreeGame("toy3", three_player_toy())


def random_game_spec(rng, num_players=2, zero_sum=True, max_depth=4):
    """Random perfect-information tree with chance nodes mixed in."""
    counter = itertools.count()

    def rec(depth):
        if depth >= max_depth or rng.random() < 0.3:
            if zero_sum and num_players == 2:
                v = rng.uniform(-2.0, 2.0)
                return {"reward": (v, -v)}
            return {"reward": tuple(rng.uniform(-2.0, 2.0)
                                    for _ in range(num_players))}
        player = rng.choice([0] + list(range(1, num_players + 1)))
        width = rng.randint(2, 3)
        actions = [f"a{j}" for j in range(width)]
        children = {a: rec(depth + 1) for a in actions}
        sp = {"player": player, "children": children}
        if player == 0:
            raw = [rng.uniform(0.2, 1.0) for _ in actions]
            s = sum(raw)
            sp["chance"] = tuple(v / s for v in raw)
        else:
            sp["infoset"] = f"i{next(counter)}"
        return sp

    spec = rec(0)
    if "children" not in spec:  # ensure at least one decision
        spec = {"player": 1, "infoset": "root",
                "children": {"a0": spec, "a1": rec(1)}}
    return spec


def random_tree(rng, **kw):
    return build_tree(random_game_spec(rng, **kw),
                      kw.get("num_players", 2))


def random_profile(tree, rng, player=None):
    """Random behavior distributions for every infoset of a tree."""
    dists = {}
    for node in tree.walk():
        if node.infoset is None or node.infoset in dists:
            continue
        if player is not None and node.player != player:
            continue
        raw = [rng.uniform(0.05, 1.0) for _ in node.actions]
        s = sum(raw)
        dists[node.infoset] = {a: v / s for a, v in zip(node.actions, raw)}
    return BehaviorProfile(dists)


def player_infosets(tree, player):
    seen = {}
    for node in tree.walk():
        if node.player == player and node.infoset is not None:
            seen.setdefault(node.infoset, node.actions)
    return seen


def pure_profiles(tree, player):
    """Every deterministic strategy of one player, as profiles."""
    infosets = sorted(player_infosets(tree, player).items(),
                      key=lambda kv: kv[0][1])
    keys = [k for k, _ in infosets]
    menus = [acts for _, acts in infosets]
    for combo in itertools.product(*menus):
        dists = {k: {a: 1.0 if a == pick else 0.0 for a in acts}
                 for (k, acts), pick in zip(infosets, combo)}
        yield BehaviorProfile(dists)


def brute_force_br_value(tree, player, opponents):
    """Max expected value over all pure strategies of one player."""
    best = None
    for mine in pure_profiles(tree, player):
        ev = expected_value(tree, mine.merged_with(opponents),
                            fallback_uniform=True)[player - 1]
        if best is None or ev > best:
            best = ev
    return best
