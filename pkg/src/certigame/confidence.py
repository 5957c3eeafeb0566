"""Incrementally expanded game trunks with confidence-bound evaluation.

A pseudogame is the part of a black-box game observed so far: an explicit
trunk whose leaves are either true terminals or frontier stubs carrying
only residual utility bounds, plus empirical estimates of the chance
distributions met along the way. Evaluating a profile on a pseudogame
yields a per-player interval [alpha, beta] instead of a point value;
with probability at least 1 - 2/t^2 the true expected utility lies
inside every such interval produced up to playthrough t.

Chance estimation modes:
  "known"        true chance probabilities are read off the simulator,
                 no estimation error (rho = 0);
  "signature"    nodes sharing the simulator-declared signature pool one
                 estimator (requires identically distributed outcomes);
  "independent"  every chance node is estimated on its own.

The confidence radius of an estimator observed t_h times out of t total
playthroughs, with C live estimators and n players, is

    rho = min(1, sqrt((|A| ln 2 + gamma ln t + ln(C n)) / (2 t_h))),

recomputed lazily whenever bounds are evaluated, so earlier playthroughs
never need re-processing when t grows.
"""

from __future__ import annotations

import math

from .efg import (BehaviorProfile, CertigameError, GameTree, Node,
                  expected_value, uniform_dist)

LN2 = math.log(2.0)


class UnsampledChanceError(CertigameError):
    pass


class DivergenceError(CertigameError):
    """The simulator contradicted the recorded trunk."""


def chance_radius(num_actions, t_h, t, num_estimators, n, gamma=2.0):
    """Confidence radius for one empirical chance distribution."""
    if t_h < 1:
        raise UnsampledChanceError("unsampled chance node")
    inside = num_actions * LN2 + gamma * math.log(t) \
        + math.log(num_estimators * n)
    return min(1.0, math.sqrt(inside / (2.0 * t_h)))


class ChanceStats:
    """Outcome counts for one estimator, indexed by action position."""

    __slots__ = ("key", "num_actions", "counts", "t_h")

    def __init__(self, key, num_actions):
        self.key = key
        self.num_actions = num_actions
        self.counts = [0] * num_actions
        self.t_h = 0

    def record(self, position):
        self.counts[position] += 1
        self.t_h += 1

    def empirical(self):
        return [c / self.t_h for c in self.counts]


class Pseudogame:
    """Trunk, chance estimators and infoset registry for one game."""

    def __init__(self, root, num_players, game_id=None, zero_sum=False,
                 chance_mode="signature", gamma=2.0):
        if chance_mode not in ("known", "signature", "independent"):
            raise ValueError("unknown chance mode")
        self.tree = GameTree(root, num_players)
        self.n = num_players
        self.game_id = game_id
        self.zero_sum = zero_sum
        self.chance_mode = chance_mode
        self.gamma = gamma
        self.t = 0
        self.chance_stats = {}     # estimator key -> ChanceStats
        self.node_estimator = {}   # chance node path -> estimator key
        self.infoset_members = {}  # (player, key) -> [Node]
        self.infoset_actions = {}  # (player, key) -> actions tuple
        self.infoset_meta = {}     # (player, key) -> created / parent_seq
        self.infoset_log = []      # creation order

    @classmethod
    def from_rules(cls, rules, chance_mode="signature", gamma=2.0):
        """Fresh pseudogame: the root as a lone frontier stub."""
        obs = rules.describe(rules.initial_state())
        root = Node(tuple(obs.path), None, (0.0,) * rules.num_players,
                    obs.lower, obs.upper, frontier=True)
        return cls(root, rules.num_players, rules.game_id, rules.zero_sum,
                   chance_mode, gamma)

    @property
    def num_estimators(self):
        return len(self.chance_stats)

    @property
    def node_count(self):
        return self.tree.node_count

    def radius(self, node):
        """Current confidence radius at an expanded chance node."""
        if self.chance_mode == "known":
            return 0.0
        st = self.chance_stats[self.node_estimator[node.path]]
        return chance_radius(st.num_actions, st.t_h, self.t,
                             self.num_estimators, self.n, self.gamma)

    def chance_view(self, node):
        """(probabilities, radius) used when evaluating a chance node."""
        if self.chance_mode == "known":
            return node.chance, 0.0
        st = self.chance_stats[self.node_estimator[node.path]]
        rho = chance_radius(st.num_actions, st.t_h, self.t,
                            self.num_estimators, self.n, self.gamma)
        return st.empirical(), rho

    def player_infosets(self, player):
        return [k for k in self.infoset_log if k[0] == player]


def pseudogame_from_oracle(tree, chance_mode="known", game_id=None,
                           gamma=2.0):
    """Fully expanded pseudogame over an explicit oracle tree.

    Only the known-chance mode makes sense here (there are no samples to
    estimate from), so other modes are rejected.
    """
    if chance_mode != "known":
        raise ValueError("a pre-expanded pseudogame needs known chance")
    pg = Pseudogame(tree.root, tree.num_players, game_id=game_id,
                    zero_sum=tree.zero_sum, chance_mode=chance_mode,
                    gamma=gamma)
    pg.tree = tree

    def visit(node, seqs):
        if node.player and node.player > 0:
            ikey = node.infoset
            if ikey not in pg.infoset_actions:
                pg.infoset_members[ikey] = [node]
                pg.infoset_actions[ikey] = node.actions
                pg.infoset_meta[ikey] = {
                    "created": 0, "parent_seq": seqs[node.player]}
                pg.infoset_log.append(ikey)
            else:
                pg.infoset_members[ikey].append(node)
        for a in node.actions:
            if node.player and node.player > 0:
                nxt = dict(seqs)
                nxt[node.player] = seqs[node.player] + ((node.infoset[1], a),)
            else:
                nxt = seqs
            visit(node.children[a], nxt)

    visit(tree.root, {p: () for p in range(1, tree.num_players + 1)})
    return pg


def record_playthrough(pg, traj, expand_mode="path"):
    """Fold one trajectory into the pseudogame.

    Expands frontier nodes met along the path ("path" mode expands all of
    them, "first-new" only the shallowest) and updates chance counts on
    the tracked prefix. Anything the simulator did below an unexpanded
    frontier is not representable and is ignored. Returns a report with
    the infosets and node count added.
    """
    if expand_mode not in ("path", "first-new"):
        raise ValueError("unknown expand mode")
    pg.t += 1
    report = {"new_infosets": [], "expanded": [], "new_nodes": 0}
    own_seq = {p: () for p in range(1, pg.n + 1)}
    expanded_one = False
    for obs, action in traj.steps:
        node = pg.tree.nodes.get(tuple(obs.path))
        if node is None:
            break
        if node.frontier:
            if expand_mode == "path" or not expanded_one:
                _expand(pg, node, obs, own_seq, report)
                expanded_one = True
            else:
                break
        expected_player = obs.player if obs.actions else None
        if node.player != expected_player or node.actions != tuple(obs.actions):
            raise DivergenceError("simulator/tree divergence")
        if action is None:
            break
        if action not in node.children:
            raise DivergenceError("simulator/tree divergence")
        if node.player == 0:
            if pg.chance_mode != "known":
                pg.chance_stats[pg.node_estimator[node.path]].record(
                    node.actions.index(action))
        elif node.player > 0:
            own_seq[node.player] = \
                own_seq[node.player] + ((node.infoset[1], action),)
        node = node.children[action]
    return report


def _expand(pg, node, obs, own_seq, report):
    node.frontier = False
    node.actions = tuple(obs.actions)
    node.reward = tuple(obs.reward)
    report["expanded"].append(node.path)
    if not obs.actions:
        node.player = None
        return
    node.player = obs.player
    if obs.player == 0:
        if pg.chance_mode == "known":
            if obs.chance_probs is None:
                raise DivergenceError("simulator withheld chance law")
            node.chance = tuple(obs.chance_probs)
        else:
            if pg.chance_mode == "signature":
                key = ("sig", obs.chance_signature)
            else:
                key = ("node", node.path)
            st = pg.chance_stats.get(key)
            if st is None:
                st = ChanceStats(key, len(node.actions))
                pg.chance_stats[key] = st
            elif st.num_actions != len(node.actions):
                raise DivergenceError("signature groups unlike chance nodes")
            pg.node_estimator[node.path] = key
    else:
        ikey = (obs.player, obs.infoset)
        node.infoset = ikey
        if ikey not in pg.infoset_actions:
            pg.infoset_members[ikey] = [node]
            pg.infoset_actions[ikey] = node.actions
            pg.infoset_meta[ikey] = {"created": pg.t,
                                     "parent_seq": own_seq[obs.player]}
            pg.infoset_log.append(ikey)
            report["new_infosets"].append(ikey)
        else:
            if pg.infoset_actions[ikey] != node.actions:
                raise DivergenceError("infoset action sets differ")
            pg.infoset_members[ikey].append(node)
    for a in obs.actions:
        if "/" in a:
            raise ValueError("action labels must not contain '/'")
        lo, hi = obs.child_bounds[a]
        child = Node(node.path + (a,), None, (0.0,) * pg.n, lo, hi,
                     frontier=True)
        node.children[a] = child
        pg.tree.nodes[child.path] = child
        report["new_nodes"] += 1


def eval_bounds(pg, profile, clamp=True, fallback_uniform=True):
    """Per-player value interval [alpha, beta] of a profile on the trunk.

    Frontier stubs contribute their declared bounds; estimated chance
    nodes contribute the empirical mixture widened by rho times the
    node's bound width, optionally clipped back into the declared bounds
    (clipping keeps validity since the true value always lies inside
    them). The unclamped variant is linear in each player's strategy.
    """
    n = pg.n

    def walk(node):
        if node.frontier:
            return list(node.lower), list(node.upper)
        lo = list(node.reward)
        hi = list(node.reward)
        if not node.actions:
            return lo, hi
        if node.player == 0:
            probs, rho = pg.chance_view(node)
            for a, p in zip(node.actions, probs):
                if p == 0.0:
                    continue
                clo, chi = walk(node.children[a])
                for i in range(n):
                    lo[i] += p * clo[i]
                    hi[i] += p * chi[i]
            if rho > 0.0:
                for i in range(n):
                    w = rho * (node.upper[i] - node.lower[i])
                    lo[i] -= w
                    hi[i] += w
            if clamp:
                for i in range(n):
                    if lo[i] < node.lower[i]:
                        lo[i] = node.lower[i]
                    if hi[i] > node.upper[i]:
                        hi[i] = node.upper[i]
        else:
            d = profile.distribution(node.infoset, node.actions,
                                     fallback_uniform)
            for a in node.actions:
                p = d.get(a, 0.0)
                if p == 0.0:
                    continue
                clo, chi = walk(node.children[a])
                for i in range(n):
                    lo[i] += p * clo[i]
                    hi[i] += p * chi[i]
        return lo, hi

    lo, hi = walk(pg.tree.root)
    return tuple(lo), tuple(hi)


def pseudo_best_response(pg, player, opponents=None, side="optimistic",
                         clamp=True, fallback_uniform=True):
    """Best response to the chosen bound function on the pseudogame.

    Maximizes the player's optimistic bound (beta) or pessimistic bound
    (alpha) against fixed opponents. Because clipping is monotone it
    commutes with the maximization at decision nodes, so this dynamic
    program is an exact optimizer of the clamped bound as well.

    Returns (pure profile over the player's known infosets, root value).
    """
    if side not in ("optimistic", "pessimistic"):
        raise ValueError("unknown side")
    pi = player - 1
    optimistic = side == "optimistic"

    reach = {}
    stack = [(pg.tree.root, 1.0)]
    while stack:
        node, r = stack.pop()
        reach[node.path] = reach.get(node.path, 0.0) + r
        if node.frontier or not node.actions:
            continue
        if node.player == 0:
            probs, _ = pg.chance_view(node)
            for a, p in zip(node.actions, probs):
                if p > 0.0:
                    stack.append((node.children[a], r * p))
        elif node.player == player:
            for a in node.actions:
                stack.append((node.children[a], r))
        else:
            if opponents is None:
                d = uniform_dist(node.actions)
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
            v = node.upper[pi] if optimistic else node.lower[pi]
        elif not node.actions:
            v = node.reward[pi]
        elif node.player == 0:
            probs, rho = pg.chance_view(node)
            v = node.reward[pi]
            for a, p in zip(node.actions, probs):
                if p > 0.0:
                    v += p * value(node.children[a])
            if optimistic:
                v += rho * (node.upper[pi] - node.lower[pi])
                if clamp and v > node.upper[pi]:
                    v = node.upper[pi]
            else:
                v -= rho * (node.upper[pi] - node.lower[pi])
                if clamp and v < node.lower[pi]:
                    v = node.lower[pi]
        elif node.player == player:
            v = node.reward[pi] + value(node.children[choose(node.infoset)])
        else:
            if opponents is None:
                d = uniform_dist(node.actions)
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
        actions = pg.infoset_actions[ikey]
        weighted = [(nd, reach.get(nd.path, 0.0))
                    for nd in pg.infoset_members[ikey]]
        weighted = [(nd, r) for nd, r in weighted if r > 0.0]
        best_a, best_s = actions[0], None
        for a in actions:
            s = sum(r * value(nd.children[a]) for nd, r in weighted)
            if best_s is None or s > best_s + 1e-12:
                best_a, best_s = a, s
        action_memo[ikey] = best_a
        return best_a

    root_value = value(pg.tree.root)
    dists = {}
    for ikey in pg.infoset_log:
        if ikey[0] != player:
            continue
        a_star = choose(ikey)
        dists[ikey] = {a: (1.0 if a == a_star else 0.0)
                       for a in pg.infoset_actions[ikey]}
    return BehaviorProfile(dists), root_value


def uncertainty(pg, profile, fallback_uniform=True):
    """Unclamped interval width beta - alpha per player for a profile."""
    lo, hi = eval_bounds(pg, profile, clamp=False,
                         fallback_uniform=fallback_uniform)
    return tuple(hi[i] - lo[i] for i in range(pg.n))


class UncertaintyLedger:
    """Running sum of per-playthrough uncertainty widths."""

    def __init__(self, num_players):
        self.totals = [0.0] * num_players
        self.per_step = []

    def accrue(self, pg, profile):
        d = uncertainty(pg, profile)
        for i, v in enumerate(d):
            self.totals[i] += v
        self.per_step.append(d)
        return d


def uncertainty_budget(pg, horizon):
    """Deterministic ceiling on accumulated uncertainty up to a horizon.

    With C live estimators over T playthroughs the estimation part is at
    most 2 C sqrt(2 T M) in units of the bound width, where M bounds the
    log term of any single radius, and the frontier part telescopes into
    the number of expanded-or-stubbed nodes. With known chance only the
    frontier part remains.
    """
    c = pg.num_estimators
    if pg.chance_mode == "known" or c == 0:
        return float(pg.node_count)
    m = max(st.num_actions * LN2
            + math.log(2.0 * horizon * horizon * c * pg.n)
            for st in pg.chance_stats.values())
    return 2.0 * c * math.sqrt(2.0 * horizon * m) + pg.node_count


def correctness_audit(pg, oracle_tree, profiles, tol=1e-9):
    """Check claimed intervals against exact oracle values.

    For each profile the true expected utility is computed on the fully
    expanded oracle (uniform at infosets the profile does not cover) and
    compared against the clamped pseudogame interval. Returns the list
    of violations; an empty list means every claim held.
    """
    violations = []
    for idx, prof in enumerate(profiles):
        truth = expected_value(oracle_tree, prof, fallback_uniform=True)
        lo, hi = eval_bounds(pg, prof, clamp=True)
        for i in range(pg.n):
            if lo[i] > truth[i] + tol or truth[i] > hi[i] + tol:
                violations.append({
                    "profile": idx, "player": i + 1,
                    "alpha": lo[i], "beta": hi[i], "truth": truth[i],
                })
    return violations


def pseudogame_payload(pg):
    """JSON-ready snapshot of the trunk, estimators and infoset registry.

    Node and infoset order is preserved so that re-evaluating a profile
    on the reloaded pseudogame replays the identical float operations.
    """
    est_index = {key: i for i, key in enumerate(pg.chance_stats)}
    nodes = []
    for path, node in pg.tree.nodes.items():
        rec = {
            "path": "/".join(path),
            "player": node.player,
            "infoset": node.infoset[1] if node.infoset else None,
            "actions": list(node.actions),
            "reward": list(node.reward),
            "lower": list(node.lower),
            "upper": list(node.upper),
            "frontier": node.frontier,
        }
        if node.chance is not None:
            rec["chance"] = list(node.chance)
        if path in pg.node_estimator:
            rec["estimator"] = est_index[pg.node_estimator[path]]
        nodes.append(rec)
    chance = [{
        "kind": key[0],
        "name": key[1] if key[0] == "sig" else "/".join(key[1]),
        "num_actions": st.num_actions,
        "counts": list(st.counts),
        "t_h": st.t_h,
    } for key, st in pg.chance_stats.items()]
    infosets = [{
        "player": ikey[0],
        "key": ikey[1],
        "actions": list(pg.infoset_actions[ikey]),
        "members": ["/".join(nd.path) for nd in pg.infoset_members[ikey]],
        "created": pg.infoset_meta[ikey]["created"],
        "parent_seq": [list(pair)
                       for pair in pg.infoset_meta[ikey]["parent_seq"]],
    } for ikey in pg.infoset_log]
    return {
        "game_id": pg.game_id,
        "num_players": pg.n,
        "zero_sum": pg.zero_sum,
        "chance_mode": pg.chance_mode,
        "gamma": pg.gamma,
        "t": pg.t,
        "nodes": nodes,
        "chance": chance,
        "infosets": infosets,
    }


def pseudogame_from_payload(payload):
    n = payload["num_players"]
    nodes = {}
    root = None
    for rec in payload["nodes"]:
        path = tuple(rec["path"].split("/")) if rec["path"] else ()
        node = Node(path, rec["player"], rec["reward"], rec["lower"],
                    rec["upper"], actions=rec["actions"],
                    frontier=rec["frontier"],
                    chance=rec.get("chance"))
        nodes[path] = node
        if not path:
            root = node
    for path, node in nodes.items():
        if path:
            nodes[path[:-1]].children[path[-1]] = node
    pg = Pseudogame(root, n, game_id=payload["game_id"],
                    zero_sum=payload["zero_sum"],
                    chance_mode=payload["chance_mode"],
                    gamma=payload["gamma"])
    pg.tree.nodes = nodes
    pg.t = payload["t"]
    est_keys = []
    for rec in payload["chance"]:
        key = (rec["kind"], rec["name"] if rec["kind"] == "sig"
               else tuple(rec["name"].split("/")))
        st = ChanceStats(key, rec["num_actions"])
        st.counts = list(rec["counts"])
        st.t_h = rec["t_h"]
        pg.chance_stats[key] = st
        est_keys.append(key)
    for rec in payload["nodes"]:
        if "estimator" in rec:
            path = tuple(rec["path"].split("/")) if rec["path"] else ()
            pg.node_estimator[path] = est_keys[rec["estimator"]]
    for rec in payload["infosets"]:
        ikey = (rec["player"], rec["key"])
        members = [nodes[tuple(p.split("/")) if p else ()]
                   for p in rec["members"]]
        for nd in members:
            nd.infoset = ikey
        pg.infoset_members[ikey] = members
        pg.infoset_actions[ikey] = tuple(rec["actions"])
        pg.infoset_meta[ikey] = {
            "created": rec["created"],
            "parent_seq": tuple((k, a) for k, a in rec["parent_seq"]),
        }
        pg.infoset_log.append(ikey)
    return pg
