"""Regret minimization and equilibrium solving on pseudogames.

All learning dynamics here operate on the *unclamped* bound functions:
with the chance bonus added but no clipping, the optimistic value of a
pseudogame is linear in each player's sequence-form strategy, which is
what regret minimizers need. Clipped values are only used downstream
when reporting certified gaps.

Regret state is deliberately minimal: per-infoset cumulative regrets and
a creation stamp, nothing else. Strategy averaging lives in a separate
accumulator keyed by sequences, so extending a minimizer with a newly
discovered infoset commutes exactly with updates that never touch it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .confidence import pseudo_best_response
from .efg import BehaviorProfile, ZeroSumRequiredError, uniform_dist


@dataclass
class InfosetState:
    regrets: list
    created_at: int


class RegretState:
    """Per-infoset regret matching state for one player."""

    def __init__(self, player, plus=False):
        self.player = player
        self.plus = plus
        self.infosets = {}

    def has(self, ikey):
        return ikey in self.infosets

    def current(self, ikey, actions):
        """Strategy right now; uniform for unknown or all-negative state."""
        ent = self.infosets.get(ikey)
        if ent is None:
            return uniform_dist(actions)
        pos = [r if r > 0.0 else 0.0 for r in ent.regrets]
        total = sum(pos)
        if total <= 0.0:
            return uniform_dist(actions)
        return {a: p / total for a, p in zip(actions, pos)}


def extend_state(state, ikey, actions, created_at):
    if state.has(ikey):
        raise ValueError("duplicate infoset")
    state.infosets[ikey] = InfosetState([0.0] * len(actions), created_at)
    return state


def rm_step(state, ikey, actions, loss):
    """One regret-matching update against a loss vector.

    Regret accrued for action a is <loss, x> - loss[a] with x the
    pre-update strategy. Returns the post-update strategy.
    """
    ent = state.infosets[ikey]
    if len(loss) != len(ent.regrets):
        raise ValueError("dimension mismatch")
    x = state.current(ikey, actions)
    avg = sum(loss[i] * x[a] for i, a in enumerate(actions))
    regs = ent.regrets
    for i in range(len(regs)):
        regs[i] += avg - loss[i]
        if state.plus and regs[i] < 0.0:
            regs[i] = 0.0
    return state.current(ikey, actions)


class AveragedStrategy:
    """Uniform or weighted average of behavior strategies over time.

    Averaging happens in sequence space: each added strategy contributes
    weight times its sequence-form reach to every sequence. Weight that
    was recorded before an infoset existed is frozen as "premass" at the
    moment the infoset is registered and treated as uniform play there,
    which makes the average over a growing pseudogame well defined.
    """

    def __init__(self, player):
        self.player = player
        self.sums = {}
        self.premass = {}
        self.actions = {}
        self.parent = {}
        self.total = 0.0

    def _implied(self, seq):
        if not seq:
            return self.total
        key = seq[-1][0]
        return self.sums.get(seq, 0.0) + self.premass[key] / len(self.actions[key])

    def extend(self, key, actions, parent_seq):
        if key in self.actions:
            raise ValueError("duplicate infoset")
        self.premass[key] = self._implied(parent_seq)
        self.actions[key] = tuple(actions)
        self.parent[key] = parent_seq

    def add(self, dist_at, weight=1.0):
        """Record one behavior strategy given by dist_at(key, actions).

        Registered infosets are walked in registration order, which under
        perfect recall is a valid topological order of own sequences.
        """
        values = {(): 1.0}
        for key, actions in self.actions.items():
            seq = self.parent[key]
            v = values[seq]
            d = dist_at(key, actions)
            for a in actions:
                s2 = seq + ((key, a),)
                values[s2] = v * d.get(a, 0.0)
                self.sums[s2] = self.sums.get(s2, 0.0) + weight * values[s2]
        self.total += weight

    def behavior_at(self, key):
        actions = self.actions[key]
        seq = self.parent[key]
        share = self.premass[key] / len(actions)
        masses = [self.sums.get(seq + ((key, a),), 0.0) + share
                  for a in actions]
        total = sum(masses)
        if total <= 0.0:
            return uniform_dist(actions)
        return {a: m / total for a, m in zip(actions, masses)}

    def behavior(self):
        return BehaviorProfile({(self.player, key): self.behavior_at(key)
                                for key in self.actions})


def linear_loss_coeffs(pg, player, profiles, side="optimistic",
                       fallback_uniform=True):
    """Sequence-space coefficients of the player's bound value.

    With everything but the player's own strategy fixed, the unclamped
    bound value is linear: value(x) = sum over own sequences s of
    coeffs[s] * x[s]. Coefficients collect reach-weighted adjusted
    rewards, where the adjustment adds (optimistic) or subtracts
    (pessimistic) rho times the bound width at estimated chance nodes
    and replaces frontier stubs by the matching declared bound.
    """
    pi = player - 1
    optimistic = side == "optimistic"
    coeffs = {}

    def walk(node, seq, p):
        if node.frontier:
            r = node.upper[pi] if optimistic else node.lower[pi]
            coeffs[seq] = coeffs.get(seq, 0.0) + p * r
            return
        r = node.reward[pi]
        if node.player == 0:
            probs, rho = pg.chance_view(node)
            if rho:
                w = rho * (node.upper[pi] - node.lower[pi])
                r = r + w if optimistic else r - w
            coeffs[seq] = coeffs.get(seq, 0.0) + p * r
            for a, pp in zip(node.actions, probs):
                if pp > 0.0:
                    walk(node.children[a], seq, p * pp)
        elif node.player == player:
            coeffs[seq] = coeffs.get(seq, 0.0) + p * r
            key = node.infoset[1]
            for a in node.actions:
                walk(node.children[a], seq + ((key, a),), p)
        else:
            coeffs[seq] = coeffs.get(seq, 0.0) + p * r
            if not node.actions:
                return
            d = profiles.distribution(node.infoset, node.actions,
                                      fallback_uniform)
            for a in node.actions:
                pp = d.get(a, 0.0)
                if pp > 0.0:
                    walk(node.children[a], seq, p * pp)

    walk(pg.tree.root, (), 1.0)
    return coeffs


def eval_linear(coeffs, seq_values):
    """<coeffs, x> for a sequence-form strategy given as a dict."""
    return sum(c * seq_values.get(s, 0.0) for s, c in coeffs.items())


def seq_values_of(pg, player, dist_at):
    """Sequence-form reach of a behavior strategy over the registry."""
    values = {(): 1.0}
    for ikey in pg.infoset_log:
        if ikey[0] != player:
            continue
        actions = pg.infoset_actions[ikey]
        seq = pg.infoset_meta[ikey]["parent_seq"]
        v = values[seq]
        d = dist_at(ikey[1], actions)
        for a in actions:
            values[seq + ((ikey[1], a),)] = v * d.get(a, 0.0)
    return values


def sequence_br_value(pg, player, coeffs, maximize=True):
    """Exact best (or worst) response value to linear loss coefficients.

    Dynamic program over the player's infoset registry: the value of an
    infoset is the best action's coefficient plus the values of infosets
    whose parent sequence is that action. Runs on registry metadata
    alone, no tree walk.
    """
    by_parent = {}
    for ikey in pg.infoset_log:
        if ikey[0] != player:
            continue
        by_parent.setdefault(pg.infoset_meta[ikey]["parent_seq"],
                             []).append(ikey)

    memo = {}

    def value(ikey):
        got = memo.get(ikey)
        if got is not None:
            return got
        seq = pg.infoset_meta[ikey]["parent_seq"]
        key = ikey[1]
        best = None
        for a in pg.infoset_actions[ikey]:
            s2 = seq + ((key, a),)
            v = coeffs.get(s2, 0.0)
            for j in by_parent.get(s2, ()):
                v += value(j)
            if best is None or (v > best if maximize else v < best):
                best = v
        memo[ikey] = best
        return best

    total = coeffs.get((), 0.0)
    for j in by_parent.get((), ()):
        total += value(j)
    return total


def cfr_player_losses(pg, player, profiles, side="optimistic",
                      fallback_uniform=True):
    """Counterfactual loss vectors for every registered infoset.

    Node values are the player's unclamped bound under the joint profile;
    the loss at an infoset is minus the opponents'-reach-weighted value
    of each action's subtree, which is exactly the loss CFR submits to
    the local regret matcher.
    """
    pi = player - 1
    optimistic = side == "optimistic"

    value_memo = {}

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
            if rho:
                w = rho * (node.upper[pi] - node.lower[pi])
                v = v + w if optimistic else v - w
        else:
            d = profiles.distribution(node.infoset, node.actions,
                                      fallback_uniform)
            v = node.reward[pi]
            for a in node.actions:
                p = d.get(a, 0.0)
                if p > 0.0:
                    v += p * value(node.children[a])
        value_memo[node.path] = v
        return v

    reach = {}
    stack = [(pg.tree.root, 1.0)]
    while stack:
        node, r = stack.pop()
        if node.frontier or not node.actions:
            continue
        if node.player == player:
            reach[node.path] = reach.get(node.path, 0.0) + r
            for a in node.actions:
                stack.append((node.children[a], r))
            continue
        if node.player == 0:
            probs, _ = pg.chance_view(node)
            pairs = zip(node.actions, probs)
        else:
            d = profiles.distribution(node.infoset, node.actions,
                                      fallback_uniform)
            pairs = ((a, d.get(a, 0.0)) for a in node.actions)
        for a, p in pairs:
            if p > 0.0:
                stack.append((node.children[a], r * p))

    losses = {}
    for ikey in pg.infoset_log:
        if ikey[0] != player:
            continue
        actions = pg.infoset_actions[ikey]
        vec = [0.0] * len(actions)
        for nd in pg.infoset_members[ikey]:
            r = reach.get(nd.path, 0.0)
            if r <= 0.0:
                continue
            for i, a in enumerate(actions):
                vec[i] -= r * value(nd.children[a])
        losses[ikey] = vec
    return losses


class LeafCounter:
    """Distinct own terminal sequences below each (infoset, action).

    Used as the exploration part of the outcome-sampling policy: with
    full exploration the sampler is uniform over the player's terminal
    sequences in the current pseudogame. Rebuilt lazily whenever the
    trunk has grown.
    """

    def __init__(self, pg, player):
        self.pg = pg
        self.player = player
        self._version = -1
        self.counts = {}

    def _rebuild(self):
        seen = set()
        stack = [(self.pg.tree.root, ())]
        while stack:
            node, seq = stack.pop()
            if node.frontier or not node.actions:
                seen.add(seq)
                continue
            own = node.player == self.player
            key = node.infoset[1] if own else None
            for a in node.actions:
                stack.append((node.children[a],
                              seq + ((key, a),) if own else seq))
        counts = {}
        for s in seen:
            for pair in s:
                counts[pair] = counts.get(pair, 0) + 1
        self.counts = counts
        self._version = self.pg.node_count

    def weights(self, key, actions):
        if self._version != self.pg.node_count:
            self._rebuild()
        return [self.counts.get((key, a), 1) for a in actions]


def _draw(rng, actions, probs):
    r = rng.random()
    acc = 0.0
    for a, p in zip(actions, probs):
        acc += p
        if r < acc:
            return a
    return actions[-1]


def mccfr_sample_loss(pg, player, profiles, rng, side="optimistic",
                      eps=0.6, leaf_counter=None, fallback_uniform=True):
    """One outcome-sampling estimate of the player's linear loss.

    Samples a single path through the current pseudogame: chance by its
    empirical distribution, opponents by their profile, the player by an
    eps-mix of leaf-uniform exploration and its own current strategy.
    Returns (coeffs, alpha_tilde) where coeffs is an unbiased sparse
    estimate of the linear_loss_coeffs vector (each visited sequence's
    adjusted reward divided by the probability the player's own sampling
    reached it) and alpha_tilde is an importance-weighted estimate of
    the player's pessimistic unclamped value under the joint profile.
    """
    pi = player - 1
    optimistic = side == "optimistic"
    est = {}
    node = pg.tree.root
    seq = ()
    q_own = 1.0     # product of own sampling probabilities above the node
    w_alpha = 1.0   # product of sigma/q over own sampled actions
    alpha = 0.0
    while True:
        if node.frontier:
            r_beta = node.upper[pi] if optimistic else node.lower[pi]
            r_alpha = node.lower[pi]
        else:
            r_beta = node.reward[pi]
            r_alpha = node.reward[pi]
            if node.player == 0:
                _, rho = pg.chance_view(node)
                if rho:
                    w = rho * (node.upper[pi] - node.lower[pi])
                    r_beta = r_beta + w if optimistic else r_beta - w
                    r_alpha -= w
        est[seq] = est.get(seq, 0.0) + r_beta / q_own
        alpha += w_alpha * r_alpha
        if node.frontier or not node.actions:
            return est, alpha
        if node.player == 0:
            probs, _ = pg.chance_view(node)
            a = _draw(rng, node.actions, probs)
        elif node.player == player:
            key = node.infoset[1]
            d = profiles.distribution(node.infoset, node.actions,
                                      fallback_uniform)
            if leaf_counter is not None:
                wts = leaf_counter.weights(key, node.actions)
            else:
                wts = [1] * len(node.actions)
            total = float(sum(wts))
            qs = [eps * w / total + (1.0 - eps) * d.get(a, 0.0)
                  for w, a in zip(wts, node.actions)]
            a = _draw(rng, node.actions, qs)
            i = node.actions.index(a)
            q_own *= qs[i]
            w_alpha *= d.get(a, 0.0) / qs[i]
            seq = seq + ((key, a),)
        else:
            d = profiles.distribution(node.infoset, node.actions,
                                      fallback_uniform)
            a = _draw(rng, node.actions,
                      [d.get(x, 0.0) for x in node.actions])
        node = node.children[a]


def mccfr_infoset_losses(est):
    """Per-infoset loss vectors encoded by a sampled coefficient chain.

    Outcome sampling touches one own sequence chain; the loss for each
    visited infoset is minus the suffix sum of estimates at or below the
    sampled action, and zero for unplayed actions.
    """
    chain = sorted((s for s in est if s), key=len)
    out = []
    suffix = 0.0
    for s in reversed(chain):
        suffix += est[s]
        key, action = s[-1]
        out.append((key, action, -suffix))
    out.reverse()
    return out


@dataclass
class AccumulatedLoss:
    """Running sums needed for replayed-regret and average-gap reports."""

    player: int
    coeffs: dict = field(default_factory=dict)
    alpha_sum: float = 0.0
    beta_sum: float = 0.0
    count: int = 0

    def accumulate(self, coeffs_t, alpha_t, beta_t):
        for s, c in coeffs_t.items():
            self.coeffs[s] = self.coeffs.get(s, 0.0) + c
        self.alpha_sum += alpha_t
        self.beta_sum += beta_t
        self.count += 1

    def best_fixed(self, pg, maximize=True):
        return sequence_br_value(pg, self.player, self.coeffs, maximize)

    def replayed_regret(self, pg):
        """max over fixed x of accumulated gain minus gain actually got."""
        return self.best_fixed(pg) - self.beta_sum


@dataclass
class SolveResult:
    profile: BehaviorProfile
    value: float
    achieved_gap: float
    iterations: int
    state: object


class SolverState:
    def __init__(self):
        self.states = {}
        self.averagers = {}
        self.preds = {1: {}, 2: {}}
        self.iters = 0


def _sync_solver_state(pg, state):
    for player in (1, 2):
        if player not in state.states:
            state.states[player] = RegretState(player, plus=True)
            state.averagers[player] = AveragedStrategy(player)
        rs = state.states[player]
        av = state.averagers[player]
        preds = state.preds[player]
        for ikey in pg.infoset_log:
            if ikey[0] != player or rs.has(ikey):
                continue
            extend_state(rs, ikey, pg.infoset_actions[ikey], state.iters)
            av.extend(ikey[1], pg.infoset_actions[ikey],
                      pg.infoset_meta[ikey]["parent_seq"])
            preds[ikey] = [0.0] * len(pg.infoset_actions[ikey])


def _solver_dist(rs, preds, ikey, actions):
    """Predictive strategy: positive part of regrets plus last regret."""
    ent = rs.infosets[ikey]
    pred = preds[ikey]
    pos = [max(0.0, r + p) for r, p in zip(ent.regrets, pred)]
    total = sum(pos)
    if total <= 0.0:
        return uniform_dist(actions)
    return {a: v / total for a, v in zip(actions, pos)}


def exact_solve(pg, side="optimistic", tol=None, max_iters=100000,
                state=None, measure_every=25):
    """Approximate saddle point of one bound game, to a certified gap.

    The game's player-1 utility is the chosen unclamped bound; player 2
    maximizes its exact mirror. Runs alternating predictive regret
    matching plus (the play at each step leans on the previous step's
    regret vector as a forecast of the next one) with quadratically
    weighted averaging. Every measure_every steps the Nash gap of both
    the averaged profile and the current iterate is measured with
    independent best-response passes; the best profile seen is kept and
    returned, and the loop stops once its gap falls below tol (default
    1e-6 of the root bound width). Passing the returned state back in
    warm-starts a later call after the pseudogame has grown.
    """
    if pg.n == 1:
        profile, v = pseudo_best_response(pg, 1, None, side, clamp=False)
        return SolveResult(profile, v, 0.0, 0, state)
    if pg.n != 2 or not pg.zero_sum:
        raise ZeroSumRequiredError("zero-sum required")
    if tol is None:
        tol = 1e-6 * (pg.tree.root.upper[0] - pg.tree.root.lower[0])
    if state is None:
        state = SolverState()
    _sync_solver_state(pg, state)
    other_side = "pessimistic" if side == "optimistic" else "optimistic"
    sides = {1: side, 2: other_side}

    def measure(profile):
        _, b1 = pseudo_best_response(
            pg, 1, profile.restricted_to(2), sides[1], clamp=False)
        _, b2 = pseudo_best_response(
            pg, 2, profile.restricted_to(1), sides[2], clamp=False)
        return b1 + b2, (b1 - b2) / 2.0

    best = None
    done = 0
    while done < max_iters:
        done += 1
        state.iters += 1
        for player in (1, 2):
            profiles = _current_profile(pg, state)
            losses = cfr_player_losses(pg, player, profiles, sides[player])
            rs = state.states[player]
            preds = state.preds[player]
            for ikey, vec in losses.items():
                actions = pg.infoset_actions[ikey]
                x = _solver_dist(rs, preds, ikey, actions)
                avg = sum(vec[i] * x[a] for i, a in enumerate(actions))
                inst = [avg - v for v in vec]
                regs = rs.infosets[ikey].regrets
                for i, g in enumerate(inst):
                    regs[i] = max(0.0, regs[i] + g)
                preds[ikey] = inst
        w = float(state.iters) ** 2
        for player in (1, 2):
            rs = state.states[player]
            preds = state.preds[player]
            state.averagers[player].add(
                lambda key, actions, p=player, r=rs, q=preds:
                    _solver_dist(r, q, (p, key), actions),
                weight=w)
        if done % measure_every == 0 or done == max_iters:
            for candidate in (
                    state.averagers[1].behavior().merged_with(
                        state.averagers[2].behavior()),
                    _current_profile(pg, state)):
                gap, value = measure(candidate)
                if best is None or gap < best[0]:
                    best = (gap, value, candidate)
            if best[0] <= tol:
                break
    if best is None:
        profile = _current_profile(pg, state)
        gap, value = measure(profile)
        best = (gap, value, profile)
    return SolveResult(best[2], best[1], best[0], done, state)


def _current_profile(pg, state):
    dists = {}
    for player in (1, 2):
        rs = state.states[player]
        preds = state.preds[player]
        for ikey in rs.infosets:
            dists[ikey] = _solver_dist(rs, preds, ikey,
                                       pg.infoset_actions[ikey])
    return BehaviorProfile(dists)
