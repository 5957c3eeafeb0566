"""Anytime certification loops and certificate extraction.

Two ways to drive the explore-and-certify loop:

ExactSolveCertifier resolves the optimistic and pessimistic bound games
at a fixed cadence, explores with the optimistic maximizer against the
pessimistic minimizer, and certifies the pessimistic-against-optimistic
cross profile. RegretCertifier runs one regret-matching update per
playthrough (exact counterfactual losses or outcome-sampling estimates)
against the optimistic bound and certifies the running average profile.

All certified gaps are computed from clamped bound evaluations through
the same two functions used when a certificate is re-validated after
JSON round-tripping, so reloading a certificate reproduces its gaps
bit for bit.
"""

from __future__ import annotations

import math
import random

from .confidence import (Pseudogame, UncertaintyLedger, eval_bounds,
                         pseudo_best_response, pseudogame_from_payload,
                         pseudogame_payload, record_playthrough)
from .efg import BehaviorProfile, CertigameError, ZeroSumRequiredError
from .games import play
from .solvers import (AccumulatedLoss, AveragedStrategy, LeafCounter,
                      RegretState, cfr_player_losses, exact_solve,
                      extend_state, linear_loss_coeffs, mccfr_infoset_losses,
                      mccfr_sample_loss, rm_step, sequence_br_value)


class CertificationError(CertigameError):
    """An internal consistency check that should hold exactly failed."""


def averaged_profile_gap(pg, profile):
    """Certified per-player gap of a joint profile (clamped bounds).

    Player i's entry bounds how much i could gain by deviating: the
    optimistic best response against the others minus the pessimistic
    value of the profile itself. Valid for any number of players.
    """
    lo, _ = eval_bounds(pg, profile, clamp=True)
    gaps = []
    for player in range(1, pg.n + 1):
        _, v = pseudo_best_response(pg, player, profile, "optimistic",
                                    clamp=True)
        gaps.append(v - lo[player - 1])
    return tuple(gaps)


def certified_gap(pg, profile):
    """Scalar certified Nash gap (zero-sum tightening, or single player).

    In the two-player zero-sum case both players' optimistic responses
    are measured against the other's half of the profile and the mirror
    identity turns their sum into max beta minus min alpha.
    """
    if pg.n == 1:
        return averaged_profile_gap(pg, profile)[0]
    if pg.n != 2 or not pg.zero_sum:
        raise ZeroSumRequiredError("zero-sum required")
    _, v1 = pseudo_best_response(pg, 1, profile.restricted_to(2),
                                 "optimistic", clamp=True)
    _, v2 = pseudo_best_response(pg, 2, profile.restricted_to(1),
                                 "optimistic", clamp=True)
    return v1 + v2


class ExactSolveCertifier:
    """Resolve both bound games at a cadence, certify the cross profile."""

    def __init__(self, rules, seed=0, chance_mode="signature",
                 solve_every=100, expand_mode="path", solver_iters=60,
                 solver_tol=None, track_uncertainty=True, gamma=2.0):
        if rules.num_players == 2 and not rules.zero_sum:
            raise ZeroSumRequiredError(
                "cert-lp requires a two-player zero-sum game")
        if rules.num_players > 2:
            raise ZeroSumRequiredError(
                "cert-lp requires a two-player zero-sum game")
        self.rules = rules
        self.pg = Pseudogame.from_rules(rules, chance_mode, gamma)
        self.rng = random.Random(seed)
        self.solve_every = solve_every
        self.expand_mode = expand_mode
        self.solver_iters = solver_iters
        self.solver_tol = solver_tol
        self.opt_state = None
        self.pess_state = None
        self.explore = None          # uniform until the first solve
        self.cert_profile = BehaviorProfile()
        root = self.pg.tree.root
        self.eps = root.upper[0] - root.lower[0]
        self.best = (self.eps, self.cert_profile, 0)
        self.gap_history = []
        self.last_solver_gap = None
        self.ledger = (UncertaintyLedger(self.pg.n)
                       if track_uncertainty else None)
        self.pessimism_checks = 0

    @property
    def t(self):
        return self.pg.t

    def step(self):
        """One playthrough, preceded by a resolve when the cadence hits."""
        if self.pg.t % self.solve_every == 0:
            self._solve()
        traj = play(self.rules, self.explore,
                    seed=self.rng.getrandbits(63))
        record_playthrough(self.pg, traj, self.expand_mode)
        if self.ledger is not None:
            self.ledger.accrue(self.pg, self.explore or BehaviorProfile())

    def _solve(self):
        pg = self.pg
        opt = exact_solve(pg, "optimistic", tol=self.solver_tol,
                          max_iters=self.solver_iters, state=self.opt_state)
        pess = exact_solve(pg, "pessimistic", tol=self.solver_tol,
                           max_iters=self.solver_iters,
                           state=self.pess_state)
        self.opt_state, self.pess_state = opt.state, pess.state
        if pg.n == 1:
            self.explore = opt.profile
            self.cert_profile = pess.profile
        else:
            xbar = opt.profile.restricted_to(1)
            ybar = opt.profile.restricted_to(2)
            xlow = pess.profile.restricted_to(1)
            ylow = pess.profile.restricted_to(2)
            self.explore = xbar.merged_with(ylow)
            self.cert_profile = xlow.merged_with(ybar)
            self._pessimism_check(xbar, ylow)
        self.eps = certified_gap(pg, self.cert_profile)
        if self.eps < self.best[0]:
            self.best = (self.eps, self.cert_profile.copy(), pg.t)
        self.gap_history.append((pg.t, self.eps))
        gaps = [g for g in (opt.achieved_gap, pess.achieved_gap)
                if g is not None and math.isfinite(g)]
        self.last_solver_gap = max(gaps) if gaps else None

    def _pessimism_check(self, xbar, ylow):
        """The pessimistic certificate never beats the explored width.

        min_y beta(xbar, y) - max_x alpha(x, ylow) is bounded by the
        clamped interval width of the exploration profile itself; this
        is an exact consequence of the bound definitions, so it must
        hold at every solve point up to float tolerance.
        """
        pg = self.pg
        _, mb = pseudo_best_response(pg, 2, xbar, "pessimistic", clamp=True)
        b_low = -mb
        _, a_high = pseudo_best_response(pg, 1, ylow, "pessimistic",
                                         clamp=True)
        lo, hi = eval_bounds(pg, xbar.merged_with(ylow), clamp=True)
        if b_low - a_high > (hi[0] - lo[0]) + 1e-9:
            raise CertificationError(
                "pessimistic certificate width check failed")
        self.pessimism_checks += 1

    def provable_gap(self):
        return self.eps

    def certificate_profile(self):
        return self.cert_profile

    def evaluation_profile(self):
        return self.cert_profile


class RegretCertifier:
    """One regret update per playthrough against the optimistic bound."""

    def __init__(self, rules, seed=0, chance_mode="signature",
                 backend="cfr", expand_mode="path", explore_mix=0.6,
                 track_uncertainty=True, track_eps_bar=False,
                 track_eps_tilde=False, loss_mode="bounds", gamma=2.0,
                 pseudogame=None):
        if backend not in ("cfr", "mccfr"):
            raise ValueError("unknown backend")
        if loss_mode not in ("bounds", "sampled-payoff"):
            raise ValueError("unknown loss mode")
        if track_eps_tilde and backend != "mccfr":
            raise CertigameError("eps-tilde requires the mccfr backend")
        self.rules = rules
        self.pg = pseudogame if pseudogame is not None else \
            Pseudogame.from_rules(rules, chance_mode, gamma)
        self.rng = random.Random(seed)
        self.backend = backend
        self.expand_mode = expand_mode
        self.explore_mix = explore_mix
        self.loss_mode = loss_mode
        n = self.pg.n
        self.states = {p: RegretState(p) for p in range(1, n + 1)}
        self.averagers = {p: AveragedStrategy(p) for p in range(1, n + 1)}
        self.leaf_counters = ({p: LeafCounter(self.pg, p)
                               for p in range(1, n + 1)}
                              if backend == "mccfr" else None)
        self.ledger = UncertaintyLedger(n) if track_uncertainty else None
        self.exact_acc = ({p: AccumulatedLoss(p) for p in range(1, n + 1)}
                          if track_eps_bar else None)
        self.sampled_acc = ({p: AccumulatedLoss(p) for p in range(1, n + 1)}
                            if track_eps_tilde else None)
        self.loss_scale = 0.0    # largest sampled-loss spread seen
        for ikey in self.pg.infoset_log:
            self._register(ikey, 0)

    @property
    def t(self):
        return self.pg.t

    def _register(self, ikey, created_at):
        player = ikey[0]
        extend_state(self.states[player], ikey,
                     self.pg.infoset_actions[ikey], created_at)
        self.averagers[player].extend(
            ikey[1], self.pg.infoset_actions[ikey],
            self.pg.infoset_meta[ikey]["parent_seq"])

    def current_profile(self):
        dists = {}
        for player, rs in self.states.items():
            for ikey in rs.infosets:
                dists[ikey] = rs.current(ikey, self.pg.infoset_actions[ikey])
        return BehaviorProfile(dists)

    def step(self):
        pg = self.pg
        profiles = self.current_profile()
        traj = play(self.rules, profiles, seed=self.rng.getrandbits(63))
        report = record_playthrough(pg, traj, self.expand_mode)
        for ikey in report["new_infosets"]:
            self._register(ikey, pg.t)

        if self.loss_mode == "sampled-payoff":
            self._naive_payoff_update(traj, profiles)
        elif self.backend == "cfr":
            for player in self.states:
                losses = cfr_player_losses(pg, player, profiles,
                                           "optimistic")
                rs = self.states[player]
                for ikey, vec in losses.items():
                    rm_step(rs, ikey, pg.infoset_actions[ikey], vec)
        else:
            for player in self.states:
                est, alpha_t = mccfr_sample_loss(
                    pg, player, profiles, self.rng, "optimistic",
                    self.explore_mix, self.leaf_counters[player])
                rs = self.states[player]
                for key, action, loss in mccfr_infoset_losses(est):
                    ikey = (player, key)
                    actions = pg.infoset_actions[ikey]
                    vec = [0.0] * len(actions)
                    vec[actions.index(action)] = loss
                    rm_step(rs, ikey, actions, vec)
                if self.sampled_acc is not None:
                    spread = (sequence_br_value(pg, player, est, True)
                              - sequence_br_value(pg, player, est, False))
                    if spread > self.loss_scale:
                        self.loss_scale = spread
                    self.sampled_acc[player].accumulate(est, alpha_t, 0.0)

        for player, av in self.averagers.items():
            av.add(lambda key, actions, p=player:
                   profiles.get((p, key)) or
                   {a: 1.0 / len(actions) for a in actions})

        if self.ledger is not None or self.exact_acc is not None:
            lo, hi = eval_bounds(pg, profiles, clamp=False)
            if self.ledger is not None:
                d = tuple(hi[i] - lo[i] for i in range(pg.n))
                for i, v in enumerate(d):
                    self.ledger.totals[i] += v
                self.ledger.per_step.append(d)
            if self.exact_acc is not None:
                for player in self.exact_acc:
                    coeffs = linear_loss_coeffs(pg, player, profiles,
                                                "optimistic")
                    self.exact_acc[player].accumulate(
                        coeffs, lo[player - 1], hi[player - 1])

    def _naive_payoff_update(self, traj, profiles):
        """What a tempting but wrong implementation would submit.

        Importance-weighted estimates of the *true observed payoffs*
        instead of the optimistic bound value: unbiased for the real
        game, blind to the value of shrinking its own uncertainty.
        """
        for player in self.states:
            pi = player - 1
            est = {}
            seq = ()
            q = 1.0
            for obs, action in traj.steps:
                est[seq] = est.get(seq, 0.0) + obs.reward[pi] / q
                if action is None:
                    break
                if obs.player == player:
                    ikey = (obs.player, obs.infoset)
                    d = profiles.get(ikey)
                    prob = (d.get(action, 0.0) if d
                            else 1.0 / len(obs.actions))
                    q *= prob
                    seq = seq + ((obs.infoset, action),)
            rs = self.states[player]
            for key, action, loss in mccfr_infoset_losses(est):
                ikey = (player, key)
                if not rs.has(ikey):
                    continue
                actions = self.pg.infoset_actions[ikey]
                vec = [0.0] * len(actions)
                vec[actions.index(action)] = loss
                rm_step(rs, ikey, actions, vec)

    def average_profile(self):
        out = BehaviorProfile()
        for av in self.averagers.values():
            out = out.merged_with(av.behavior())
        return out

    def evaluation_profile(self):
        return self.average_profile()

    def certificate_profile(self):
        return self.average_profile()

    def provable_gap(self):
        avg = self.average_profile()
        if self.pg.n == 2 and self.pg.zero_sum:
            return certified_gap(self.pg, avg)
        return max(averaged_profile_gap(self.pg, avg))

    def provable_gaps(self):
        avg = self.average_profile()
        if self.pg.n == 2 and self.pg.zero_sum:
            g = certified_gap(self.pg, avg)
            return (g, g)
        return averaged_profile_gap(self.pg, avg)

    def cumulative_bound_gap(self, player):
        """Average-regret gap from exactly replayed losses (eps-bar)."""
        if self.exact_acc is None:
            raise CertigameError("eps-bar tracking disabled")
        acc = self.exact_acc[player]
        if acc.count == 0:
            raise CertigameError("eps-bar undefined before any playthrough")
        t = acc.count
        rng_w = self.pg.tree.root.upper[player - 1] \
            - self.pg.tree.root.lower[player - 1]
        base = (acc.best_fixed(self.pg) - acc.alpha_sum) / t
        return base + rng_w * math.ceil(math.sqrt(t)) / t

    def sampled_cumulative_bound_gap(self, player):
        """eps-bar from sampled losses plus a concentration slack."""
        if self.sampled_acc is None:
            raise CertigameError("eps-tilde requires the mccfr backend")
        acc = self.sampled_acc[player]
        if acc.count == 0:
            raise CertigameError(
                "eps-tilde undefined before any playthrough")
        t = acc.count
        rng_w = self.pg.tree.root.upper[player - 1] \
            - self.pg.tree.root.lower[player - 1]
        base = (acc.best_fixed(self.pg) - acc.alpha_sum) / t
        slack = self.loss_scale * math.sqrt(
            math.log(2.0 * self.pg.n * t * t) / (2.0 * t))
        return base + rng_w * math.ceil(math.sqrt(t)) / t + slack


def run_uniform_exploration(rules, iters, seed=0, chance_mode="signature",
                            expand_mode="path", track_uncertainty=True,
                            gamma=2.0):
    """Record uniform playthroughs; returns (pseudogame, ledger)."""
    pg = Pseudogame.from_rules(rules, chance_mode, gamma)
    ledger = UncertaintyLedger(pg.n) if track_uncertainty else None
    rng = random.Random(seed)
    uniform = BehaviorProfile()
    for _ in range(iters):
        traj = play(rules, None, seed=rng.getrandbits(63))
        record_playthrough(pg, traj, expand_mode)
        if ledger is not None:
            ledger.accrue(pg, uniform)
    return pg, ledger


def extract_certificate(certifier, algo, seed=None):
    """Self-contained JSON-ready claim: trunk, profile, certified gaps."""
    pg = certifier.pg
    profile = certifier.certificate_profile()
    if pg.n == 2 and pg.zero_sum:
        g = certified_gap(pg, profile)
        gaps = {f"p{i}": g for i in (1, 2)}
    else:
        per = averaged_profile_gap(pg, profile)
        gaps = {f"p{i + 1}": v for i, v in enumerate(per)}
    prof_payload = {}
    for (player, key), dist in profile.dists.items():
        prof_payload.setdefault(f"p{player}", {})[key] = dict(dist)
    return {
        "schema": "certigame-certificate-v1",
        "game_id": pg.game_id,
        "algo": algo,
        "t": pg.t,
        "confidence": "1 - 2/t^2",
        "gaps": gaps,
        "profile": prof_payload,
        "trunk": pseudogame_payload(pg),
        "meta": {"seed": seed, "chance_mode": pg.chance_mode,
                 "num_players": pg.n, "zero_sum": pg.zero_sum},
    }


class LoadedCertificate:
    def __init__(self, payload):
        self.payload = payload
        self.pg = pseudogame_from_payload(payload["trunk"])
        dists = {}
        for pname, per_key in payload["profile"].items():
            player = int(pname[1:])
            for key, dist in per_key.items():
                dists[(player, key)] = dict(dist)
        self.profile = BehaviorProfile(dists)
        self.gaps = dict(payload["gaps"])

    def recompute_gaps(self):
        """Re-derive the certified gaps from the shipped trunk + profile."""
        pg = self.pg
        if pg.n == 2 and pg.zero_sum:
            g = certified_gap(pg, self.profile)
            return {"p1": g, "p2": g}
        per = averaged_profile_gap(pg, self.profile)
        return {f"p{i + 1}": v for i, v in enumerate(per)}

    def validate(self):
        """True when recomputed gaps match the stored claim exactly."""
        return self.recompute_gaps() == self.gaps


def load_certificate(payload):
    if payload.get("schema") != "certigame-certificate-v1":
        raise CertigameError("not a recognized certificate payload")
    return LoadedCertificate(payload)
