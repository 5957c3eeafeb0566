"""Experiment driver: configured runs producing metric rows and artifacts.

One iteration is one playthrough of the black-box simulator. Runs log
the provable gap (from the certifier's own pseudogame) alongside the
true gap (from best responses on a fully expanded oracle tree, when the
game is small enough to expand), and emit byte-stable CSV plus an
optional certificate file.
"""

from __future__ import annotations

import json
import time
import warnings
from dataclasses import dataclass

from . import __version__
from .certify import (ExactSolveCertifier, RegretCertifier,
                      extract_certificate)
from .confidence import pseudogame_from_oracle
from .efg import CertigameError, best_response, expected_value
from .games import OracleTooLargeError, get_game, oracle

CSV_HEADER = ("iter,playthroughs,nodes_expanded,chance_estimators,"
              "provable_gap,true_gap_p1,true_gap_p2,U_p1,U_p2,"
              "wallclock_ms,solver_gap")

ALGOS = ("cert-lp", "cert-lp-indep", "cert-cfr", "cert-mccfr",
         "mccfr-baseline")

# Full-scale runs on the two big benchmark games stay behind --long.
LONG_GAMES = ("goofspiel:4", "leduc:13")
LONG_ITER_LIMIT = 5000


@dataclass
class ExperimentConfig:
    game_id: str
    algo: str = "cert-lp"
    iterations: int = 1000
    seed: int = 0
    solve_cadence: int = 100
    chance_mode: str = None      # None picks the algo's default
    expand_mode: str = "path"
    eval_every: int = 1000
    csv_path: str = None
    cert_path: str = None
    eps_bar: bool = False
    eps_tilde: bool = False
    loss_mode: str = "bounds"
    track_uncertainty: bool = True
    timings: bool = False
    long_ok: bool = False

    def resolved_chance_mode(self):
        if self.algo == "cert-lp-indep":
            if self.chance_mode not in (None, "independent"):
                raise CertigameError(
                    "cert-lp-indep forces independent chance estimation")
            return "independent"
        if self.algo == "mccfr-baseline":
            if self.chance_mode not in (None, "known"):
                raise CertigameError(
                    "mccfr-baseline runs on the fully known game")
            return "known"
        return self.chance_mode or "signature"

    def validate(self):
        if self.algo not in ALGOS:
            raise CertigameError(f"unknown algorithm: {self.algo}")
        if self.iterations < 1:
            raise CertigameError("iterations must be positive")
        if self.expand_mode not in ("path", "first-new"):
            raise CertigameError(f"unknown expand mode: {self.expand_mode}")
        mode = self.resolved_chance_mode()
        if mode not in ("known", "signature", "independent"):
            raise CertigameError(f"unknown chance mode: {mode}")
        if (self.game_id in LONG_GAMES
                and self.iterations > LONG_ITER_LIMIT and not self.long_ok):
            raise CertigameError(
                f"{self.game_id} at {self.iterations} iterations needs "
                "--long")
        if self.loss_mode == "sampled-payoff" and self.algo != "cert-mccfr":
            raise CertigameError(
                "the naive payoff estimator demo runs on cert-mccfr")


@dataclass
class MetricsRow:
    iter: int
    playthroughs: int
    nodes_expanded: int
    chance_estimators: int
    provable_gap: float = None
    true_gap_p1: float = None
    true_gap_p2: float = None
    u_p1: float = None
    u_p2: float = None
    wallclock_ms: int = 0
    solver_gap: float = None

    def csv_line(self):
        cells = [str(self.iter), str(self.playthroughs),
                 str(self.nodes_expanded), str(self.chance_estimators)]
        for v in (self.provable_gap, self.true_gap_p1, self.true_gap_p2,
                  self.u_p1, self.u_p2):
            cells.append("" if v is None else repr(float(v)))
        cells.append(str(self.wallclock_ms))
        cells.append("" if self.solver_gap is None
                     else repr(float(self.solver_gap)))
        return ",".join(cells)


def build_certifier(config):
    """Instantiate the configured algorithm, ready to step."""
    config.validate()
    rules = get_game(config.game_id)
    mode = config.resolved_chance_mode()
    if config.algo in ("cert-lp", "cert-lp-indep"):
        return ExactSolveCertifier(
            rules, seed=config.seed, chance_mode=mode,
            solve_every=config.solve_cadence,
            expand_mode=config.expand_mode,
            track_uncertainty=config.track_uncertainty)
    if config.algo == "mccfr-baseline":
        pg = pseudogame_from_oracle(oracle(config.game_id), "known",
                                    game_id=config.game_id)
        return RegretCertifier(rules, seed=config.seed, backend="mccfr",
                               expand_mode=config.expand_mode,
                               track_uncertainty=False, pseudogame=pg)
    backend = "cfr" if config.algo == "cert-cfr" else "mccfr"
    return RegretCertifier(
        rules, seed=config.seed, chance_mode=mode, backend=backend,
        expand_mode=config.expand_mode,
        track_uncertainty=config.track_uncertainty,
        track_eps_bar=config.eps_bar, track_eps_tilde=config.eps_tilde,
        loss_mode=config.loss_mode)


class _TrueGapEvaluator:
    """Best-response gaps on the oracle tree, if it fits in memory."""

    def __init__(self, game_id):
        self.game_id = game_id
        self.tree = None
        self.failed = False

    def gaps(self, profile):
        if self.failed:
            return None
        if self.tree is None:
            try:
                self.tree = oracle(self.game_id)
            except OracleTooLargeError:
                self.failed = True
                warnings.warn(
                    f"true gap unavailable: oracle too large for "
                    f"{self.game_id}")
                return None
        evs = expected_value(self.tree, profile, fallback_uniform=True)
        out = []
        for p in range(1, self.tree.num_players + 1):
            _, v = best_response(self.tree, p, profile,
                                 fallback_uniform=True)
            out.append(v - evs[p - 1])
        return out


def run(config):
    """Execute one configured experiment, yielding metric rows.

    Rows come out at iteration 1, at every eval_every multiple (these
    carry true gaps when the oracle fits), at cert-lp solve points
    (these carry the solver's achieved gap), and at the final
    iteration.
    """
    certifier = build_certifier(config)
    evaluator = _TrueGapEvaluator(config.game_id)
    is_lp = config.algo in ("cert-lp", "cert-lp-indep")
    is_baseline = config.algo == "mccfr-baseline"
    start = time.perf_counter()

    for i in range(1, config.iterations + 1):
        certifier.step()
        solved_now = is_lp and (i - 1) % config.solve_cadence == 0
        eval_now = i % config.eval_every == 0 or i == config.iterations
        if not (solved_now or eval_now or i == 1):
            continue

        pg = certifier.pg
        row = MetricsRow(iter=i, playthroughs=pg.t,
                         nodes_expanded=pg.node_count,
                         chance_estimators=pg.num_estimators)
        if not is_baseline:
            row.provable_gap = certifier.provable_gap()
        if eval_now:
            gaps = evaluator.gaps(certifier.evaluation_profile())
            if gaps is not None:
                row.true_gap_p1 = gaps[0]
                if len(gaps) > 1:
                    row.true_gap_p2 = gaps[1]
        ledger = certifier.ledger
        if ledger is not None:
            row.u_p1 = ledger.totals[0]
            if len(ledger.totals) > 1:
                row.u_p2 = ledger.totals[1]
        if config.timings:
            row.wallclock_ms = int((time.perf_counter() - start) * 1000)
        if solved_now:
            row.solver_gap = certifier.last_solver_gap
        yield row

    # hand the certifier back to the caller through the config object;
    # keeps run() a plain row generator for streaming writes
    config.last_certifier = certifier


def emit_csv(rows, path):
    """Write rows to path with the fixed header; returns the row count."""
    count = 0
    with open(path, "w", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in rows:
            fh.write(row.csv_line() + "\n")
            count += 1
    return count


def meta_path_for(csv_path):
    return csv_path + ".meta.json"


def write_meta(config, path):
    rules = get_game(config.game_id)
    meta = {
        "game_id": config.game_id,
        "algo": config.algo,
        "iterations": config.iterations,
        "seed": config.seed,
        "solve_cadence": config.solve_cadence,
        "chance_mode": config.resolved_chance_mode(),
        "expand_mode": config.expand_mode,
        "eval_every": config.eval_every,
        "loss_mode": config.loss_mode,
        "num_players": rules.num_players,
        "zero_sum": rules.zero_sum,
        "version": __version__,
    }
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return meta


def export_certificate(certifier, config, path):
    payload = extract_certificate(certifier, config.algo, config.seed)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return payload


def run_to_files(config):
    """Run an experiment and write all requested artifacts.

    Returns (rows, certifier). CSV and metadata go to csv_path (plus a
    .meta.json sidecar); a certificate goes to cert_path when set.
    """
    rows = list(run(config))
    certifier = config.last_certifier
    if config.csv_path:
        emit_csv(rows, config.csv_path)
        write_meta(config, meta_path_for(config.csv_path))
    if config.cert_path:
        if config.algo == "mccfr-baseline":
            raise CertigameError(
                "mccfr-baseline does not produce a certificate")
        export_certificate(certifier, config, config.cert_path)
    return rows, certifier


def _parse_cell(cell):
    return None if cell == "" else float(cell)


def load_run(csv_path):
    """Read one emitted CSV (and its sidecar) back into rows + meta."""
    rows = []
    with open(csv_path) as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise CertigameError(f"unrecognized CSV header in {csv_path}")
        for line in fh:
            c = line.rstrip("\n").split(",")
            rows.append(MetricsRow(
                iter=int(c[0]), playthroughs=int(c[1]),
                nodes_expanded=int(c[2]), chance_estimators=int(c[3]),
                provable_gap=_parse_cell(c[4]),
                true_gap_p1=_parse_cell(c[5]),
                true_gap_p2=_parse_cell(c[6]),
                u_p1=_parse_cell(c[7]), u_p2=_parse_cell(c[8]),
                wallclock_ms=int(c[9]),
                solver_gap=_parse_cell(c[10])))
    meta = None
    try:
        with open(meta_path_for(csv_path)) as fh:
            meta = json.load(fh)
    except FileNotFoundError:
        pass
    return rows, meta


def _run_summary(csv_path):
    rows, meta = load_run(csv_path)
    if not rows:
        raise CertigameError(f"empty run: {csv_path}")
    final = rows[-1]
    first_nontrivial = None
    trivial = rows[0].provable_gap
    for row in rows:
        if (row.provable_gap is not None and trivial is not None
                and row.provable_gap < trivial):
            first_nontrivial = (row.iter, row.nodes_expanded)
            break
    return {
        "path": csv_path,
        "game_id": meta["game_id"] if meta else None,
        "algo": meta["algo"] if meta else None,
        "seed": meta["seed"] if meta else None,
        "iterations": final.iter,
        "final_provable_gap": final.provable_gap,
        "final_true_gap": (None if final.true_gap_p1 is None
                           else final.true_gap_p1
                           + (final.true_gap_p2 or 0.0)),
        "final_nodes": final.nodes_expanded,
        "first_nontrivial": first_nontrivial,
        "rows": rows,
    }


def compare_runs(paths, full_nodes=None):
    """Line up several runs of the same game for a gap comparison.

    full_nodes, when given, is the total node count of the game; each
    run reports whether (and when) it crossed that line, mirroring the
    vertical marker in convergence plots. Refuses runs over different
    games and fewer than two inputs.
    """
    if len(paths) < 2:
        raise CertigameError("need at least two runs to compare")
    summaries = [_run_summary(p) for p in paths]
    games = {s["game_id"] for s in summaries}
    if len(games) != 1:
        raise CertigameError("mismatched games")
    if full_nodes is None:
        try:
            gid = summaries[0]["game_id"]
            if gid:
                full_nodes = len(oracle(gid).nodes)
        except (OracleTooLargeError, CertigameError):
            full_nodes = None
    out = {"game_id": summaries[0]["game_id"], "full_nodes": full_nodes,
           "runs": [], "pairs": []}
    for s in summaries:
        crossed = None
        if full_nodes is not None:
            for row in s["rows"]:
                if row.nodes_expanded >= full_nodes:
                    crossed = row.iter
                    break
        entry = {k: s[k] for k in
                 ("path", "algo", "seed", "iterations",
                  "final_provable_gap", "final_true_gap", "final_nodes",
                  "first_nontrivial")}
        entry["crossed_node_line_at"] = crossed
        out["runs"].append(entry)
    for i in range(len(summaries)):
        for j in range(i + 1, len(summaries)):
            a, b = summaries[i], summaries[j]
            diff = None
            if (a["final_provable_gap"] is not None
                    and b["final_provable_gap"] is not None):
                diff = a["final_provable_gap"] - b["final_provable_gap"]
            out["pairs"].append({
                "a": a["path"], "b": b["path"],
                "provable_gap_diff": diff,
            })
    return out


def format_comparison(summary):
    lines = [f"game: {summary['game_id']}   "
             f"full tree: {summary['full_nodes'] or 'unknown'} nodes"]
    for r in summary["runs"]:
        gap = ("-" if r["final_provable_gap"] is None
               else f"{r['final_provable_gap']:.6g}")
        true = ("-" if r["final_true_gap"] is None
                else f"{r['final_true_gap']:.6g}")
        lines.append(
            f"  {r['algo'] or '?':<15} seed {r['seed']}: "
            f"iters={r['iterations']} nodes={r['final_nodes']} "
            f"provable={gap} true={true}")
    for p in summary["pairs"]:
        diff = ("-" if p["provable_gap_diff"] is None
                else f"{p['provable_gap_diff']:+.6g}")
        lines.append(f"  gap diff {p['a']} vs {p['b']}: {diff}")
    return "\n".join(lines)
