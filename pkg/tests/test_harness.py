"""Experiment driver: config validation, CSV contract, comparisons, CLI."""

import json

import pytest

from certigame import cli
from certigame.efg import CertigameError
from certigame.games import oracle
from certigame.certify import load_certificate
from certigame.harness import (CSV_HEADER, ExperimentConfig, compare_runs,
                               emit_csv, format_comparison, load_run,
                               meta_path_for, run, run_to_files)


def cfg(**kw):
    kw.setdefault("game_id", "kuhn")
    return ExperimentConfig(**kw)


# --------------------------------------------------------------- config


def test_header_is_fixed():
    assert CSV_HEADER == ("iter,playthroughs,nodes_expanded,"
                          "chance_estimators,provable_gap,true_gap_p1,"
                          "true_gap_p2,U_p1,U_p2,wallclock_ms,solver_gap")


def test_config_rejects_unknown_algo():
    with pytest.raises(CertigameError, match="unknown algorithm"):
        cfg(algo="cfr").validate()


def test_config_rejects_bad_iterations_and_expand():
    with pytest.raises(CertigameError, match="positive"):
        cfg(iterations=0).validate()
    with pytest.raises(CertigameError, match="expand mode"):
        cfg(expand_mode="bfs").validate()


def test_indep_algo_forces_independent_estimation():
    c = cfg(algo="cert-lp-indep")
    assert c.resolved_chance_mode() == "independent"
    with pytest.raises(CertigameError, match="independent"):
        cfg(algo="cert-lp-indep", chance_mode="signature").validate()


def test_baseline_forces_known_chance():
    c = cfg(algo="mccfr-baseline")
    assert c.resolved_chance_mode() == "known"
    with pytest.raises(CertigameError, match="fully known"):
        cfg(algo="mccfr-baseline", chance_mode="signature").validate()


def test_default_chance_mode_is_signature():
    assert cfg().resolved_chance_mode() == "signature"


def test_big_games_need_the_long_flag():
    with pytest.raises(CertigameError, match="--long"):
        cfg(game_id="goofspiel:4", iterations=20000).validate()
    cfg(game_id="goofspiel:4", iterations=20000, long_ok=True).validate()
    cfg(game_id="goofspiel:4", iterations=500).validate()


def test_naive_loss_mode_restricted():
    with pytest.raises(CertigameError, match="cert-mccfr"):
        cfg(algo="cert-cfr", loss_mode="sampled-payoff").validate()
    cfg(algo="cert-mccfr", loss_mode="sampled-payoff").validate()


# ------------------------------------------------------------ run rows


def test_row_cadence_and_solver_gap_placement():
    c = cfg(algo="cert-lp", iterations=25, eval_every=10,
            solve_cadence=10)
    rows = list(run(c))
    assert [r.iter for r in rows] == [1, 10, 11, 20, 21, 25]
    solved = [r.iter for r in rows if r.solver_gap is not None]
    assert solved == [1, 11, 21]
    with_true = [r.iter for r in rows if r.true_gap_p1 is not None]
    assert with_true == [10, 20, 25]
    assert all(r.provable_gap is not None for r in rows)


def test_first_row_gap_is_reward_range():
    for algo in ("cert-lp", "cert-cfr", "cert-mccfr"):
        c = cfg(algo=algo, iterations=3, eval_every=100)
        rows = list(run(c))
        assert rows[0].iter == 1
        assert rows[0].provable_gap == 4.0


def test_node_counts_nondecreasing_and_gap_ordering():
    c = cfg(algo="cert-cfr", iterations=400, eval_every=100, seed=1)
    rows = list(run(c))
    nodes = [r.nodes_expanded for r in rows]
    assert nodes == sorted(nodes)
    for r in rows:
        if r.true_gap_p1 is not None:
            true = r.true_gap_p1 + r.true_gap_p2
            assert r.provable_gap >= true - 1e-9
        assert r.playthroughs == r.iter


def test_baseline_emits_no_provable_gap():
    c = cfg(algo="mccfr-baseline", iterations=60, eval_every=30)
    rows = list(run(c))
    assert all(r.provable_gap is None for r in rows)
    assert all(r.u_p1 is None for r in rows)
    full = len(oracle("kuhn").nodes)
    assert all(r.nodes_expanded == full for r in rows)
    assert all(r.chance_estimators == 0 for r in rows)
    # it still learns: the true gap at the end is below trivial
    assert rows[-1].true_gap_p1 + rows[-1].true_gap_p2 < 4.0


def test_oversized_oracle_drops_true_gap_with_warning(monkeypatch):
    monkeypatch.setenv("CERTIGAME_NODE_CAP", "500")
    c = cfg(game_id="goofspiel:4", algo="cert-cfr", iterations=10,
            eval_every=5)
    with pytest.warns(UserWarning, match="oracle too large"):
        rows = list(run(c))
    assert all(r.true_gap_p1 is None for r in rows)
    assert all(r.provable_gap is not None for r in rows)


# ------------------------------------------------------------ artifacts


def test_csv_roundtrip_and_byte_stability(tmp_path):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    for out in (out1, out2):
        c = cfg(algo="cert-cfr", iterations=120, eval_every=40, seed=7,
                csv_path=str(out))
        rows, _ = run_to_files(c)
    assert out1.read_bytes() == out2.read_bytes()
    text = out1.read_text().splitlines()
    assert text[0] == CSV_HEADER

    reloaded, meta = load_run(str(out1))
    assert reloaded == rows
    assert meta["game_id"] == "kuhn"
    assert meta["algo"] == "cert-cfr"
    assert meta["seed"] == 7
    assert meta["chance_mode"] == "signature"


def test_load_run_rejects_foreign_csv(tmp_path):
    bad = tmp_path / "x.csv"
    bad.write_text("time,value\n1,2\n")
    with pytest.raises(CertigameError, match="header"):
        load_run(str(bad))


def test_certificate_artifact_revalidates(tmp_path):
    out = tmp_path / "r.csv"
    certf = tmp_path / "r.cert.json"
    c = cfg(algo="cert-cfr", iterations=150, eval_every=50, seed=2,
            csv_path=str(out), cert_path=str(certf))
    run_to_files(c)
    payload = json.loads(certf.read_text())
    loaded = load_certificate(payload)
    assert loaded.validate()
    assert payload["algo"] == "cert-cfr"
    assert payload["t"] == 150


def test_baseline_refuses_certificate(tmp_path):
    c = cfg(algo="mccfr-baseline", iterations=5,
            cert_path=str(tmp_path / "no.json"))
    with pytest.raises(CertigameError, match="certificate"):
        run_to_files(c)


# ----------------------------------------------------------- comparison


def _write_run(tmp_path, name, seed, algo="cert-cfr", game="kuhn",
               iters=100):
    out = tmp_path / name
    c = cfg(game_id=game, algo=algo, iterations=iters, eval_every=50,
            seed=seed, csv_path=str(out))
    run_to_files(c)
    return str(out)


def test_compare_needs_two_runs(tmp_path):
    p = _write_run(tmp_path, "one.csv", 0)
    with pytest.raises(CertigameError, match="at least two"):
        compare_runs([p])


def test_compare_rejects_mixed_games(tmp_path):
    a = _write_run(tmp_path, "a.csv", 0)
    b = _write_run(tmp_path, "b.csv", 0, game="goofspiel:3", iters=50)
    with pytest.raises(CertigameError, match="mismatched games"):
        compare_runs([a, b])


def test_compare_identical_runs_is_zero_diff(tmp_path):
    a = _write_run(tmp_path, "a.csv", 5)
    b = _write_run(tmp_path, "b.csv", 5)
    summary = compare_runs([a, b])
    assert summary["game_id"] == "kuhn"
    assert summary["full_nodes"] == len(oracle("kuhn").nodes)
    assert summary["pairs"][0]["provable_gap_diff"] == 0.0
    text = format_comparison(summary)
    assert "kuhn" in text and "cert-cfr" in text


def test_compare_tracks_node_line(tmp_path):
    a = _write_run(tmp_path, "a.csv", 1, algo="mccfr-baseline")
    b = _write_run(tmp_path, "b.csv", 1)
    summary = compare_runs([a, b])
    by_algo = {r["algo"]: r for r in summary["runs"]}
    assert by_algo["mccfr-baseline"]["crossed_node_line_at"] == 1
    assert by_algo["cert-cfr"]["crossed_node_line_at"] is None


# ------------------------------------------------------------------ CLI


def test_cli_run_and_compare(tmp_path, capsys):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    for path, seed in ((a, 0), (b, 1)):
        rc = cli.main(["run", "--game", "kuhn", "--algo", "cert-cfr",
                       "--iters", "60", "--eval-every", "30",
                       "--seed", str(seed), "--out", str(path)])
        assert rc == 0
    out = capsys.readouterr().out
    assert "provable_gap=" in out
    rc = cli.main(["compare", str(a), str(b)])
    assert rc == 0
    assert "gap diff" in capsys.readouterr().out
    assert (tmp_path / "a.csv.meta.json").exists()
    assert meta_path_for(str(a)) == str(a) + ".meta.json"


def test_cli_long_gate_exit_code(tmp_path, capsys):
    rc = cli.main(["run", "--game", "goofspiel:4", "--iters", "20000",
                   "--out", str(tmp_path / "x.csv")])
    assert rc == 2
    assert "--long" in capsys.readouterr().err


def test_cli_warning1_demo_needs_mccfr(tmp_path, capsys):
    rc = cli.main(["run", "--game", "bandit:sec4:0.3:0",
                   "--algo", "cert-cfr", "--warning1-demo",
                   "--out", str(tmp_path / "x.csv")])
    assert rc == 2
    assert "cert-mccfr" in capsys.readouterr().err


def test_cli_warning1_demo_runs(tmp_path, capsys):
    out = tmp_path / "w.csv"
    rc = cli.main(["run", "--game", "bandit:sec4:0.3:0",
                   "--algo", "cert-mccfr", "--warning1-demo",
                   "--iters", "200", "--eval-every", "100",
                   "--out", str(out)])
    assert rc == 0
    _, meta = load_run(str(out))
    assert meta["loss_mode"] == "sampled-payoff"


def test_cli_eps_bar_report(tmp_path, capsys):
    rc = cli.main(["run", "--game", "kuhn", "--algo", "cert-mccfr",
                   "--iters", "50", "--eps-bar", "--eps-tilde",
                   "--out", str(tmp_path / "e.csv")])
    assert rc == 0
    out = capsys.readouterr().out
    assert "eps-bar: p1=" in out
    assert "eps-tilde: p1=" in out


def test_emit_csv_counts_rows(tmp_path):
    c = cfg(algo="cert-cfr", iterations=30, eval_every=10)
    rows = list(run(c))
    n = emit_csv(rows, str(tmp_path / "n.csv"))
    assert n == len(rows)
