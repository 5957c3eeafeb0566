"""Frozen desk-scale thresholds: stored sweeps stay valid and reproducible.

The golden files under tests/golden/ hold 20-seed measurements made by
scripts/calibrate_golden.py. Here we check the stored statistics against
their thresholds and re-run a couple of seeds end to end to make sure
current code still reproduces the stored numbers bit for bit.
"""

import json
import statistics
from pathlib import Path

from certigame.certify import RegretCertifier, averaged_profile_gap
from certigame.games import get_game
from certigame.harness import ExperimentConfig, run

GOLDEN = Path(__file__).parent / "golden"


def load(name):
    with open(GOLDEN / name) as fh:
        return json.load(fh)


def test_cert_cfr_known_kuhn_median_under_threshold():
    data = load("kuhn_cert_cfr_known.json")
    values = list(data["per_seed"].values())
    assert len(values) == 20
    assert statistics.median(values) == data["median"]
    assert data["median"] <= data["threshold"] == 0.05


def test_cert_cfr_known_kuhn_reproduces():
    data = load("kuhn_cert_cfr_known.json")
    for seed in (0, 13):
        cert = RegretCertifier(get_game("kuhn"), seed=seed,
                               chance_mode="known", backend="cfr",
                               track_uncertainty=False)
        for _ in range(data["config"]["iterations"]):
            cert.step()
        eps1 = averaged_profile_gap(cert.pg, cert.average_profile())[0]
        assert eps1 == data["per_seed"][str(seed)]


def test_cert_lp_unknown_kuhn_median_under_threshold():
    data = load("kuhn_cert_lp_unknown.json")
    values = list(data["per_seed"].values())
    assert len(values) == 20
    assert statistics.median(values) == data["median"]
    # a quarter of the reward range [-2, 2]
    assert data["median"] <= data["threshold"] == 1.0


def test_cert_lp_unknown_kuhn_reproduces():
    data = load("kuhn_cert_lp_unknown.json")
    for seed in (0, 7):
        c = ExperimentConfig(game_id="kuhn", algo="cert-lp",
                             iterations=data["config"]["iterations"],
                             seed=seed, eval_every=10 ** 9)
        rows = list(run(c))
        assert rows[-1].provable_gap == data["per_seed"][str(seed)]
