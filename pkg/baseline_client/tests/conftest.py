"""Fixtures that drive the riskbench platform purely through its external
interfaces: the `riskbench` CLI, the bundle file layout, and the HTTP API.
The baseline client never imports the platform package."""

import json
import os
import subprocess
import sys
from types import SimpleNamespace

import pytest

RISKBENCH = [sys.executable, "-m", "riskbench.cli"]


def run_riskbench(args, home):
    env = dict(os.environ, RISKBENCH_HOME=str(home))
    result = subprocess.run(
        RISKBENCH + args, capture_output=True, text=True, env=env, timeout=600
    )
    if result.returncode != 0:
        raise AssertionError(f"riskbench {args} failed: {result.stderr}")
    return json.loads(result.stdout) if result.stdout.strip() else None


def _config_doc(seed, n_players, signal, name):
    return {
        "seed": seed,
        "n_players": n_players,
        "time_horizon_days": 7,
        "engagement_mix": {"NEW": 0.05, "CASUAL": 0.158, "REGULAR": 0.792},
        "vertical_mix": {"CASINO": 1.0},
        "cohorts": [["EU", 0.5], ["NA", 0.5]],
        "prevalence": 0.1,
        "signal_strength": signal,
        "economics": {"LOTTERY": 0.65, "CASINO": 0.95, "SPORTS": 0.93},
        "label_source": "PGSI",
        "pgsi_threshold": 5,
        "base_date": "2025-05-05",
        "card_meta": {"name": name, "version": "v1", "tasks": [["T", "baseline benchmark"]]},
    }


def _task_doc(task_id, dataset_ref, salt):
    return {
        "task_id": task_id,
        "dataset": dataset_ref,
        "label_rule": {
            "source": "PGSI",
            "kind": "BINARY",
            "binary_threshold": 5,
            "buckets": ["0", "1-2", "3-4", "5-7", "8+"],
            "min_tenure_days": 0,
        },
        "observation_window_days": 7,
        "label_horizon": {"text": "risk flag at horizon end", "days": 7},
        "split": {"method": "PLAYER_HASH", "train_fraction": 0.8, "salt": salt},
        "primary_metric": "AUC",
        "cohort_field": "cohort",
    }


def build_task(tmp_root, *, seed, n_players, signal, name, task_id):
    home = tmp_root / "home"
    config_path = tmp_root / "config.json"
    config_path.write_text(json.dumps(_config_doc(seed, n_players, signal, name)), "utf-8")
    run_riskbench(["generate", "--config", str(config_path), "--out", str(tmp_root / "gen")], home)
    ref = run_riskbench(["register", "--dir", str(tmp_root / "gen")], home)["dataset"]
    spec_path = tmp_root / "task.json"
    spec_path.write_text(json.dumps(_task_doc(task_id, ref, salt=name.lower())), "utf-8")
    out = run_riskbench(["materialize", "--spec", str(spec_path)], home)
    return SimpleNamespace(home=home, task_id=task_id, bundle_dir=out["bundle_dir"])


@pytest.fixture(scope="session")
def signal_task(tmp_path_factory):
    """A materialized binary task over signal-bearing data (the signal preset
    shape at reduced scale)."""
    return build_task(
        tmp_path_factory.mktemp("signal"),
        seed=616, n_players=2000, signal=1.0, name="Baseline Signal Bench", task_id="SB1",
    )


@pytest.fixture(scope="session")
def null_task(tmp_path_factory):
    """Same shape with signal_strength 0: every marker is noise."""
    return build_task(
        tmp_path_factory.mktemp("null"),
        seed=616, n_players=5000, signal=0.0, name="Baseline Null Bench", task_id="NB1",
    )
