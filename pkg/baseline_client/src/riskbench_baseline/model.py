"""Logistic-regression baseline: fit on train features, score test players."""

from __future__ import annotations

import csv
import io
import json
import sys
from pathlib import Path

import numpy as np
from sklearn.linear_model import LogisticRegression
from sklearn.preprocessing import StandardScaler

from .features import (
    PUBLIC_TASK_CARD,
    PUBLIC_TEST_EVENTS,
    PUBLIC_TRAIN_EVENTS,
    PUBLIC_TRAIN_LABELS,
    build_features,
    read_train_targets,
)


def fit_and_predict(train_features: dict, train_targets: dict, test_features: dict) -> dict:
    """player_id -> score in [0, 1] for every test player.

    A single-class training target cannot support a classifier; the fallback
    is a constant score at the training prevalence, with a warning on stderr.
    """
    players = sorted(train_features)
    X = np.array([train_features[p] for p in players])
    y = np.array([train_targets[p] for p in players])
    test_players = sorted(test_features)
    X_test = np.array([test_features[p] for p in test_players])

    if len(set(y.tolist())) < 2:
        prevalence = float(y.mean()) if len(y) else 0.0
        print(
            f"warning: single-class training target; emitting constant score {prevalence:.6f}",
            file=sys.stderr,
        )
        return {p: prevalence for p in test_players}

    scaler = StandardScaler().fit(X)
    model = LogisticRegression(max_iter=1000)
    model.fit(scaler.transform(X), y)
    scores = model.predict_proba(scaler.transform(X_test))[:, 1]
    scores = np.clip(scores, 0.0, 1.0)
    return {p: float(s) for p, s in zip(test_players, scores)}


def predict_bundle(bundle_dir: Path) -> dict:
    """Run the whole baseline over a public bundle directory."""
    bundle_dir = Path(bundle_dir)
    card = json.loads((bundle_dir / PUBLIC_TASK_CARD).read_text("utf-8"))
    if card["kind"] != "BINARY":
        raise ValueError(f"the baseline handles BINARY tasks only, got {card['kind']}")
    train_features = build_features(bundle_dir / PUBLIC_TRAIN_EVENTS)
    train_targets = read_train_targets(bundle_dir / PUBLIC_TRAIN_LABELS)
    test_features = build_features(bundle_dir / PUBLIC_TEST_EVENTS)
    return fit_and_predict(train_features, train_targets, test_features)


def write_submission(scores: dict, out_path: Path) -> None:
    """Submission CSV: player_id,score with at most 6 decimal places."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["player_id", "score"])
    for pid in sorted(scores):
        writer.writerow([pid, f"{scores[pid]:.6f}"])
    Path(out_path).write_text(buf.getvalue(), "utf-8")
