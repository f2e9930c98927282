"""Per-player feature aggregation over public bundle files.

Only the three public CSVs are touched; nothing under private/ is ever read.
Events arrive sorted by (player_id, start_time), which the chase proxy relies
on: a session "escalates" when its mean stake exceeds the previous session's
after that session lost.
"""

from __future__ import annotations

import csv
from pathlib import Path

FEATURE_NAMES = [
    "session_count",
    "active_days",
    "total_staked",
    "net_outcome",
    "mean_stake",
    "declined_deposit_count",
    "deposit_count",
    "chase_proxy",
]

PUBLIC_TRAIN_EVENTS = "train_events.csv"
PUBLIC_TRAIN_LABELS = "train_labels.csv"
PUBLIC_TEST_EVENTS = "test_events.csv"
PUBLIC_TASK_CARD = "task_card.json"


class _Accumulator:
    __slots__ = (
        "sessions", "days", "staked", "net", "bets",
        "declined", "deposits", "escalations", "transitions",
        "prev_mean_stake", "prev_net",
    )

    def __init__(self):
        self.sessions = 0
        self.days = set()
        self.staked = 0
        self.net = 0
        self.bets = 0
        self.declined = 0
        self.deposits = 0
        self.escalations = 0
        self.transitions = 0
        self.prev_mean_stake = None
        self.prev_net = None

    def row(self):
        mean_stake = self.staked / self.bets if self.bets else 0.0
        chase = self.escalations / self.transitions if self.transitions else 0.0
        return [
            float(self.sessions),
            float(len(self.days)),
            float(self.staked),
            float(self.net),
            mean_stake,
            float(self.declined),
            float(self.deposits),
            chase,
        ]


def build_features(events_path: Path) -> dict:
    """player_id -> feature list (FEATURE_NAMES order), one row per player."""
    players: dict = {}
    with open(events_path, newline="", encoding="utf-8") as f:
        for row in csv.DictReader(f):
            acc = players.setdefault(row["player_id"], _Accumulator())
            kind = row["event_kind"]
            if kind == "SESSION":
                acc.sessions += 1
                acc.days.add(row["start_time"][:10])
                staked = int(row["total_staked"])
                bets = int(row["bet_count"])
                net = int(row["net_outcome"])
                acc.staked += staked
                acc.net += net
                acc.bets += bets
                mean_stake = staked / bets if bets else 0.0
                if acc.prev_mean_stake is not None:
                    acc.transitions += 1
                    if acc.prev_net < 0 and mean_stake > acc.prev_mean_stake:
                        acc.escalations += 1
                acc.prev_mean_stake = mean_stake
                acc.prev_net = net
            elif kind == "DEPOSIT":
                acc.deposits += 1
                if row["transaction_status"] == "DECLINED":
                    acc.declined += 1
    return {pid: acc.row() for pid, acc in sorted(players.items())}


def read_train_targets(labels_path: Path) -> dict:
    """player_id -> 0/1 target from the public train labels."""
    targets = {}
    with open(labels_path, newline="", encoding="utf-8") as f:
        for row in csv.DictReader(f):
            targets[row["player_id"]] = int(row["target"])
    return targets
