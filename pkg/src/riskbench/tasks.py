"""Benchmark task materialization: label rules, player splits, observation
windows, and task bundles with hidden answer keys.

A bundle directory is the unit handed to participants:

    train_events.csv, train_labels.csv, test_events.csv, task_card.json
    private/answer_key.csv          <- never distributed

Materialization is deterministic: the split depends only on (player_id, salt)
and windows are anchored at each player's first activity, so re-running over
the same registered dataset reproduces the bundle byte for byte.
"""

from __future__ import annotations

import csv
import hashlib
import io
import shutil
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .canonical import EventRecord, RiskbenchError, parse_events, serialize_events
from .registry import Registry
from .util import dump_json, riskbench_home

PGSI_MAX = 27

DEFAULT_BUCKETS = ("0", "1-2", "3-4", "5-7", "8+")

PRIMARY_METRICS = ("AUC", "F1", "MACRO_F1")

LABEL_RULE_SOURCES = ("PGSI", "VSE", "BEHAVIORAL_THRESHOLD")


class TaskError(RiskbenchError):
    code = "TaskError"


class OutOfRange(TaskError):
    code = "OutOfRange"


class WindowExceedsHorizon(TaskError):
    code = "WindowExceedsHorizon"


class EmptyTestSet(TaskError):
    code = "EmptyTestSet"


class LabelSourceMissing(TaskError):
    code = "LabelSourceMissing"


def _parse_bucket(label: str) -> tuple:
    if label.endswith("+"):
        lo = int(label[:-1])
        return lo, PGSI_MAX
    if "-" in label:
        lo, hi = label.split("-", 1)
        return int(lo), int(hi)
    value = int(label)
    return value, value


def validate_buckets(buckets) -> None:
    """Buckets must partition 0..27 in order, no gaps or overlap."""
    expected_lo = 0
    for label in buckets:
        lo, hi = _parse_bucket(label)
        if lo != expected_lo or hi < lo:
            raise TaskError(f"buckets do not partition 0..{PGSI_MAX}: problem at {label!r}")
        expected_lo = hi + 1
    if expected_lo != PGSI_MAX + 1:
        raise TaskError(f"buckets stop at {expected_lo - 1}, must cover 0..{PGSI_MAX}")


def pgsi_to_binary(score: int, threshold: int) -> int:
    """1 iff score >= threshold; the '5+' convention with threshold 5."""
    if not (0 <= score <= PGSI_MAX):
        raise OutOfRange(f"score {score} outside 0..{PGSI_MAX}")
    if not (1 <= threshold <= PGSI_MAX):
        raise OutOfRange(f"threshold {threshold} outside 1..{PGSI_MAX}")
    return 1 if score >= threshold else 0


def pgsi_to_bucket(score: int, buckets=DEFAULT_BUCKETS) -> str:
    if not (0 <= score <= PGSI_MAX):
        raise OutOfRange(f"score {score} outside 0..{PGSI_MAX}")
    for label in buckets:
        lo, hi = _parse_bucket(label)
        if lo <= score <= hi:
            return label
    raise TaskError(f"buckets {buckets} do not cover score {score}")


@dataclass(frozen=True)
class LabelRule:
    source: str
    kind: str  # BINARY | MULTICLASS
    binary_threshold: int = 5
    buckets: tuple = DEFAULT_BUCKETS
    min_tenure_days: int = 0

    def validate(self) -> None:
        if self.source not in LABEL_RULE_SOURCES:
            raise TaskError(f"label source must be one of {LABEL_RULE_SOURCES}")
        if self.kind not in ("BINARY", "MULTICLASS"):
            raise TaskError("label rule kind must be BINARY or MULTICLASS")
        if not (1 <= self.binary_threshold <= PGSI_MAX):
            raise OutOfRange("binary_threshold must be in 1..27")
        validate_buckets(self.buckets)
        if self.min_tenure_days < 0:
            raise TaskError("min_tenure_days must be >= 0")

    def classes(self) -> list:
        if self.kind == "BINARY":
            return ["0", "1"]
        return list(self.buckets)

    def target_for(self, label) -> str:
        """Derive the task target from a stored PlayerLabel; the reproducible
        step sequence participants can re-run on public train labels."""
        if self.source == "PGSI":
            if label.pgsi_score is None:
                raise LabelSourceMissing(f"player {label.player_id} has no pgsi_score")
            if self.kind == "BINARY":
                return str(pgsi_to_binary(label.pgsi_score, self.binary_threshold))
            return pgsi_to_bucket(label.pgsi_score, self.buckets)
        if self.source == "VSE":
            if label.vse_flag is None:
                raise LabelSourceMissing(f"player {label.player_id} has no vse_flag")
            if self.kind != "BINARY":
                raise TaskError("VSE label source only supports BINARY tasks")
            return str(int(label.vse_flag))
        # Behavioral-threshold targets are a documented extension point; no
        # shipped dataset carries them.
        raise LabelSourceMissing("BEHAVIORAL_THRESHOLD label sources are not available in shipped datasets")

    @classmethod
    def from_dict(cls, doc: dict) -> "LabelRule":
        return cls(
            source=doc["source"],
            kind=doc["kind"],
            binary_threshold=int(doc.get("binary_threshold", 5)),
            buckets=tuple(doc.get("buckets", DEFAULT_BUCKETS)),
            min_tenure_days=int(doc.get("min_tenure_days", 0)),
        )

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "kind": self.kind,
            "binary_threshold": self.binary_threshold,
            "buckets": list(self.buckets),
            "min_tenure_days": self.min_tenure_days,
        }


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float
    salt: str
    method: str = "PLAYER_HASH"

    def __post_init__(self):
        if self.method != "PLAYER_HASH":
            raise TaskError(f"unknown split method {self.method!r}")
        if not (0.0 < self.train_fraction < 1.0):
            raise TaskError("train_fraction must be strictly inside (0, 1)")

    @classmethod
    def from_dict(cls, doc: dict) -> "SplitSpec":
        return cls(
            train_fraction=float(doc["train_fraction"]),
            salt=str(doc["salt"]),
            method=doc.get("method", "PLAYER_HASH"),
        )

    def to_dict(self) -> dict:
        return {"method": self.method, "train_fraction": self.train_fraction, "salt": self.salt}


def _hash_unit(salt: str, player_id: str) -> float:
    digest = hashlib.sha256(f"{salt}\x1f{player_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") / 2**64


def split_players(player_ids, spec: SplitSpec) -> tuple:
    """Deterministic hash split; assignment depends only on (player_id, salt),
    so input order and dataset growth cannot move existing players."""
    ids = list(player_ids)
    if len(set(ids)) != len(ids):
        raise TaskError("player ids must be unique")
    train, test = set(), set()
    for pid in ids:
        (train if _hash_unit(spec.salt, pid) < spec.train_fraction else test).add(pid)
    return train, test


@dataclass(frozen=True)
class TaskSpec:
    task_id: str
    dataset: str  # 'dataset-id@version' (version may be omitted -> latest)
    label_rule: LabelRule
    observation_window_days: int
    label_horizon: dict  # {"text": ..., "days": ...}
    split: SplitSpec
    primary_metric: str
    cohort_field: Optional[str] = None

    def validate(self) -> None:
        if not self.task_id:
            raise TaskError("task_id must be non-empty")
        self.label_rule.validate()
        if self.observation_window_days < 1:
            raise TaskError("observation_window_days must be >= 1")
        if self.primary_metric not in PRIMARY_METRICS:
            raise TaskError(f"primary_metric must be one of {PRIMARY_METRICS}")
        if self.label_rule.kind == "BINARY" and self.primary_metric == "MACRO_F1":
            raise TaskError("MACRO_F1 is a multiclass metric")
        if self.label_rule.kind == "MULTICLASS" and self.primary_metric != "MACRO_F1":
            raise TaskError("multiclass tasks rank by MACRO_F1")
        if self.cohort_field not in (None, "cohort"):
            raise TaskError("cohort_field must be 'cohort' when set")

    @classmethod
    def from_dict(cls, doc: dict) -> "TaskSpec":
        return cls(
            task_id=doc["task_id"],
            dataset=doc["dataset"],
            label_rule=LabelRule.from_dict(doc["label_rule"]),
            observation_window_days=int(doc["observation_window_days"]),
            label_horizon=dict(doc["label_horizon"]),
            split=SplitSpec.from_dict(doc["split"]),
            primary_metric=doc["primary_metric"],
            cohort_field=doc.get("cohort_field"),
        )

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "dataset": self.dataset,
            "label_rule": self.label_rule.to_dict(),
            "observation_window_days": self.observation_window_days,
            "label_horizon": dict(self.label_horizon),
            "split": self.split.to_dict(),
            "primary_metric": self.primary_metric,
            "cohort_field": self.cohort_field,
        }


@dataclass
class TaskBundle:
    task_id: str
    directory: Path
    card: dict = field(default_factory=dict)

    PUBLIC_FILES = ("train_events.csv", "train_labels.csv", "test_events.csv", "task_card.json")

    @classmethod
    def load(cls, directory: Path) -> "TaskBundle":
        import json

        directory = Path(directory)
        card_path = directory / "task_card.json"
        if not card_path.exists():
            raise TaskError(f"{directory} is not a task bundle (no task_card.json)")
        card = json.loads(card_path.read_text("utf-8"))
        return cls(task_id=card["task_id"], directory=directory, card=card)

    @property
    def key_path(self) -> Path:
        return self.directory / "private" / "answer_key.csv"

    def public_paths(self) -> list:
        return [self.directory / name for name in self.PUBLIC_FILES]

    def answer_key(self) -> tuple:
        """(targets, cohorts): player_id -> target string, and player_id ->
        cohort when the task was materialized with a cohort field."""
        text = self.key_path.read_text("utf-8")
        reader = csv.reader(io.StringIO(text, newline=""))
        header = next(reader)
        has_cohort = header == ["player_id", "target", "cohort"]
        targets, cohorts = {}, {}
        for row in reader:
            if not row:
                continue
            targets[row[0]] = row[1]
            if has_cohort:
                cohorts[row[0]] = row[2]
        return targets, (cohorts if has_cohort else None)


def _window_filter(events: list, window_days: int) -> list:
    """Keep each player's events strictly inside window_days of their first
    event; events arrive sorted by (player_id, start_time)."""
    out = []
    first: dict = {}
    limit = window_days * 86_400
    for e in events:
        anchor = first.setdefault(e.player_id, e.start_time)
        if (e.start_time - anchor).total_seconds() < limit:
            out.append(e)
    return out


def default_bundle_root(home: Optional[Path] = None) -> Path:
    return (Path(home) if home else riskbench_home()) / "bundles"


def materialize(spec: TaskSpec, registry: Registry, out_root: Optional[Path] = None) -> TaskBundle:
    """Build a TaskBundle from a registered dataset.

    Test-set invariants enforced here: train and test players are disjoint,
    every test player has at least one event inside the observation window,
    and no target for a test player is written outside private/.
    """
    from .synthgen import LABEL_COLUMNS, parse_labels

    spec.validate()
    dataset_id, version = registry.resolve(spec.dataset)
    card = registry.get_card(dataset_id, version)
    horizon_days = int(card.dimensions["time_horizon"]["days"])
    if spec.observation_window_days > horizon_days:
        raise WindowExceedsHorizon(
            f"window of {spec.observation_window_days}d exceeds the dataset horizon of {horizon_days}d"
        )

    data_dir = registry.dataset_dir(dataset_id, version)
    events = parse_events((data_dir / "events.csv").read_bytes()).records
    labels = parse_labels((data_dir / "labels.csv").read_bytes())
    by_player = {lab.player_id: lab for lab in labels}

    active = sorted({e.player_id for e in events})
    if spec.label_rule.source == "VSE" and spec.label_rule.min_tenure_days > 0:
        first, last = {}, {}
        for e in events:
            first.setdefault(e.player_id, e.start_time)
            last[e.player_id] = max(last.get(e.player_id, e.start_time), e.start_time)
        min_seconds = spec.label_rule.min_tenure_days * 86_400
        active = [p for p in active if (last[p] - first[p]).total_seconds() >= min_seconds]

    targets = {pid: spec.label_rule.target_for(by_player[pid]) for pid in active}

    train_ids, test_ids = split_players(active, spec.split)
    if not test_ids:
        raise EmptyTestSet("the player split produced no test players")
    if not train_ids:
        raise EmptyTestSet("the player split produced no train players")

    windowed = _window_filter(events, spec.observation_window_days)
    train_events = [e for e in windowed if e.player_id in train_ids]
    test_events = [e for e in windowed if e.player_id in test_ids]

    task_card = {
        "task_id": spec.task_id,
        "dataset": f"{dataset_id}@{version}",
        "kind": spec.label_rule.kind,
        "window_days": spec.observation_window_days,
        "horizon": dict(spec.label_horizon),
        "primary_metric": spec.primary_metric,
        "classes": spec.label_rule.classes(),
    }

    root = Path(out_root) if out_root else default_bundle_root()
    root.mkdir(parents=True, exist_ok=True)
    final_dir = root / spec.task_id
    tmp_dir = Path(tempfile.mkdtemp(dir=root, prefix=f".tmp-{spec.task_id}-"))
    try:
        (tmp_dir / "train_events.csv").write_bytes(serialize_events(train_events))
        (tmp_dir / "test_events.csv").write_bytes(serialize_events(test_events))

        buf = io.StringIO(newline="")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(LABEL_COLUMNS + ["target"])
        for pid in sorted(train_ids):
            lab = by_player[pid]
            writer.writerow([
                lab.player_id,
                "" if lab.pgsi_score is None else lab.pgsi_score,
                "" if lab.vse_flag is None else lab.vse_flag,
                lab.risk_flag,
                lab.label_source,
                lab.cohort,
                targets[pid],
            ])
        (tmp_dir / "train_labels.csv").write_text(buf.getvalue(), "utf-8")

        (tmp_dir / "task_card.json").write_text(dump_json(task_card), "utf-8")

        private = tmp_dir / "private"
        private.mkdir()
        buf = io.StringIO(newline="")
        writer = csv.writer(buf, lineterminator="\n")
        if spec.cohort_field:
            writer.writerow(["player_id", "target", "cohort"])
            for pid in sorted(test_ids):
                writer.writerow([pid, targets[pid], by_player[pid].cohort])
        else:
            writer.writerow(["player_id", "target"])
            for pid in sorted(test_ids):
                writer.writerow([pid, targets[pid]])
        (private / "answer_key.csv").write_text(buf.getvalue(), "utf-8")

        if final_dir.exists():
            shutil.rmtree(final_dir)
        tmp_dir.rename(final_dir)
    except BaseException:
        shutil.rmtree(tmp_dir, ignore_errors=True)
        raise

    return TaskBundle(task_id=spec.task_id, directory=final_dir, card=task_card)


def audit_bundle(bundle: TaskBundle) -> list:
    """Mechanical leakage scan over a bundle's public files.

    Returns a list of findings (empty = clean): a test player's answer-key
    pair appearing in any public file, or any test player id occurring in the
    train files.
    """
    findings = []
    targets, _ = bundle.answer_key()
    public = {path.name: path.read_text("utf-8") for path in bundle.public_paths()}

    test_events = public["test_events.csv"]
    test_players = {pid for pid in targets}
    for pid, target in sorted(targets.items()):
        pair = f"{pid},{target}"
        for name, text in public.items():
            if pair in text:
                findings.append(f"answer pair {pair!r} appears in {name}")
    for name in ("train_events.csv", "train_labels.csv"):
        text = public[name]
        for pid in sorted(test_players):
            if pid in text:
                findings.append(f"test player {pid} appears in {name}")
    # Sanity: every test player must actually appear in the public test events.
    for pid in sorted(test_players):
        if pid not in test_events:
            findings.append(f"test player {pid} has no public test events")
    return findings
