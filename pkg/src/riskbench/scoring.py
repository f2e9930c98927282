"""Submission validation and the prevalence-aware metric suite.

Counting is exact-integer throughout; metrics become ratios only at the end.
Any 0/0 metric is UNDEFINED (serialized as the string "UNDEFINED"), never
zero by fiat: an all-negative submission must show an undefined precision,
not a flattering one. Every report carries prevalence and the no-information
rate; construction fails without them, so a bare accuracy number can never
travel alone.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional

from .canonical import RiskbenchError
from .tasks import TaskBundle
from .util import sha256_bytes, utc_now_iso

DEFAULT_THRESHOLD = 0.5

UNDEFINED = "UNDEFINED"


class SubmissionError(RiskbenchError):
    code = "ValidationFailed"


class MissingPlayers(SubmissionError):
    code = "MissingPlayers"


class UnknownPlayers(SubmissionError):
    code = "UnknownPlayers"


class DuplicatePlayer(SubmissionError):
    code = "DuplicatePlayer"


class BadValue(SubmissionError):
    code = "BadValue"


class SingleClassKey(RiskbenchError):
    code = "SingleClassKey"


@dataclass
class PredictionSet:
    """Validated predictions: exactly one row per test player."""

    kind: str  # BINARY | MULTICLASS
    values: dict  # player_id -> float (binary) or class label (multiclass)
    raw_sha256: str = ""


@dataclass
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


def _ratio(num: int, den: int) -> Optional[float]:
    return None if den == 0 else num / den


def parse_submission(data: bytes, kind: str, classes: list) -> dict:
    """Parse and range-check a submission CSV; raises BadValue/DuplicatePlayer."""
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        raise BadValue("submission is not UTF-8")
    reader = csv.reader(io.StringIO(text, newline=""))
    header = next(reader, None)
    expected = ["player_id", "score"] if kind == "BINARY" else ["player_id", "class"]
    if header != expected:
        raise BadValue(f"submission header must be {','.join(expected)}")
    values: dict = {}
    bad: list = []
    dupes: list = []
    for i, row in enumerate(reader):
        if not row:
            continue
        if len(row) != 2:
            bad.append({"row": i, "problem": f"expected 2 columns, got {len(row)}"})
            continue
        pid, value = row
        if pid in values:
            dupes.append(pid)
            continue
        if kind == "BINARY":
            try:
                score = float(value)
            except ValueError:
                bad.append({"row": i, "problem": f"unparseable score {value!r}"})
                continue
            if not math.isfinite(score) or not (0.0 <= score <= 1.0):
                bad.append({"row": i, "problem": f"score {value!r} outside [0, 1]"})
                continue
            values[pid] = score
        else:
            if value not in classes:
                bad.append({"row": i, "problem": f"unknown class {value!r}"})
                continue
            values[pid] = value
    if bad:
        raise BadValue(f"{len(bad)} rows have bad values", details=bad[:20])
    if dupes:
        raise DuplicatePlayer(f"duplicate rows for {len(dupes)} players", details=sorted(set(dupes))[:20])
    return values


def validate_submission(data: bytes, bundle: TaskBundle) -> PredictionSet:
    """Accept a submission iff it covers exactly the task's test players with
    in-range values."""
    kind = bundle.card["kind"]
    classes = bundle.card["classes"]
    values = parse_submission(data, kind, classes)
    targets, _ = bundle.answer_key()
    unknown = sorted(set(values) - set(targets))
    if unknown:
        raise UnknownPlayers(f"{len(unknown)} players are not in the test set", details=unknown[:20])
    missing = sorted(set(targets) - set(values))
    if missing:
        raise MissingPlayers(f"{len(missing)} test players are missing", details=missing[:20])
    return PredictionSet(kind=kind, values=values, raw_sha256=sha256_bytes(data))


def binary_confusion(values: dict, key: dict, threshold: float) -> ConfusionMatrix:
    cm = ConfusionMatrix()
    for pid, target in key.items():
        predicted = 1 if values[pid] >= threshold else 0
        actual = int(target)
        if predicted == 1 and actual == 1:
            cm.tp += 1
        elif predicted == 1 and actual == 0:
            cm.fp += 1
        elif predicted == 0 and actual == 0:
            cm.tn += 1
        else:
            cm.fn += 1
    return cm


def binary_metrics(values: dict, key: dict, threshold: float = DEFAULT_THRESHOLD) -> tuple:
    """(ConfusionMatrix, metric dict); 0/0 cases are None, not 0."""
    cm = binary_confusion(values, key, threshold)
    sensitivity = _ratio(cm.tp, cm.tp + cm.fn)
    specificity = _ratio(cm.tn, cm.tn + cm.fp)
    precision = _ratio(cm.tp, cm.tp + cm.fp)
    accuracy = _ratio(cm.tp + cm.tn, cm.total)
    if precision is None or sensitivity is None or (precision + sensitivity) == 0:
        f1 = None
    else:
        f1 = 2 * precision * sensitivity / (precision + sensitivity)
    return cm, {
        "accuracy": accuracy,
        "sensitivity": sensitivity,
        "specificity": specificity,
        "precision": precision,
        "f1": f1,
    }


def roc_auc(values: dict, key: dict) -> float:
    """Mann-Whitney statistic normalized by positives x negatives, ties 0.5.

    Computed by tie-group counting with an integer numerator, so it equals
    pair enumeration exactly.
    """
    pairs = sorted((values[pid], int(target)) for pid, target in key.items())
    n_pos = sum(t for _, t in pairs)
    n_neg = len(pairs) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClassKey("AUC needs both classes in the answer key")
    numerator2 = 0  # doubled to keep half-credit ties integral
    neg_below = 0
    i = 0
    while i < len(pairs):
        j = i
        while j + 1 < len(pairs) and pairs[j + 1][0] == pairs[i][0]:
            j += 1
        group_pos = sum(t for _, t in pairs[i : j + 1])
        group_neg = (j + 1 - i) - group_pos
        numerator2 += group_pos * (2 * neg_below + group_neg)
        neg_below += group_neg
        i = j + 1
    return numerator2 / (2 * n_pos * n_neg)


def no_information_rate(targets) -> float:
    """Accuracy of always predicting the majority class."""
    targets = list(targets)
    if not targets:
        raise RiskbenchError("no_information_rate needs a non-empty key")
    counts: dict = {}
    for t in targets:
        counts[t] = counts.get(t, 0) + 1
    return max(counts.values()) / len(targets)


def multiclass_metrics(values: dict, key: dict, classes: list) -> tuple:
    """(confusion rows, metric dict) for class-label submissions."""
    index = {c: i for i, c in enumerate(classes)}
    k = len(classes)
    matrix = [[0] * k for _ in range(k)]
    for pid, target in key.items():
        matrix[index[target]][index[values[pid]]] += 1
    total = sum(sum(row) for row in matrix)
    recalls: dict = {}
    f1s: list = []
    for c in classes:
        i = index[c]
        tp = matrix[i][i]
        actual = sum(matrix[i])
        predicted = sum(matrix[r][i] for r in range(k))
        recall = _ratio(tp, actual)
        prec = _ratio(tp, predicted)
        recalls[c] = recall
        if prec is None or recall is None or (prec + recall) == 0:
            f1s.append(None)
        else:
            f1s.append(2 * prec * recall / (prec + recall))
    macro_f1 = None
    if f1s and all(f is not None for f in f1s):
        macro_f1 = sum(f1s) / len(f1s)
    accuracy = _ratio(sum(matrix[i][i] for i in range(k)), total)
    confusion = {"classes": list(classes), "matrix": matrix}
    return confusion, {"accuracy": accuracy, "macro_f1": macro_f1, "per_class_recall": recalls}


def _serialize_metric(value):
    if value is None:
        return UNDEFINED
    if isinstance(value, dict):
        return {k: _serialize_metric(v) for k, v in value.items()}
    return value


@dataclass
class ScoreReport:
    """Full scoring context for one submission.

    Invalid by construction without its prevalence context: the report is the
    artifact that keeps accuracy claims honest.
    """

    task_id: str
    kind: str
    primary_metric_name: str
    primary_metric_value: Optional[float]
    n_test: int
    prevalence: object  # float (binary) or {class: freq} (multiclass)
    no_information_rate: float
    all_negative_accuracy: float
    threshold: Optional[float]
    metrics: dict
    confusion: dict
    per_cohort: Optional[dict]
    submission_sha256: str
    scored_at: str

    def __post_init__(self):
        if self.prevalence is None or self.no_information_rate is None:
            raise RiskbenchError("a ScoreReport without prevalence context is invalid")

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "kind": self.kind,
            "primary_metric": {
                "name": self.primary_metric_name,
                "value": _serialize_metric(self.primary_metric_value),
            },
            "n_test": self.n_test,
            "prevalence": self.prevalence,
            "no_information_rate": self.no_information_rate,
            "all_negative_accuracy": self.all_negative_accuracy,
            "threshold": self.threshold,
            "metrics": _serialize_metric(self.metrics),
            "confusion": self.confusion,
            "per_cohort": _serialize_metric(self.per_cohort),
            "submission_sha256": self.submission_sha256,
            "scored_at": self.scored_at,
        }


def _binary_block(values: dict, key: dict, threshold: float) -> tuple:
    cm, metrics = binary_metrics(values, key, threshold)
    try:
        auc = roc_auc(values, key)
    except SingleClassKey:
        auc = None
    metrics = dict(metrics)
    metrics["auc"] = auc
    positives = sum(int(t) for t in key.values())
    prevalence = positives / len(key)
    return cm.to_dict(), metrics, prevalence


def score(
    preds: PredictionSet,
    bundle: TaskBundle,
    threshold: float = DEFAULT_THRESHOLD,
    scored_at: Optional[str] = None,
) -> ScoreReport:
    """Score validated predictions against the bundle's hidden key."""
    targets, cohorts = bundle.answer_key()
    kind = bundle.card["kind"]
    classes = bundle.card["classes"]
    primary = bundle.card["primary_metric"]
    nir = no_information_rate(targets.values())
    all_negative = sum(1 for t in targets.values() if t == classes[0]) / len(targets)

    per_cohort = None
    if kind == "BINARY":
        confusion, metrics, prevalence = _binary_block(preds.values, targets, threshold)
        if cohorts is not None:
            per_cohort = {}
            for tag in sorted(set(cohorts.values())):
                sub_key = {p: t for p, t in targets.items() if cohorts[p] == tag}
                sub_cm, sub_metrics, sub_prev = _binary_block(preds.values, sub_key, threshold)
                per_cohort[tag] = {
                    "n": len(sub_key),
                    "prevalence": sub_prev,
                    "confusion": sub_cm,
                    "metrics": sub_metrics,
                }
        primary_value = metrics["auc"] if primary == "AUC" else metrics["f1"]
        report_threshold = threshold
    else:
        confusion, metrics, prevalence = None, None, None
        confusion, metrics = multiclass_metrics(preds.values, targets, classes)
        prevalence = {
            c: sum(1 for t in targets.values() if t == c) / len(targets) for c in classes
        }
        if cohorts is not None:
            per_cohort = {}
            for tag in sorted(set(cohorts.values())):
                sub_key = {p: t for p, t in targets.items() if cohorts[p] == tag}
                sub_conf, sub_metrics = multiclass_metrics(preds.values, sub_key, classes)
                per_cohort[tag] = {"n": len(sub_key), "confusion": sub_conf, "metrics": sub_metrics}
        primary_value = metrics["macro_f1"]
        report_threshold = None

    return ScoreReport(
        task_id=bundle.task_id,
        kind=kind,
        primary_metric_name=primary,
        primary_metric_value=primary_value,
        n_test=len(targets),
        prevalence=prevalence,
        no_information_rate=nir,
        all_negative_accuracy=all_negative,
        threshold=report_threshold,
        metrics=metrics,
        confusion=confusion,
        per_cohort=per_cohort,
        submission_sha256=preds.raw_sha256,
        scored_at=scored_at or utc_now_iso(),
    )
