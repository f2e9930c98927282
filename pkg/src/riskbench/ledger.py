"""Append-only submission ledger, badge assignment, and leaderboard ranking.

One JSON-lines file per task under RISKBENCH_HOME/submissions/. Records are
immutable once appended; rankings are recomputed from the ledger on every
read, so the ledger is the single source of truth. A torn final line (crash
mid-append) is ignored on read, which makes a submission either fully
recorded or absent.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from filelock import FileLock

from .canonical import RiskbenchError
from .scoring import PredictionSet, score, validate_submission
from .tasks import TaskBundle, default_bundle_root
from .util import riskbench_home, utc_now_iso

BADGES = ("BRONZE", "SILVER", "GOLD")


class UnknownTask(RiskbenchError):
    code = "UnknownTask"


class UnknownSubmission(RiskbenchError):
    code = "UnknownSubmission"


class StorageFailure(RiskbenchError):
    code = "StorageFailure"


@dataclass(frozen=True)
class Evidence:
    """Declared (not executed) validation evidence accompanying a submission."""

    code_url: Optional[str] = None
    publication_ref: Optional[str] = None
    container_digest: Optional[str] = None

    @classmethod
    def from_dict(cls, doc: Optional[dict]) -> "Evidence":
        doc = doc or {}
        return cls(
            code_url=doc.get("code_url") or None,
            publication_ref=doc.get("publication_ref") or None,
            container_digest=doc.get("container_digest") or None,
        )

    def to_dict(self) -> dict:
        return {
            k: v
            for k, v in {
                "code_url": self.code_url,
                "publication_ref": self.publication_ref,
                "container_digest": self.container_digest,
            }.items()
            if v is not None
        }


def assign_badge(evidence: Evidence) -> str:
    """Bronze for prediction-only, silver for a declared container, gold for
    declared code plus publication. Gold takes precedence when both apply."""
    if evidence.code_url and evidence.publication_ref:
        return "GOLD"
    if evidence.container_digest:
        return "SILVER"
    return "BRONZE"


@dataclass
class SubmissionRecord:
    submission_id: str
    task_id: str
    submitter: str
    received_at: str
    checksum: str
    evidence: Evidence
    badge: str
    report: dict
    duplicate_of: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "submission_id": self.submission_id,
            "task_id": self.task_id,
            "submitter": self.submitter,
            "received_at": self.received_at,
            "checksum": self.checksum,
            "evidence": self.evidence.to_dict(),
            "badge": self.badge,
            "duplicate_of": self.duplicate_of,
            "report": self.report,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SubmissionRecord":
        return cls(
            submission_id=doc["submission_id"],
            task_id=doc["task_id"],
            submitter=doc["submitter"],
            received_at=doc["received_at"],
            checksum=doc["checksum"],
            evidence=Evidence.from_dict(doc.get("evidence")),
            badge=doc["badge"],
            report=doc["report"],
            duplicate_of=doc.get("duplicate_of"),
        )


@dataclass
class LeaderboardEntry:
    rank: int
    submitter: str
    value: Optional[float]
    badge: str
    submission_id: str
    received_at: str

    def to_dict(self) -> dict:
        return {
            "rank": self.rank,
            "submitter": self.submitter,
            "primary_metric_value": self.value if self.value is not None else "UNDEFINED",
            "badge": self.badge,
            "submission_id": self.submission_id,
            "received_at": self.received_at,
        }


def _metric_value(report: dict) -> Optional[float]:
    value = report.get("primary_metric", {}).get("value")
    return value if isinstance(value, (int, float)) else None


class Ledger:
    def __init__(self, home: Optional[Path] = None):
        self.home = Path(home) if home else riskbench_home()
        self.bundles_root = default_bundle_root(self.home)
        self.submissions_dir = self.home / "submissions"

    # -- tasks ----------------------------------------------------------

    def task_ids(self) -> list:
        if not self.bundles_root.is_dir():
            return []
        return sorted(
            p.name for p in self.bundles_root.iterdir()
            if p.is_dir() and (p / "task_card.json").exists()
        )

    def bundle(self, task_id: str) -> TaskBundle:
        path = self.bundles_root / task_id
        if not (path / "task_card.json").exists():
            raise UnknownTask(f"no materialized task {task_id!r}")
        return TaskBundle.load(path)

    def task_cards(self) -> list:
        return [self.bundle(task_id).card for task_id in self.task_ids()]

    # -- ledger I/O -------------------------------------------------------

    def _ledger_path(self, task_id: str) -> Path:
        return self.submissions_dir / f"{task_id}.jsonl"

    def submissions(self, task_id: str) -> list:
        path = self._ledger_path(task_id)
        if not path.exists():
            return []
        records = []
        for line in path.read_text("utf-8").splitlines():
            try:
                records.append(SubmissionRecord.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError):
                continue  # torn or foreign line: the submission never happened
        return records

    def find_submission(self, submission_id: str) -> SubmissionRecord:
        for task_id in self.task_ids():
            for record in self.submissions(task_id):
                if record.submission_id == submission_id:
                    return record
        raise UnknownSubmission(f"no submission {submission_id!r}")

    # -- write path -------------------------------------------------------

    def record_submission(
        self,
        task_id: str,
        submitter: str,
        prediction_bytes: bytes,
        evidence: Optional[Evidence] = None,
        now: Optional[str] = None,
    ) -> SubmissionRecord:
        """Validate, score, badge, and append one submission atomically.

        Scoring is stateless and runs before the per-task writer lock; only
        the id assignment and append are serialized.
        """
        bundle = self.bundle(task_id)
        preds: PredictionSet = validate_submission(prediction_bytes, bundle)
        evidence = evidence or Evidence()
        report = score(preds, bundle, scored_at=now).to_dict()

        self.submissions_dir.mkdir(parents=True, exist_ok=True)
        lock = FileLock(str(self._ledger_path(task_id)) + ".lock")
        with lock:
            existing = self.submissions(task_id)
            duplicate_of = next(
                (
                    r.submission_id
                    for r in existing
                    if r.checksum == preds.raw_sha256 and r.submitter == submitter
                ),
                None,
            )
            record = SubmissionRecord(
                submission_id=f"{task_id}-{len(existing) + 1:05d}-{preds.raw_sha256[:8]}",
                task_id=task_id,
                submitter=submitter,
                received_at=now or utc_now_iso(),
                checksum=preds.raw_sha256,
                evidence=evidence,
                badge=assign_badge(evidence),
                report=report,
                duplicate_of=duplicate_of,
            )
            line = json.dumps(record.to_dict(), sort_keys=True, ensure_ascii=False)
            try:
                with open(self._ledger_path(task_id), "a", encoding="utf-8") as f:
                    f.write(line + "\n")
                    f.flush()
                    os.fsync(f.fileno())
            except OSError as exc:
                raise StorageFailure(f"could not append to the submission ledger: {exc}")
        return record

    # -- ranking ----------------------------------------------------------

    def leaderboard(self, task_id: str) -> list:
        """Rank by primary metric descending; ties go to the earlier
        submission, then the smaller id. Undefined metrics sort last."""
        self.bundle(task_id)  # raises UnknownTask
        records = self.submissions(task_id)

        def sort_key(r: SubmissionRecord):
            value = _metric_value(r.report)
            return (value is None, -(value if value is not None else 0.0), r.received_at, r.submission_id)

        entries = []
        for rank, record in enumerate(sorted(records, key=sort_key), start=1):
            entries.append(
                LeaderboardEntry(
                    rank=rank,
                    submitter=record.submitter,
                    value=_metric_value(record.report),
                    badge=record.badge,
                    submission_id=record.submission_id,
                    received_at=record.received_at,
                )
            )
        return entries
