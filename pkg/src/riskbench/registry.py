"""Dataset registry: metadata cards, content-addressed versioned storage,
integrity verification.

Layout under RISKBENCH_HOME:
    datasets/<id>/<version>/{events.csv,labels.csv,card.json,manifest.json}
    index.json

Writers serialize through a lock on the index; publication is rename-based so
readers never observe partial datasets, and a crash mid-register leaves at
worst an unlisted temp directory, never a listed-but-incomplete entry.
"""

from __future__ import annotations

import re
import shutil
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from filelock import FileLock

from .canonical import RiskbenchError, parse_events
from .util import atomic_write_text, dump_json, riskbench_home, sha256_file, slugify

STORED_FILES = ("events.csv", "labels.csv", "card.json", "manifest.json")

VERSION_RE = re.compile(r"^v(\d+)$")

CARD_FIELDS = (
    "dataset_name",
    "description",
    "dimensions",
    "benchmark_tasks",
    "target_variable",
    "size",
    "data_fields",
    "data_dictionary_ref",
    "creator",
    "citation",
    "version",
    "timestamp",
)


class RegistryError(RiskbenchError):
    code = "RegistryError"


class CardMismatch(RegistryError):
    code = "CardMismatch"


class DuplicateVersion(RegistryError):
    code = "DuplicateVersion"


class ValidationFailed(RegistryError):
    code = "ValidationFailed"


class UnknownDataset(RegistryError):
    code = "UnknownDataset"


@dataclass
class DatasetCard:
    """Metadata card stored verbatim alongside every dataset version."""

    dataset_name: str
    description: str
    dimensions: dict
    benchmark_tasks: list
    target_variable: dict
    size: int
    data_fields: list
    data_dictionary_ref: str
    creator: str
    citation: str
    version: str
    timestamp: str

    @classmethod
    def from_dict(cls, doc: dict) -> "DatasetCard":
        missing = [f for f in CARD_FIELDS if f not in doc]
        if missing:
            raise ValidationFailed(f"card lacks fields {missing}", details=missing)
        return cls(**{f: doc[f] for f in CARD_FIELDS})

    def to_dict(self) -> dict:
        return {f: getattr(self, f) for f in CARD_FIELDS}

    def problems(self) -> list:
        """Every card field must be present and non-empty; size must be a
        non-negative integer."""
        issues = []
        for f in CARD_FIELDS:
            value = getattr(self, f)
            if f == "size":
                if not isinstance(value, int) or value < 0:
                    issues.append("size must be a non-negative integer")
            elif f == "benchmark_tasks":
                if not isinstance(value, list):
                    issues.append("benchmark_tasks must be a list")
            elif value in ("", None, {}, []):
                issues.append(f"{f} must be non-empty")
        if not VERSION_RE.match(self.version or ""):
            issues.append("version must look like v1, v2, ...")
        return issues


@dataclass
class IntegrityReport:
    dataset_id: str
    version: str
    mismatches: list = field(default_factory=list)
    checked: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.mismatches

    def to_dict(self) -> dict:
        return {
            "dataset_id": self.dataset_id,
            "version": self.version,
            "passed": self.passed,
            "mismatches": self.mismatches,
            "checked": self.checked,
        }


def version_number(version: str) -> int:
    m = VERSION_RE.match(version)
    if not m:
        raise RegistryError(f"bad version string {version!r}")
    return int(m.group(1))


def parse_dataset_ref(ref: str) -> tuple:
    """Split 'dataset-id@v2' into (id, version); version may be omitted."""
    if "@" in ref:
        dataset_id, version = ref.split("@", 1)
        return dataset_id, version
    return ref, None


class Registry:
    def __init__(self, home: Optional[Path] = None):
        self.home = Path(home) if home else riskbench_home()
        self.datasets_dir = self.home / "datasets"
        self.index_path = self.home / "index.json"

    def _lock(self) -> FileLock:
        self.home.mkdir(parents=True, exist_ok=True)
        return FileLock(str(self.home / "index.json.lock"))

    def _read_index(self) -> dict:
        if not self.index_path.exists():
            return {"datasets": {}}
        import json

        return json.loads(self.index_path.read_text("utf-8"))

    def _write_index(self, index: dict) -> None:
        atomic_write_text(self.index_path, dump_json(index))

    # -- write path ----------------------------------------------------

    def register(
        self,
        events_file: Path,
        labels_file: Path,
        card: DatasetCard,
        manifest: Optional[dict] = None,
    ) -> str:
        """Validate, store content-addressed copies, and list the dataset.

        Returns '<dataset-id>@<version>'.
        """
        from .synthgen import parse_labels

        events_file, labels_file = Path(events_file), Path(labels_file)
        issues = card.problems()
        if issues:
            raise ValidationFailed("card failed quality review: " + "; ".join(issues), details=issues)

        result = parse_events(events_file.read_bytes())
        if not result.ok:
            raise ValidationFailed(
                f"events file has {len(result.errors)} invalid rows",
                details=[vars(e) for e in result.errors[:20]],
            )
        try:
            labels = parse_labels(labels_file.read_bytes())
        except (ValueError, IndexError) as exc:
            raise ValidationFailed(f"labels file unreadable: {exc}")
        labeled = {lab.player_id for lab in labels}
        unlabeled = sorted({r.player_id for r in result.records} - labeled)
        if unlabeled:
            raise ValidationFailed(
                f"{len(unlabeled)} players appear in events but not labels",
                details=unlabeled[:20],
            )
        if any(lab.risk_flag not in (0, 1) for lab in labels):
            raise ValidationFailed("risk_flag must be 0 or 1 for every label")

        if card.size != len(result.records):
            raise CardMismatch(
                f"card.size={card.size} but events file has {len(result.records)} rows"
            )

        dataset_id = slugify(card.dataset_name)
        version = card.version
        new_number = version_number(version)

        with self._lock():
            index = self._read_index()
            entries = index["datasets"].get(dataset_id, [])
            numbers = [version_number(e["version"]) for e in entries]
            if new_number in numbers:
                raise DuplicateVersion(f"{dataset_id}@{version} is already registered and immutable")
            if numbers and new_number < max(numbers):
                raise RegistryError(
                    f"version {version} is older than the latest registered v{max(numbers)}"
                )

            final_dir = self.datasets_dir / dataset_id / version
            if final_dir.exists():
                # Leftover from a crash before the index update: safe to replace.
                shutil.rmtree(final_dir)
            final_dir.parent.mkdir(parents=True, exist_ok=True)
            tmp_dir = Path(tempfile.mkdtemp(dir=final_dir.parent, prefix=f".tmp-{version}-"))
            try:
                shutil.copyfile(events_file, tmp_dir / "events.csv")
                shutil.copyfile(labels_file, tmp_dir / "labels.csv")
                atomic_write_text(tmp_dir / "card.json", dump_json(card.to_dict()))
                atomic_write_text(
                    tmp_dir / "manifest.json",
                    dump_json(manifest if manifest is not None else {"note": "registered without a generation manifest"}),
                )
                checksums = {name: sha256_file(tmp_dir / name) for name in STORED_FILES}
                tmp_dir.rename(final_dir)
            except BaseException:
                shutil.rmtree(tmp_dir, ignore_errors=True)
                raise

            entries.append({"version": version, "checksums": checksums, "card": card.to_dict()})
            index["datasets"][dataset_id] = entries
            self._write_index(index)
        return f"{dataset_id}@{version}"

    # -- read path -----------------------------------------------------

    def list(self, vertical: Optional[str] = None, name_contains: Optional[str] = None) -> list:
        """All registered (id, version, card) entries, name ascending then
        version descending."""
        index = self._read_index()
        out = []
        for dataset_id in sorted(index["datasets"]):
            entries = sorted(
                index["datasets"][dataset_id],
                key=lambda e: version_number(e["version"]),
                reverse=True,
            )
            for entry in entries:
                card = entry["card"]
                if vertical is not None:
                    card_vertical = str(card.get("dimensions", {}).get("vertical", ""))
                    if card_vertical.casefold() != vertical.casefold():
                        continue
                if name_contains is not None and name_contains.casefold() not in card["dataset_name"].casefold():
                    continue
                out.append({"id": dataset_id, "version": entry["version"], "card": card})
        return out

    def _entry(self, dataset_id: str, version: Optional[str]) -> dict:
        index = self._read_index()
        entries = index["datasets"].get(dataset_id)
        if not entries:
            raise UnknownDataset(f"no dataset registered under id {dataset_id!r}")
        if version is None:
            return max(entries, key=lambda e: version_number(e["version"]))
        for entry in entries:
            if entry["version"] == version:
                return entry
        raise UnknownDataset(f"{dataset_id} has no version {version}")

    def get_card(self, dataset_id: str, version: Optional[str] = None) -> DatasetCard:
        return DatasetCard.from_dict(self._entry(dataset_id, version)["card"])

    def dataset_dir(self, dataset_id: str, version: str) -> Path:
        path = self.datasets_dir / dataset_id / version
        if not path.is_dir():
            raise UnknownDataset(f"{dataset_id}@{version} has no stored files")
        return path

    def resolve(self, ref: str) -> tuple:
        """'id' or 'id@version' -> (id, version) with the version pinned."""
        dataset_id, version = parse_dataset_ref(ref)
        entry = self._entry(dataset_id, version)
        return dataset_id, entry["version"]

    def verify(self, dataset_id: str, version: Optional[str] = None) -> IntegrityReport:
        """Recompute stored-file checksums against the index."""
        entry = self._entry(dataset_id, version)
        version = entry["version"]
        report = IntegrityReport(dataset_id=dataset_id, version=version)
        directory = self.datasets_dir / dataset_id / version
        for name in STORED_FILES:
            expected = entry["checksums"].get(name)
            path = directory / name
            report.checked.append(name)
            if not path.exists():
                report.mismatches.append({"file": name, "problem": "missing"})
                continue
            actual = sha256_file(path)
            if actual != expected:
                report.mismatches.append(
                    {"file": name, "problem": "checksum mismatch", "expected": expected, "actual": actual}
                )
        return report
