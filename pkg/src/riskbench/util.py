"""Shared plumbing: home directory resolution, hashing, atomic writes, slugs."""

from __future__ import annotations

import hashlib
import json
import os
import re
import sys
import tempfile
from datetime import datetime, timezone
from pathlib import Path

HOME_ENV = "RISKBENCH_HOME"

TIMESTAMP_FMT = "%Y-%m-%dT%H:%M:%SZ"


def riskbench_home() -> Path:
    """Registry/ledger root: $RISKBENCH_HOME, else the platform user-data dir."""
    env = os.environ.get(HOME_ENV)
    if env:
        return Path(env).expanduser()
    if sys.platform == "darwin":
        base = Path.home() / "Library" / "Application Support"
    elif os.name == "nt":
        base = Path(os.environ.get("APPDATA", Path.home()))
    else:
        base = Path(os.environ.get("XDG_DATA_HOME", Path.home() / ".local" / "share"))
    return base / "riskbench"


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def canonical_json(obj) -> str:
    """Stable serialization: sorted keys, no float repr surprises on round-trip."""
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def dump_json(obj, indent: int = 2) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, indent=indent) + "\n"


def atomic_write_bytes(path: Path, data: bytes) -> None:
    """Write via temp file + rename so readers never observe a partial file."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def slugify(name: str) -> str:
    """Lowercase, alphanumeric runs joined by single hyphens."""
    slug = re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-")
    if not slug:
        raise ValueError(f"name {name!r} has no slug-safe characters")
    return slug


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).strftime(TIMESTAMP_FMT)


def parse_utc(value: str) -> datetime:
    """Strict second-resolution UTC timestamp, trailing Z required.

    Hand-rolled instead of strptime: this sits on the per-row hot path and
    strptime is an order of magnitude slower.
    """
    if (
        len(value) != 20
        or value[4] != "-" or value[7] != "-"
        or value[10] != "T"
        or value[13] != ":" or value[16] != ":"
        or value[19] != "Z"
        or not (value[0:4] + value[5:7] + value[8:10] + value[11:13] + value[14:16] + value[17:19]).isdigit()
    ):
        raise ValueError(f"not a canonical UTC timestamp: {value!r}")
    return datetime(
        int(value[0:4]), int(value[5:7]), int(value[8:10]),
        int(value[11:13]), int(value[14:16]), int(value[17:19]),
        tzinfo=timezone.utc,
    )


def format_utc(dt: datetime) -> str:
    if dt.tzinfo is None:
        raise ValueError("naive datetime not allowed in canonical data")
    return dt.astimezone(timezone.utc).strftime(TIMESTAMP_FMT)
