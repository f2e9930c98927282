"""Shipped benchmark presets: one per example scenario (universal coverage,
lottery-only, highly engaged, early detection), each a generator config plus
the task specs published with the dataset."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .canonical import RiskbenchError
from .synthgen import SyntheticConfig
from .tasks import TaskSpec

PRESET_NAMES = ("early_risk", "universal", "lottery", "highly_engaged")


class UnknownPreset(RiskbenchError):
    code = "UnknownPreset"


@dataclass
class Preset:
    name: str
    config: SyntheticConfig
    task_specs: list
    raw: dict


def _preset_text(name: str) -> str:
    try:
        return (resources.files(__package__) / "presets" / f"{name}.json").read_text("utf-8")
    except FileNotFoundError:
        raise UnknownPreset(f"no shipped preset named {name!r}; options: {', '.join(PRESET_NAMES)}")


def load_preset(name: str) -> Preset:
    raw = json.loads(_preset_text(name))
    return Preset(
        name=name,
        config=SyntheticConfig.from_dict(raw["config"]),
        task_specs=[TaskSpec.from_dict(t) for t in raw.get("tasks", [])],
        raw=raw,
    )


def iter_presets() -> list:
    return [load_preset(name) for name in PRESET_NAMES]


def find_task_spec(task_id: str) -> TaskSpec:
    """Locate a shipped task spec (B1, B2, U1, U2, L1, H1) by id."""
    for preset in iter_presets():
        for spec in preset.task_specs:
            if spec.task_id == task_id:
                return spec
    raise UnknownPreset(f"no shipped task spec with id {task_id!r}")


def export_presets(out_dir: Path) -> list:
    """Write the shipped preset documents as plain JSON files."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name in PRESET_NAMES:
        path = out_dir / f"{name}.json"
        path.write_text(_preset_text(name), "utf-8")
        written.append(path)
    return written
