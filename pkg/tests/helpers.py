"""Shared builders for the test suite."""

import csv
import dataclasses
import io

from riskbench.registry import Registry
from riskbench.synthgen import CardMeta, SyntheticConfig, generate, write_dataset
from riskbench.tasks import LabelRule, SplitSpec, TaskSpec, materialize

DEFAULT_ECON = {"LOTTERY": 0.65, "CASINO": 0.95, "SPORTS": 0.93}


def small_config(seed=7, n_players=120, horizon=7, prevalence=0.1, signal=1.0, name="Unit Fixture", **overrides):
    base = dict(
        seed=seed,
        n_players=n_players,
        time_horizon_days=horizon,
        engagement_mix={"NEW": 0.2, "CASUAL": 0.3, "REGULAR": 0.5},
        vertical_mix={"CASINO": 0.6, "SPORTS": 0.4},
        cohorts=(("EU", 0.5), ("NA", 0.5)),
        prevalence=prevalence,
        signal_strength=signal,
        economics=dict(DEFAULT_ECON),
        card_meta=CardMeta(name=name, tasks=(("T1", "unit task"),)),
    )
    base.update(overrides)
    return SyntheticConfig(**base)


def binary_task_spec(dataset_ref, task_id="T1", window=7, fraction=0.8, salt="unit", cohort_field="cohort"):
    return TaskSpec(
        task_id=task_id,
        dataset=dataset_ref,
        label_rule=LabelRule(source="PGSI", kind="BINARY", binary_threshold=5),
        observation_window_days=window,
        label_horizon={"text": "risk flag at horizon end", "days": window},
        split=SplitSpec(train_fraction=fraction, salt=salt),
        primary_metric="AUC",
        cohort_field=cohort_field,
    )


def build_dataset(home, config=None):
    """generate + write + register under an explicit home; returns
    (registry, dataset_ref, result)."""
    config = config or small_config()
    result = generate(config)
    out = home / "gen" / config.card_meta.name.replace(" ", "-").lower()
    write_dataset(result, out)
    registry = Registry(home=home)
    ref = registry.register(out / "events.csv", out / "labels.csv", result.card, result.manifest)
    return registry, ref, result


def build_bundle(home, config=None, spec=None):
    registry, ref, result = build_dataset(home, config)
    spec = spec or binary_task_spec(ref)
    spec = dataclasses.replace(spec, dataset=ref)
    bundle = materialize(spec, registry, out_root=home / "bundles")
    return registry, bundle, result


def submission_bytes(rows, kind="BINARY"):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["player_id", "score"] if kind == "BINARY" else ["player_id", "class"])
    for pid, value in rows:
        writer.writerow([pid, value])
    return buf.getvalue().encode("utf-8")


def perfect_submission(bundle):
    targets, _ = bundle.answer_key()
    if bundle.card["kind"] == "BINARY":
        return submission_bytes([(p, "1.0" if t == "1" else "0.0") for p, t in sorted(targets.items())])
    return submission_bytes([(p, t) for p, t in sorted(targets.items())], kind="MULTICLASS")


def all_negative_submission(bundle):
    targets, _ = bundle.answer_key()
    return submission_bytes([(p, "0.0") for p in sorted(targets)])
