"""Single command-line entry point for the whole suite.

Machine-readable output (reports, lists, receipts) is JSON on stdout; human
messages and logs go to stderr. Exit codes: 0 success, 1 user error, 2
internal error. Every failure prints one machine-parseable JSON line on
stderr.
"""

from __future__ import annotations

import dataclasses
import json
import sys
from pathlib import Path

import click

from .canonical import RiskbenchError
from .ledger import Evidence, Ledger
from .registry import DatasetCard, Registry
from .scoring import score as score_predictions
from .scoring import validate_submission
from .synthgen import InfeasibleConfig, SyntheticConfig, generate, write_dataset
from .tasks import TaskSpec, default_bundle_root, materialize
from .util import dump_json
from . import presets as presets_mod


def _emit(obj) -> None:
    click.echo(json.dumps(obj, sort_keys=True, ensure_ascii=False, indent=2))


def _log(message: str) -> None:
    click.echo(message, err=True)


def _error_line(code: str, message: str, details=None) -> None:
    click.echo(json.dumps({"error": code, "message": message, "details": details}), err=True)


@click.group()
def cli():
    """riskbench: synthetic player-risk benchmark suite."""


# -- generate ------------------------------------------------------------


def _load_config(config_path, preset_name, seed):
    if (config_path is None) == (preset_name is None):
        raise click.UsageError("pass exactly one of --config or --preset")
    if preset_name is not None:
        config = presets_mod.load_preset(preset_name).config
    else:
        doc = json.loads(Path(config_path).read_text("utf-8"))
        config = SyntheticConfig.from_dict(doc.get("config", doc))
    if seed is not None:
        config = dataclasses.replace(config, seed=seed)
    return config


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), help="Config JSON (bare or preset document).")
@click.option("--preset", "preset_name", type=str, help="Shipped preset name.")
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def generate_cmd(config_path, preset_name, seed, out_dir):
    """Generate a labeled synthetic dataset into OUT."""
    config = _load_config(config_path, preset_name, seed)
    result = generate(config)
    write_dataset(result, out_dir)
    counts = result.manifest["counts"]
    _emit({
        "out": str(out_dir),
        "dataset_name": result.card.dataset_name,
        "players": counts["players"],
        "events": counts["events"],
        "sessions": counts["sessions"],
        "flagged": counts["flagged"],
        "config_sha256": result.manifest["config_sha256"],
    })


cli.add_command(generate_cmd, name="generate")


# -- registry ------------------------------------------------------------


@cli.command()
@click.option("--dir", "dataset_dir", type=click.Path(exists=True, file_okay=False), help="Directory produced by 'generate'.")
@click.option("--events", type=click.Path(exists=True, dir_okay=False))
@click.option("--labels", type=click.Path(exists=True, dir_okay=False))
@click.option("--card", "card_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--manifest", "manifest_path", type=click.Path(exists=True, dir_okay=False))
def register(dataset_dir, events, labels, card_path, manifest_path):
    """Register a dataset with the local registry."""
    if dataset_dir:
        base = Path(dataset_dir)
        events = events or base / "events.csv"
        labels = labels or base / "labels.csv"
        card_path = card_path or base / "card.json"
        default_manifest = base / "manifest.json"
        if manifest_path is None and default_manifest.exists():
            manifest_path = default_manifest
    if not (events and labels and card_path):
        raise click.UsageError("pass --dir or all of --events/--labels/--card")
    card = DatasetCard.from_dict(json.loads(Path(card_path).read_text("utf-8")))
    manifest = json.loads(Path(manifest_path).read_text("utf-8")) if manifest_path else None
    ref = Registry().register(Path(events), Path(labels), card, manifest)
    _emit({"dataset": ref})


@cli.command(name="list")
@click.option("--vertical", default=None, help="Filter on the card's vertical dimension.")
@click.option("--name-contains", default=None)
def list_cmd(vertical, name_contains):
    """List registered datasets (cards)."""
    _emit(Registry().list(vertical=vertical, name_contains=name_contains))


@cli.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Operator-style raw CSV export.")
@click.option("--mapping", "mapping_path", required=True, type=click.Path(exists=True, dir_okay=False),
              help="FieldMapping JSON document.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def harmonize(input_path, mapping_path, out_path):
    """Convert a raw operator export to canonical events CSV."""
    from .canonical import FieldMapping, harmonize as harmonize_table, read_raw_csv, serialize_events

    mapping = FieldMapping.from_dict(json.loads(Path(mapping_path).read_text("utf-8")))
    result = harmonize_table(read_raw_csv(Path(input_path).read_bytes()), mapping)
    Path(out_path).write_bytes(serialize_events(result.records))
    _emit({
        "out": out_path,
        "rows": result.row_count,
        "harmonized": len(result.records),
        "errors": [vars(e) for e in result.errors[:50]],
    })
    if result.errors:
        sys.exit(1)


@cli.command()
@click.option("--dataset", "ref", required=True, help="dataset-id or dataset-id@version")
def verify(ref):
    """Recompute checksums for a registered dataset."""
    registry = Registry()
    dataset_id, version = registry.resolve(ref)
    report = registry.verify(dataset_id, version)
    _emit(report.to_dict())
    if not report.passed:
        sys.exit(1)


# -- tasks ---------------------------------------------------------------


@cli.command()
@click.option("--task", "task_id", default=None, help="Shipped task spec id (B1, B2, U1, U2, L1, H1).")
@click.option("--spec", "spec_path", type=click.Path(exists=True, dir_okay=False), help="TaskSpec JSON file.")
def materialize_cmd(task_id, spec_path):
    """Materialize a benchmark task bundle from a registered dataset."""
    if (task_id is None) == (spec_path is None):
        raise click.UsageError("pass exactly one of --task or --spec")
    if task_id is not None:
        spec = presets_mod.find_task_spec(task_id)
    else:
        spec = TaskSpec.from_dict(json.loads(Path(spec_path).read_text("utf-8")))
    bundle = materialize(spec, Registry())
    _emit({"task_id": bundle.task_id, "bundle_dir": str(bundle.directory), "card": bundle.card})


cli.add_command(materialize_cmd, name="materialize")


# -- scoring / submissions -------------------------------------------------


@cli.command(name="score")
@click.option("--task", "task_id", required=True)
@click.option("--file", "file_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--threshold", type=float, default=0.5, show_default=True)
def score_cmd(task_id, file_path, threshold):
    """Validate and score a prediction file against a materialized task."""
    bundle = Ledger().bundle(task_id)
    preds = validate_submission(Path(file_path).read_bytes(), bundle)
    report = score_predictions(preds, bundle, threshold=threshold)
    _emit(report.to_dict())


@cli.command()
@click.option("--task", "task_id", required=True)
@click.option("--file", "file_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--submitter", required=True)
@click.option("--endpoint", default=None, help="Service URL; omit to record in the local ledger.")
@click.option("--code-url", default=None)
@click.option("--publication-ref", default=None)
@click.option("--container-digest", default=None)
def submit(task_id, file_path, submitter, endpoint, code_url, publication_ref, container_digest):
    """Submit predictions to the local ledger or a remote service."""
    evidence = Evidence(code_url=code_url, publication_ref=publication_ref, container_digest=container_digest)
    data = Path(file_path).read_bytes()
    if endpoint is None:
        record = Ledger().record_submission(task_id, submitter, data, evidence)
        _emit(record.to_dict())
        return
    import httpx

    response = httpx.post(
        f"{endpoint.rstrip('/')}/tasks/{task_id}/submissions",
        files={"file": ("predictions.csv", data, "text/csv")},
        data={"submitter": submitter, "evidence": json.dumps(evidence.to_dict())},
        timeout=60.0,
    )
    if response.status_code >= 400:
        try:
            body = response.json()
        except ValueError:
            body = {"code": "HttpError", "message": response.text}
        _error_line(body.get("code", "HttpError"), body.get("message", ""), body.get("details"))
        sys.exit(1)
    _emit(response.json())


@cli.command()
@click.option("--task", "task_id", required=True)
def leaderboard(task_id):
    """Print the ranked leaderboard for a task."""
    _emit([entry.to_dict() for entry in Ledger().leaderboard(task_id)])


# -- service ---------------------------------------------------------------


@cli.command()
@click.option("--port", type=int, default=8384, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(port, host):
    """Run the HTTP/JSON service."""
    from .service import serve as run_service

    _log(f"riskbench service on http://{host}:{port} (home: {Registry().home})")
    run_service(port=port, host=host)


# -- presets -----------------------------------------------------------------


@cli.group()
def presets():
    """Inspect or export the shipped benchmark presets."""


@presets.command(name="list")
def presets_list():
    out = []
    for preset in presets_mod.iter_presets():
        out.append({
            "preset": preset.name,
            "dataset_name": preset.config.card_meta.name,
            "n_players": preset.config.n_players,
            "horizon_days": preset.config.time_horizon_days,
            "tasks": [spec.task_id for spec in preset.task_specs],
        })
    _emit(out)


@presets.command(name="export")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def presets_export(out_dir):
    written = presets_mod.export_presets(Path(out_dir))
    _emit({"written": [str(p) for p in written]})


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        if exc.ctx is not None:
            click.echo(exc.ctx.get_usage(), err=True)
        _error_line("UsageError", exc.format_message())
        return 1
    except click.ClickException as exc:
        _error_line("CliError", exc.format_message())
        return 1
    except (RiskbenchError, InfeasibleConfig) as exc:
        _error_line(getattr(exc, "code", type(exc).__name__), str(exc), getattr(exc, "details", None))
        return 1
    except OSError as exc:
        _error_line("IoError", str(exc))
        return 1
    except Exception as exc:  # anything else is an internal error
        _error_line("InternalError", f"{type(exc).__name__}: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
