"""Command line for the baseline client: predict on a bundle, submit to a service."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .client import SubmitError, submit as submit_predictions
from .model import predict_bundle, write_submission


@click.group()
def cli():
    """riskbench-baseline: reference submitter for riskbench tasks."""


@cli.command()
@click.option("--bundle", "bundle_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def predict(bundle_dir, out_path):
    """Fit the baseline on a bundle and write a submission file."""
    scores = predict_bundle(Path(bundle_dir))
    write_submission(scores, Path(out_path))
    click.echo(json.dumps({"out": out_path, "players": len(scores)}))


@cli.command()
@click.option("--endpoint", required=True)
@click.option("--task", "task_id", required=True)
@click.option("--file", "file_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--submitter", required=True)
@click.option("--code-url", default=None)
@click.option("--publication-ref", default=None)
@click.option("--container-digest", default=None)
def submit(endpoint, task_id, file_path, submitter, code_url, publication_ref, container_digest):
    """Post a submission; prints the receipt (id and badge)."""
    evidence = {
        k: v
        for k, v in {
            "code_url": code_url,
            "publication_ref": publication_ref,
            "container_digest": container_digest,
        }.items()
        if v
    }
    record = submit_predictions(endpoint, task_id, Path(file_path), submitter, evidence)
    click.echo(json.dumps({
        "submission_id": record["submission_id"],
        "badge": record["badge"],
        "duplicate_of": record.get("duplicate_of"),
    }))


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.ClickException as exc:
        click.echo(json.dumps({"error": "CliError", "message": exc.format_message()}), err=True)
        return 1
    except SubmitError as exc:
        click.echo(json.dumps({"error": "SubmitError", "message": str(exc), "details": exc.payload}), err=True)
        return 1
    except (OSError, ValueError) as exc:
        click.echo(json.dumps({"error": type(exc).__name__, "message": str(exc)}), err=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
