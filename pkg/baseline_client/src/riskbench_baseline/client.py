"""HTTP client for posting submissions to a riskbench service."""

from __future__ import annotations

import json
from pathlib import Path

import requests


class SubmitError(Exception):
    def __init__(self, message: str, payload=None):
        super().__init__(message)
        self.payload = payload


def submit(endpoint: str, task_id: str, file_path: Path, submitter: str, evidence: dict) -> dict:
    """POST a prediction file; returns the service's submission record.

    Service-side errors are surfaced verbatim in SubmitError.payload; nothing
    is retried, so a failed call leaves no partial state anywhere.
    """
    url = f"{endpoint.rstrip('/')}/tasks/{task_id}/submissions"
    with open(file_path, "rb") as f:
        response = requests.post(
            url,
            files={"file": ("predictions.csv", f, "text/csv")},
            data={"submitter": submitter, "evidence": json.dumps(evidence)},
            timeout=120,
        )
    if response.status_code >= 400:
        try:
            payload = response.json()
        except ValueError:
            payload = {"code": "HttpError", "message": response.text}
        raise SubmitError(
            f"{payload.get('code', 'HttpError')}: {payload.get('message', '')}", payload=payload
        )
    return response.json()
