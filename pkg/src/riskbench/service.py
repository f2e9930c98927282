"""HTTP/JSON API over the registry, tasks, scoring, and leaderboard.

The answer key never crosses this boundary: responses are built only from
cards, ledgers, and score reports. Errors are {code, message, details} with
conventional status codes.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, File, Form, Request, UploadFile
from fastapi.responses import JSONResponse

from .canonical import RiskbenchError
from .ledger import Evidence, Ledger, UnknownSubmission, UnknownTask
from .registry import Registry, UnknownDataset, parse_dataset_ref
from .scoring import SubmissionError

DEFAULT_PORT = 8384

_NOT_FOUND = (UnknownDataset, UnknownTask, UnknownSubmission)


def _status_for(exc: RiskbenchError) -> int:
    if isinstance(exc, _NOT_FOUND):
        return 404
    return 400


def create_app(home: Optional[Path] = None) -> FastAPI:
    app = FastAPI(title="riskbench", version="0.1.0")
    registry = Registry(home)
    ledger = Ledger(home)

    @app.exception_handler(RiskbenchError)
    async def riskbench_error_handler(request: Request, exc: RiskbenchError):
        return JSONResponse(
            status_code=_status_for(exc),
            content={"code": exc.code, "message": str(exc), "details": exc.details},
        )

    @app.get("/datasets")
    def list_datasets():
        return registry.list()

    @app.get("/datasets/{ref}")
    def get_dataset(ref: str):
        dataset_id, version = parse_dataset_ref(ref)
        if version is not None:
            entry = registry._entry(dataset_id, version)
            return {"id": dataset_id, "version": version, "card": entry["card"]}
        entries = registry.list()
        versions = [e for e in entries if e["id"] == dataset_id]
        if not versions:
            raise UnknownDataset(f"no dataset registered under id {dataset_id!r}")
        return {"id": dataset_id, "versions": versions}

    @app.get("/tasks")
    def list_tasks():
        return ledger.task_cards()

    @app.get("/tasks/{task_id}")
    def get_task(task_id: str):
        return ledger.bundle(task_id).card

    @app.post("/tasks/{task_id}/submissions", status_code=201)
    async def submit(
        task_id: str,
        file: UploadFile = File(...),
        submitter: str = Form(...),
        evidence: str = Form(default=""),
    ):
        try:
            evidence_doc = json.loads(evidence) if evidence else {}
        except json.JSONDecodeError:
            raise SubmissionError("evidence must be a JSON object")
        if not isinstance(evidence_doc, dict):
            raise SubmissionError("evidence must be a JSON object")
        data = await file.read()
        record = ledger.record_submission(
            task_id, submitter, data, Evidence.from_dict(evidence_doc)
        )
        return record.to_dict()

    @app.get("/tasks/{task_id}/leaderboard")
    def leaderboard(task_id: str):
        return [entry.to_dict() for entry in ledger.leaderboard(task_id)]

    @app.get("/submissions/{submission_id}/report")
    def submission_report(submission_id: str):
        return ledger.find_submission(submission_id).report

    return app


def serve(port: int = DEFAULT_PORT, host: str = "127.0.0.1", home: Optional[Path] = None) -> None:
    import uvicorn

    uvicorn.run(create_app(home), host=host, port=port, log_level="info")
