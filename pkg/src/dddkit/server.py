"""JSON API backing the model studio.

Single model per server.  Mutations are serialized behind a lock, carry a
monotonically increasing revision, and persist the canonical model text back
to the model file so the textual form stays authoritative.
"""

from __future__ import annotations

import threading
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from . import delta as D
from . import frontend
from . import model as M
from . import verifier as V
from .errors import DddError, StaleDiagnostic, UnknownRepair


class PutModelBody(BaseModel):
    text: str
    revision: Optional[int] = None


class RepairBody(BaseModel):
    subject: str
    ruleId: str
    repairId: str
    revision: Optional[int] = None


class PreviewBody(BaseModel):
    text: str


class _State:
    def __init__(self, model_path: Path, config: V.VerifierConfig):
        self.model_path = model_path
        self.config = config
        self.lock = threading.Lock()
        self.revision = 1
        text = model_path.read_text()
        self.model = frontend.parse(text, str(model_path))
        self.text = M.canonical_print(self.model)

    def snapshot(self) -> dict:
        return {
            "revision": self.revision,
            "text": self.text,
            "model": M.model_to_json(self.model),
        }

    def diagnostics(self) -> list[dict]:
        return [d.to_json() for d in V.check(self.model, self.config)]

    def commit(self, model: M.DomainModel):
        self.model = model
        self.text = M.canonical_print(model)
        self.revision += 1
        self.model_path.write_text(self.text)


def _check_revision(state: _State, revision: Optional[int]):
    if revision is not None and revision != state.revision:
        raise HTTPException(
            status_code=409,
            detail={"error": "stale revision", "currentRevision": state.revision},
        )


def create_app(model_path: Path, config: Optional[V.VerifierConfig] = None) -> FastAPI:
    state = _State(Path(model_path), config or V.VerifierConfig())
    app = FastAPI(title="dddkit model service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.ddd = state

    @app.get("/api/model")
    def get_model():
        return state.snapshot()

    @app.put("/api/model")
    def put_model(body: PutModelBody):
        with state.lock:
            _check_revision(state, body.revision)
            try:
                model = frontend.parse(body.text, str(state.model_path))
            except frontend.ParseFailure as exc:
                raise HTTPException(
                    status_code=422,
                    detail={
                        "error": "parse failure",
                        "parseErrors": [e.to_json() for e in exc.errors],
                        "revision": state.revision,
                    },
                )
            state.commit(model)
            return {**state.snapshot(), "diagnostics": state.diagnostics()}

    @app.get("/api/diagnostics")
    def get_diagnostics():
        return {"revision": state.revision, "diagnostics": state.diagnostics()}

    @app.get("/api/rules")
    def get_rules():
        return {"rules": [r.to_json() for r in V.rules()]}

    @app.post("/api/repairs")
    def post_repair(body: RepairBody):
        with state.lock:
            _check_revision(state, body.revision)
            diags = V.check(state.model, state.config)
            match = next(
                (d for d in diags if d.rule_id == body.ruleId and d.subject == body.subject),
                None,
            )
            if match is None:
                raise HTTPException(
                    status_code=404,
                    detail={"error": f"no {body.ruleId} diagnostic on {body.subject!r}"},
                )
            try:
                repaired = V.apply_repair(state.model, match, body.repairId)
            except (UnknownRepair, StaleDiagnostic) as exc:
                raise HTTPException(status_code=409, detail={"error": str(exc)})
            except DddError as exc:
                raise HTTPException(status_code=422, detail={"error": str(exc)})
            state.commit(repaired)
            return {**state.snapshot(), "diagnostics": state.diagnostics()}

    @app.post("/api/preview-delta")
    def preview_delta(body: PreviewBody):
        try:
            candidate = frontend.parse(body.text, "<preview>")
        except frontend.ParseFailure as exc:
            raise HTTPException(
                status_code=422,
                detail={"error": "parse failure", "parseErrors": [e.to_json() for e in exc.errors]},
            )
        try:
            script = D.diff(state.model, candidate)
        except DddError as exc:
            raise HTTPException(status_code=422, detail={"error": str(exc)})
        return {"revision": state.revision, "delta": script.to_json()}

    return app
