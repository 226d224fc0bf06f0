"""HTTP gateway: scan for editors, thanks/note ingestion, stats and badges.

Editor companions never re-implement the line grammar; they POST buffer
text to /v1/scan and decorate whatever comes back, so the grammar stays
single-sourced. The note form is served here too, mirroring the
click-then-browser-redirect flow.
"""

from __future__ import annotations

from datetime import datetime, timezone

from fastapi import FastAPI, Request, Response
from fastapi.responses import HTMLResponse, JSONResponse
from pydantic import BaseModel, Field

from . import insights
from .config import ServiceConfig
from .ledger import (
    ConflictError,
    NotFoundError,
    ThanksEvent,
    ThanksLedger,
    ValidationError,
)
from .registry import Ecosystem
from .scanner import Language, Scope, SourceDocument, scan


class TargetModel(BaseModel):
    package: str
    member_path: list[str] = Field(default_factory=list)


class ScanRequest(BaseModel):
    language: Language
    text: str
    path_hint: str | None = None


class ThanksRequest(BaseModel):
    installation_id: str
    language: Language
    line_number: int
    line_text: str
    scope: Scope
    targets: list[TargetModel]
    timestamp: datetime | None = None


class NoteRequest(BaseModel):
    note: str


NOTE_FORM_PAGE = """<!doctype html>
<html>
  <head><title>Say more</title></head>
  <body>
    <h1>Say more</h1>
    <p>Your thanks was recorded. If you like, add a personal note for the
    contributors. Notes are anonymous.</p>
    <form method="post" action="/v1/thanks/{event_id}/note-form">
      <textarea name="note" rows="6" cols="60" maxlength="10000"></textarea>
      <br/>
      <button type="submit">Send note</button>
    </form>
  </body>
</html>
"""


def create_app(config: ServiceConfig, ledger: ThanksLedger | None = None) -> FastAPI:
    config.validate()
    ledger = ledger if ledger is not None else ThanksLedger(config.ledger_path)
    deny = config.deny_list()
    app = FastAPI(title="thanksd", version="1")
    app.state.ledger = ledger
    app.state.config = config

    @app.post("/v1/scan")
    async def scan_endpoint(request: Request):
        body = await request.body()
        if len(body) > config.scan_body_limit:
            return JSONResponse(
                {"error": "payload too large", "limit": config.scan_body_limit},
                status_code=413,
            )
        try:
            parsed = ScanRequest.model_validate_json(body)
        except Exception as exc:
            return JSONResponse(
                {"error": "invalid scan request", "detail": _validation_detail(exc)},
                status_code=422,
            )
        doc = SourceDocument(
            language=parsed.language, text=parsed.text, path_hint=parsed.path_hint
        )
        anchors = scan(doc, deny)
        return {"anchors": [a.to_dict() for a in anchors]}

    @app.post("/v1/thanks", status_code=201)
    def record_thanks(body: ThanksRequest):
        event = ThanksEvent(
            installation_id=body.installation_id,
            timestamp=body.timestamp or datetime.now(timezone.utc),
            language=body.language,
            line_number=body.line_number,
            line_text=body.line_text,
            scope=body.scope,
            targets=tuple((t.package, tuple(t.member_path)) for t in body.targets),
        )
        try:
            event_id = ledger.record_thanks(event)
        except ValidationError as exc:
            return JSONResponse({"error": str(exc)}, status_code=422)
        note_url = "%s/v1/note-form/%s" % (
            config.note_form_base_url.rstrip("/"),
            event_id,
        )
        return {"event_id": event_id, "note_url": note_url}

    @app.post("/v1/thanks/{event_id}/note")
    def attach_note(event_id: str, body: NoteRequest):
        return _attach(event_id, body.note)

    @app.post("/v1/thanks/{event_id}/note-form")
    async def attach_note_form(event_id: str, request: Request):
        form = await request.form()
        return _attach(event_id, str(form.get("note", "")))

    def _attach(event_id: str, note: str):
        try:
            event = ledger.attach_note(event_id, note)
        except NotFoundError as exc:
            return JSONResponse({"error": str(exc)}, status_code=404)
        except ConflictError as exc:
            return JSONResponse({"error": str(exc)}, status_code=409)
        except ValidationError as exc:
            return JSONResponse({"error": str(exc)}, status_code=422)
        return {"event_id": event.event_id, "note": event.note}

    @app.get("/v1/note-form/{event_id}", response_class=HTMLResponse)
    def note_form(event_id: str):
        try:
            ledger.get(event_id)
        except NotFoundError as exc:
            return HTMLResponse("<h1>Unknown thanks event</h1>", status_code=404)
        return HTMLResponse(NOTE_FORM_PAGE.format(event_id=event_id))

    @app.get("/v1/stats/{ecosystem}/{package}")
    def package_stats(ecosystem: Ecosystem, package: str):
        stats = insights.package_stats(ledger.events(), ecosystem, package)
        return stats.to_dict()

    @app.get("/v1/badge/{ecosystem}/{package}")
    def badge(ecosystem: Ecosystem, package: str, response: Response):
        response.headers["Cache-Control"] = "max-age=300, public"
        return insights.badge_payload(ledger.events(), ecosystem, package)

    return app


def _validation_detail(exc: Exception):
    errors = getattr(exc, "errors", None)
    if callable(errors):
        return [
            {"field": ".".join(str(p) for p in e.get("loc", ())), "message": e.get("msg")}
            for e in errors()
        ]
    return str(exc)
