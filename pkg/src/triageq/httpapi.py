"""HTTP/JSON surface over the centre service.

Errors are reported as {"code", "message", "field"?} with conventional
status codes. A stub identity header (X-Operator) is recorded with each
mutating request; there is no real authentication.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Header, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .errors import NotFoundError, SchemaError, ValidationError
from .service import CentreService


def _error(status: int, code: str, message: str, fld=None) -> JSONResponse:
    body = {"code": code, "message": message}
    if fld is not None:
        body["field"] = fld
    return JSONResponse(status_code=status, content=body)


def _case_body(case) -> dict:
    return case.to_dict()


def create_app(service: CentreService, static_dir=None) -> FastAPI:
    app = FastAPI(title="triageq", docs_url=None, redoc_url=None)

    @app.exception_handler(ValidationError)
    async def _validation(request: Request, exc: ValidationError):
        return _error(400, "validation_error", str(exc), exc.field)

    @app.exception_handler(NotFoundError)
    async def _not_found(request: Request, exc: NotFoundError):
        return _error(404, "not_found", str(exc))

    @app.exception_handler(SchemaError)
    async def _schema(request: Request, exc: SchemaError):
        return _error(400, "schema_error", str(exc))

    @app.get("/api/health")
    def health():
        return {
            "status": "ok",
            "patients": len(service.cases),
            "waiting": len(service.queue_order),
            "events": service.events_applied,
        }

    @app.post("/api/patients", status_code=201)
    async def submit_patient(request: Request,
                             x_operator: str | None = Header(default=None)):
        try:
            body = await request.json()
        except Exception:
            raise ValidationError("request body must be JSON")
        if not isinstance(body, dict):
            raise ValidationError("request body must be a JSON object")
        assessment = body.get("assessment")
        if not isinstance(assessment, dict):
            raise ValidationError("assessment object is required", field="assessment")
        case = service.submit_triage(assessment, body.get("name"),
                                     body.get("age"), operator=x_operator)
        position = (service.queue_order.index(case.id) + 1
                    if case.id in service.queue_order else None)
        return {**_case_body(case), "queue_position": position}

    @app.post("/api/doctors/{doctor_id}/next")
    async def next_patient(doctor_id: str, request: Request,
                           x_operator: str | None = Header(default=None)):
        notes = ""
        if await request.body():
            try:
                body = await request.json()
            except Exception:
                raise ValidationError("request body must be JSON")
            if body is not None:
                if not isinstance(body, dict):
                    raise ValidationError("request body must be a JSON object")
                notes = body.get("notes", "") or ""
        case = service.next_patient(doctor_id, notes, operator=x_operator)
        return {"patient": _case_body(case) if case is not None else None}

    @app.get("/api/queue")
    def queue():
        return {"now_min": service.clock.now_min(), "rows": service.queue_state()}

    @app.get("/api/patients")
    def search(q: str = ""):
        return {"results": [_case_body(c) for c in service.search_patients(q)]}

    @app.get("/api/patients/{case_id}")
    def get_patient(case_id: str):
        return _case_body(service.get_patient(case_id))

    @app.get("/api/doctors/{doctor_id}/model")
    def doctor_model(doctor_id: str):
        return service.doctor_model_stats(doctor_id)

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
