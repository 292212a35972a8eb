"""JSON-over-HTTP facade for contesters.

Five endpoints over an immutable store snapshot; the query ledger is the one
mutable resource. Error bodies are always {code, message, details}.
"""

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from ..errors import (
    ContestkitError,
    DomainError,
    InvalidRequestError,
    QuotaExceededError,
    SchemaError,
    UnknownCaseError,
)
from .schemas import (
    CaseSummary,
    ContestBody,
    ContestResponse,
    ErrorBody,
    EvidenceResponse,
    MultiplicityResponse,
    WhatIfBody,
    WhatIfResponse,
)
from .store import CaseStore, build_demo_store

_STATUS_BY_TYPE = (
    (UnknownCaseError, 404),
    (QuotaExceededError, 429),
    (InvalidRequestError, 400),
    (SchemaError, 400),
    (DomainError, 400),
)

_ERROR_RESPONSES = {
    400: {"model": ErrorBody, "description": "Invalid request"},
    404: {"model": ErrorBody, "description": "Unknown case"},
}
_WHATIF_RESPONSES = dict(_ERROR_RESPONSES)
_WHATIF_RESPONSES[429] = {"model": ErrorBody, "description": "Query budget exhausted"}


def _status_for(exc: ContestkitError) -> int:
    for cls, status in _STATUS_BY_TYPE:
        if isinstance(exc, cls):
            return status
    return 500


def create_app(store: CaseStore = None) -> FastAPI:
    if store is None:
        store = build_demo_store()

    app = FastAPI(
        title="contestkit service",
        version="0.1.0",
        description=(
            "What-if queries, evidence reports, multiplicity reports, and "
            "feature-correction contests for decisions made by stored models."
        ),
    )
    app.state.store = store

    @app.exception_handler(ContestkitError)
    async def library_error(request: Request, exc: ContestkitError):
        return JSONResponse(
            status_code=_status_for(exc),
            content={"code": exc.code, "message": exc.message, "details": exc.details},
        )

    @app.exception_handler(RequestValidationError)
    async def body_error(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={
                "code": "invalid_request",
                "message": "request body failed validation",
                "details": {"errors": [str(e["msg"]) for e in exc.errors()]},
            },
        )

    @app.get("/cases/{case_id}", response_model=CaseSummary, responses=_ERROR_RESPONSES)
    def get_case(case_id: str):
        return store.case_summary(case_id)

    @app.post(
        "/cases/{case_id}/what-if",
        response_model=WhatIfResponse,
        responses=_WHATIF_RESPONSES,
    )
    def post_what_if(case_id: str, body: WhatIfBody):
        return store.run_what_if(case_id, body.inputs)

    @app.get(
        "/cases/{case_id}/evidence",
        response_model=EvidenceResponse,
        responses=_ERROR_RESPONSES,
    )
    def get_evidence(case_id: str):
        return store.evidence(case_id)

    @app.get(
        "/cases/{case_id}/multiplicity",
        response_model=MultiplicityResponse,
        responses=_ERROR_RESPONSES,
    )
    def get_multiplicity(case_id: str):
        return store.multiplicity(case_id)

    @app.post(
        "/cases/{case_id}/contest",
        response_model=ContestResponse,
        responses=_ERROR_RESPONSES,
    )
    def post_contest(case_id: str, body: ContestBody):
        return store.contest(case_id, body.features, body.proof)

    return app
