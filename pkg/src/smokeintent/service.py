"""HTTP prediction service: questionnaire definition, answer submission,
prediction, and health.

The loaded model and catalog are immutable shared state, so request
handling is fully concurrent. No submission is stored. Request counters
exist only for observability (they never influence a response) and make
it checkable that invalid submissions are rejected before any model call.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .models import TrainedModel, predict
from .schema import KIND_MULTI, QuestionCatalog, SubmissionError, build_feature_vector


class PredictRequest(BaseModel):
    # single-choice answers are codes; multi-selects are lists of option codes
    answers: dict[str, int | list[int]] = {}


class PredictResponse(BaseModel):
    probability_yes: float
    label: int
    model_id: str
    catalog_version: str


@dataclass
class RequestCounters:
    requests_total: int = 0
    invalid_total: int = 0
    predictions_total: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def bump(self, name: str):
        with self._lock:
            setattr(self, name, getattr(self, name) + 1)

    def snapshot(self) -> dict[str, int]:
        with self._lock:
            return {
                "requests_total": self.requests_total,
                "invalid_total": self.invalid_total,
                "predictions_total": self.predictions_total,
            }


def _question_payload(catalog: QuestionCatalog) -> list[dict]:
    out = []
    for q in catalog.predictors():
        out.append(
            {
                "id": q.id,
                "text": q.text,
                "kind": q.domain.kind,
                "multi": q.domain.kind == KIND_MULTI,
                "options": [
                    {"code": c.code, "label": c.label} for c in q.domain.codes if c.code != 0
                ],
            }
        )
    return out


def create_app(
    model: TrainedModel | None = None,
    model_id: str = "",
    catalog: QuestionCatalog | None = None,
    cors_origins: tuple[str, ...] = ("*",),
) -> FastAPI:
    """Build the service around an already-loaded model and catalog.

    The model is loaded once; there is no hot reload. When a catalog is
    present its expanded predictor columns must match the model's feature
    names, otherwise submissions would silently misalign.
    """
    catalog_version = catalog.identity if catalog is not None else ""
    if model is not None and catalog is not None:
        expected = [c.column_id for c in catalog.feature_columns()]
        if model.meta.feature_names != expected:
            raise ValueError(
                "model feature names do not match the catalog's predictor columns; "
                f"model has {len(model.meta.feature_names)}, catalog expands to {len(expected)}"
            )

    app = FastAPI(title="smokeintent service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins),
        allow_methods=["GET", "POST"],
        allow_headers=["*"],
    )
    counters = RequestCounters()
    app.state.counters = counters
    # frozen once at startup: consecutive reads must be byte-identical
    questions = _question_payload(catalog) if catalog is not None else None

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        if request.url.path == "/api/predict":
            counters.bump("requests_total")
            counters.bump("invalid_total")
        return JSONResponse(status_code=422, content={"detail": exc.errors()})

    @app.get("/api/questions")
    def get_questions():
        if questions is None:
            return JSONResponse(status_code=503, content={"detail": "catalog not loaded"})
        return JSONResponse(
            content={"catalog_version": catalog_version, "questions": questions},
            headers={"Cache-Control": "public, max-age=3600", "ETag": f'"{catalog_version}"'},
        )

    @app.post("/api/predict")
    def post_predict(submission: PredictRequest):
        counters.bump("requests_total")
        if model is None:
            return JSONResponse(status_code=503, content={"detail": "model not loaded"})
        if catalog is None:
            return JSONResponse(status_code=503, content={"detail": "catalog not loaded"})
        try:
            vector = build_feature_vector(catalog, submission.answers)
        except SubmissionError as exc:
            counters.bump("invalid_total")
            return JSONResponse(
                status_code=400,
                content={"detail": str(exc), "question": exc.question_id},
            )
        counters.bump("predictions_total")
        result = predict(model, vector)
        return PredictResponse(
            probability_yes=result.probability_yes,
            label=result.label,
            model_id=model_id,
            catalog_version=catalog_version,
        )

    @app.get("/api/health")
    def get_health():
        ok = model is not None and catalog is not None
        return {
            "status": "ok" if ok else "degraded",
            "model_id": model_id,
            "catalog_version": catalog_version,
        }

    @app.get("/api/metrics")
    def get_metrics():
        return counters.snapshot()

    return app
