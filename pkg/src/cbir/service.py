"""HTTP service: enrollment, query, feedback, browsing and blob serving,
with the built web client served statically when present."""

from __future__ import annotations

import base64
import binascii
import json
from contextlib import asynccontextmanager
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field, ValidationError

from . import errors
from .classifier import CATEGORIES
from .engine import Engine
from .imagecore import MEDIA_TYPES
from .retrieval import QueryParams
from .store import Store


class CategoryModel(BaseModel):
    code: int
    name: str


class EnrollRequest(BaseModel):
    image_b64: str
    keywords: list[str] = Field(default_factory=list)
    metadata: dict[str, str] = Field(default_factory=dict)
    label: str | None = None


class EnrollResponse(BaseModel):
    image_id: int
    category: str
    category_code: int
    probs: list[float]


class QueryRequest(BaseModel):
    image_b64: str
    top_k: int = Field(default=10, ge=1)
    threshold: float = Field(default=0.5, ge=0.0, le=1.0)


class ResultModel(BaseModel):
    image_id: int
    color_sim: float
    texture_sim: float
    score: float
    rank: int
    url: str


class QueryResponse(BaseModel):
    query_id: int
    predicted_category: str
    predicted_code: int
    comparisons: int
    results: list[ResultModel]


class FeedbackRequest(BaseModel):
    query_id: int
    image_id: int
    polarity: Literal["positive", "negative"]


class FeedbackResponse(BaseModel):
    reassigned: bool
    new_category: str | None = None


class ImageMetaResponse(BaseModel):
    image_id: int
    category: str | None
    category_code: int | None
    format: str
    keywords: list[str]
    metadata: dict[str, str]
    enroll_probs: list[float]
    vetoed: list[int]


class SearchHit(BaseModel):
    image_id: int
    category: str | None
    keywords: list[str]
    url: str


class SearchResponse(BaseModel):
    results: list[SearchHit]


class HealthResponse(BaseModel):
    status: str
    records: int
    trained: bool
    normalization_fitted: bool


_STATUS_BY_ERROR = (
    (errors.DuplicateFeedback, 409),
    (errors.UnfittedNormalization, 409),
    (errors.UntrainedClassifier, 503),
    (errors.EmptyShape, 422),
    (errors.UnknownQuery, 404),
    (errors.UnknownImage, 404),
    (errors.NotFound, 404),
    (errors.UnsupportedFormat, 400),
    (errors.CorruptPayload, 400),
)


def _status_for(exc: errors.CbirError) -> int:
    for klass, status in _STATUS_BY_ERROR:
        if isinstance(exc, klass):
            return status
    return 500


def _category_name(code: int | None) -> str | None:
    return None if code is None else CATEGORIES[code].name


def _decode_b64(data: str) -> bytes:
    try:
        return base64.b64decode(data, validate=True)
    except (binascii.Error, ValueError):
        raise errors.CorruptPayload("invalid base64 image payload")


async def _payload_from_request(request: Request) -> tuple[bytes, dict]:
    """Accept either multipart (file field plus form fields) or JSON with a
    base64 image; returns (payload, extra fields)."""
    content_type = request.headers.get("content-type", "")
    if content_type.startswith("multipart/form-data"):
        form = await request.form()
        upload = form.get("file")
        if upload is None:
            raise errors.CorruptPayload("multipart form needs a 'file' field")
        payload = await upload.read()
        extra = {key: form[key] for key in form if key != "file"}
        if "keywords" in extra:
            extra["keywords"] = [t for t in str(extra["keywords"]).split() if t]
        if "metadata" in extra:
            try:
                extra["metadata"] = json.loads(str(extra["metadata"]))
            except json.JSONDecodeError:
                raise errors.CorruptPayload("metadata form field must be JSON")
        return payload, extra
    try:
        body = await request.json()
    except json.JSONDecodeError:
        raise errors.CorruptPayload("body is neither multipart nor valid JSON")
    return None, body


def create_app(store_path: str | Path, static_dir: str | Path | None = None) -> FastAPI:
    """Build the service around one store file."""

    state: dict = {}

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        state["store"] = Store(store_path)
        state["engine"] = Engine(state["store"])
        try:
            yield
        finally:
            state["store"].close()

    app = FastAPI(title="cbir", lifespan=lifespan)

    def engine() -> Engine:
        return state["engine"]

    @app.exception_handler(errors.CbirError)
    async def _cbir_error_handler(_request: Request, exc: errors.CbirError):
        return JSONResponse(
            status_code=_status_for(exc),
            content={"detail": f"{type(exc).__name__}: {exc}"},
        )

    @app.get("/healthz", response_model=HealthResponse)
    def healthz():
        eng = engine()
        return HealthResponse(
            status="ok",
            records=eng.store.count_records(),
            trained=eng.is_trained(),
            normalization_fitted=eng.is_normalized(),
        )

    @app.get("/categories", response_model=list[CategoryModel])
    def categories():
        return [CategoryModel(code=c.code, name=c.name) for c in CATEGORIES]

    @app.post("/images", response_model=EnrollResponse)
    async def enroll(request: Request):
        payload, extra = await _payload_from_request(request)
        if payload is None:
            try:
                parsed = EnrollRequest.model_validate(extra)
            except ValidationError as exc:
                return JSONResponse(status_code=400, content={"detail": str(exc)})
            payload = _decode_b64(parsed.image_b64)
            keywords, metadata, label = parsed.keywords, parsed.metadata, parsed.label
        else:
            keywords = extra.get("keywords", [])
            metadata = extra.get("metadata", {})
            label = extra.get("label")
        outcome = engine().enroll(payload, keywords=keywords, metadata=metadata, label=label)
        return EnrollResponse(
            image_id=outcome.image_id,
            category=outcome.category.name,
            category_code=outcome.category.code,
            probs=[float(p) for p in outcome.probs],
        )

    @app.get("/images/{image_id}")
    def fetch_blob(image_id: int):
        record = engine().store.get_record(image_id)
        media = MEDIA_TYPES.get(record.format, "application/octet-stream")
        return Response(content=record.blob, media_type=media)

    @app.get("/images/{image_id}/meta", response_model=ImageMetaResponse)
    def fetch_meta(image_id: int):
        record = engine().store.get_record(image_id)
        return ImageMetaResponse(
            image_id=image_id,
            category=_category_name(record.category_code),
            category_code=record.category_code,
            format=record.format,
            keywords=record.keywords,
            metadata=record.metadata,
            enroll_probs=[float(p) for p in record.enroll_probs],
            vetoed=sorted(record.vetoed),
        )

    @app.post("/query", response_model=QueryResponse)
    async def query(request: Request):
        payload, extra = await _payload_from_request(request)
        if payload is None:
            try:
                parsed = QueryRequest.model_validate(extra)
            except ValidationError as exc:
                return JSONResponse(status_code=400, content={"detail": str(exc)})
            payload = _decode_b64(parsed.image_b64)
            top_k, threshold = parsed.top_k, parsed.threshold
        else:
            top_k = int(extra.get("top_k", 10))
            threshold = float(extra.get("threshold", 0.5))
        outcome = engine().query(
            payload, QueryParams(top_k=top_k, threshold=threshold)
        )
        return QueryResponse(
            query_id=outcome.query_id,
            predicted_category=outcome.category.name,
            predicted_code=outcome.category.code,
            comparisons=outcome.comparisons,
            results=[
                ResultModel(
                    image_id=r.image_id,
                    color_sim=r.color_sim,
                    texture_sim=r.texture_sim,
                    score=r.score,
                    rank=r.rank,
                    url=f"/images/{r.image_id}",
                )
                for r in outcome.results
            ],
        )

    @app.post("/feedback", response_model=FeedbackResponse)
    def feedback(body: FeedbackRequest):
        reassigned, new_category = engine().feedback(
            body.query_id, body.image_id, body.polarity
        )
        return FeedbackResponse(
            reassigned=reassigned,
            new_category=None if new_category is None else new_category.name,
        )

    @app.get("/search", response_model=SearchResponse)
    def search(keywords: str = ""):
        tokens = [t for t in keywords.replace(",", " ").split() if t]
        hits = []
        store = engine().store
        for image_id in store.search_keywords(tokens):
            record = store.get_record(image_id)
            hits.append(
                SearchHit(
                    image_id=image_id,
                    category=_category_name(record.category_code),
                    keywords=record.keywords,
                    url=f"/images/{image_id}",
                )
            )
        return SearchResponse(results=hits)

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
