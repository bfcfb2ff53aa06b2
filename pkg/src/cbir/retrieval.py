"""Similarity search: min-max normalization, Euclidean similarities fused by
harmonic mean, category-gated thresholded ranking, and the relevance-feedback
rule that can reassign an image's category."""

from __future__ import annotations

import struct
import time
from dataclasses import dataclass, field

import numpy as np

from . import color_features, shape_pipeline, texture_features
from .classifier import Category, category_by_code, deserialize, predict_category
from .errors import (
    Corrupt,
    DimMismatch,
    DuplicateFeedback,
    EmptyCorpus,
    NegativeDistance,
    NotFound,
    UnfittedNormalization,
    UnknownImage,
    UnknownQuery,
    UntrainedClassifier,
    VersionMismatch,
)
from .imagecore import RasterImage
from .store import Store

# Negative strikes against one category before an image is reassigned.
REASSIGN_STRIKES = 3


@dataclass(frozen=True)
class CorpusNormalization:
    """Per-dimension min/max over the enrolled corpus."""

    color_min: np.ndarray
    color_max: np.ndarray
    texture_min: np.ndarray
    texture_max: np.ndarray
    fitted_on: int


@dataclass(frozen=True)
class QueryParams:
    top_k: int = 10
    threshold: float = 0.5
    # Gating is the normal mode; the ungated path exists for ablation
    # experiments and is not reachable through the service API.
    gated: bool = True

    def as_dict(self) -> dict:
        return {"top_k": self.top_k, "threshold": self.threshold, "gated": self.gated}


@dataclass(frozen=True)
class QueryResult:
    image_id: int
    color_sim: float
    texture_sim: float
    score: float
    rank: int


@dataclass(frozen=True)
class QueryOutcome:
    query_id: int
    category: Category
    probs: np.ndarray
    results: tuple[QueryResult, ...]
    comparisons: int


@dataclass(frozen=True)
class FeedbackEvent:
    query_id: int
    image_id: int
    polarity: str
    timestamp: float = field(default_factory=time.time)

    def __post_init__(self):
        if self.polarity not in ("positive", "negative"):
            raise ValueError("polarity must be 'positive' or 'negative'")


# ---------------------------------------------------------------------------
# normalization and similarity primitives
# ---------------------------------------------------------------------------

def fit_normalization(vector_pairs) -> CorpusNormalization:
    """Per-dimension min and max of all (color, texture) vector pairs."""
    pairs = list(vector_pairs)
    if not pairs:
        raise EmptyCorpus("no enrolled records to fit on")
    colors = np.stack([np.asarray(c, dtype=np.float64) for c, _ in pairs])
    textures = np.stack([np.asarray(t, dtype=np.float64) for _, t in pairs])
    return CorpusNormalization(
        color_min=colors.min(axis=0),
        color_max=colors.max(axis=0),
        texture_min=textures.min(axis=0),
        texture_max=textures.max(axis=0),
        fitted_on=len(pairs),
    )


def normalize(v: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Map v into [0, 1] per dimension; degenerate dimensions map to 0."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != lo.shape or v.shape != hi.shape:
        raise DimMismatch(f"vector shape {v.shape} does not match bounds")
    span = hi - lo
    out = np.zeros_like(v)
    ok = span > 0
    out[ok] = (v[ok] - lo[ok]) / span[ok]
    return np.clip(out, 0.0, 1.0)


def euclidean(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimMismatch(f"shapes {a.shape} and {b.shape} differ")
    diff = a - b
    return float(np.sqrt(diff @ diff))


def similarity(distance: float) -> float:
    """Bounded, strictly decreasing map 1 / (1 + d); a zero distance is 1."""
    if distance < 0:
        raise NegativeDistance(f"distance {distance} is negative")
    return 1.0 / (1.0 + distance)


def fuse_harmonic(s_color: float, s_texture: float) -> float:
    """Harmonic mean of the two similarities; 0 when both are 0."""
    if s_color == 0.0 and s_texture == 0.0:
        return 0.0
    return 2.0 * s_color * s_texture / (s_color + s_texture)


# ---------------------------------------------------------------------------
# normalization persistence
# ---------------------------------------------------------------------------

_NORM_MAGIC = b"CBNM"
_NORM_VERSION = 1
_NORM_HEADER = struct.Struct("<4sBQ")
_NORM_ARRAYS = ("color_min", "color_max", "texture_min", "texture_max")
_NORM_DIMS = (30, 30, 39, 39)


def serialize_normalization(n: CorpusNormalization) -> bytes:
    header = _NORM_HEADER.pack(_NORM_MAGIC, _NORM_VERSION, n.fitted_on)
    body = b"".join(
        getattr(n, name).astype("<f8").tobytes() for name in _NORM_ARRAYS
    )
    return header + body


def deserialize_normalization(payload: bytes) -> CorpusNormalization:
    if len(payload) < _NORM_HEADER.size:
        raise Corrupt("normalization payload too short")
    magic, version, fitted_on = _NORM_HEADER.unpack_from(payload)
    if magic != _NORM_MAGIC:
        raise Corrupt("bad normalization magic")
    if version != _NORM_VERSION:
        raise VersionMismatch(f"unsupported normalization version {version}")
    expected = _NORM_HEADER.size + 8 * sum(_NORM_DIMS)
    if len(payload) != expected:
        raise Corrupt(f"expected {expected} bytes, got {len(payload)}")
    offset = _NORM_HEADER.size
    arrays = {}
    for name, dim in zip(_NORM_ARRAYS, _NORM_DIMS):
        arrays[name] = np.frombuffer(payload, dtype="<f8", count=dim, offset=offset).copy()
        offset += 8 * dim
    return CorpusNormalization(fitted_on=int(fitted_on), **arrays)


# ---------------------------------------------------------------------------
# query and feedback
# ---------------------------------------------------------------------------

def _load_weights(store: Store):
    try:
        return deserialize(store.load_weights())
    except NotFound:
        raise UntrainedClassifier("train the classifier before querying")


def _load_normalization(store: Store) -> CorpusNormalization:
    try:
        return deserialize_normalization(store.load_normalization())
    except NotFound:
        raise UnfittedNormalization("fit normalization before querying")


def query(img: RasterImage, store: Store, params: QueryParams = QueryParams()) -> QueryOutcome:
    """Classify the query image, then rank enrolled images of that category.

    Images outside the predicted category are never compared when gating is
    on; `comparisons` counts the records actually measured.
    """
    weights = _load_weights(store)
    norm = _load_normalization(store)
    descriptor = shape_pipeline.shape_descriptor(img)
    category, probs = predict_category(weights, descriptor)
    q_color = normalize(color_features.color_vector(img), norm.color_min, norm.color_max)
    q_texture = normalize(
        texture_features.texture_vector(img), norm.texture_min, norm.texture_max
    )
    candidates = store.feature_rows(category.code, gated=params.gated)
    scored = []
    comparisons = 0
    for image_id, color_vec, texture_vec in candidates:
        comparisons += 1
        s_color = similarity(
            euclidean(q_color, normalize(color_vec, norm.color_min, norm.color_max))
        )
        s_texture = similarity(
            euclidean(q_texture, normalize(texture_vec, norm.texture_min, norm.texture_max))
        )
        score = fuse_harmonic(s_color, s_texture)
        if score >= params.threshold:
            scored.append((image_id, s_color, s_texture, score))
    scored.sort(key=lambda item: (-item[3], item[0]))
    top = scored[: params.top_k]
    results = tuple(
        QueryResult(image_id=i, color_sim=sc, texture_sim=st, score=s, rank=rank)
        for rank, (i, sc, st, s) in enumerate(top, start=1)
    )
    query_id = store.put_query(category.code, params.as_dict())
    return QueryOutcome(
        query_id=query_id,
        category=category,
        probs=probs,
        results=results,
        comparisons=comparisons,
    )


def apply_feedback(event: FeedbackEvent, store: Store) -> tuple[bool, Category | None]:
    """Persist one feedback event and apply the category update rule.

    Positive feedback clears the image's negative strikes for the query's
    category. The third negative strike vetoes that category and reassigns
    the image to its best non-vetoed enrollment category; with all nine
    vetoed the image becomes uncategorized and leaves gated search.

    Returns (reassigned, new category or None).
    """
    try:
        query_rec = store.get_query(event.query_id)
    except NotFound:
        raise UnknownQuery(f"no query {event.query_id}")
    try:
        record = store.get_record(event.image_id)
    except NotFound:
        raise UnknownImage(f"no image {event.image_id}")
    if store.has_feedback(event.query_id, event.image_id):
        raise DuplicateFeedback(
            f"feedback for query {event.query_id} image {event.image_id} already recorded"
        )
    store.add_feedback(event.query_id, event.image_id, event.polarity)
    context = query_rec.predicted_category
    neg_counts = dict(record.neg_counts)
    if event.polarity == "positive":
        if neg_counts.pop(context, None) is not None:
            store.update_category(
                event.image_id, record.category_code, record.vetoed, neg_counts
            )
        return False, None
    strikes = neg_counts.get(context, 0) + 1
    neg_counts[context] = strikes
    if strikes < REASSIGN_STRIKES:
        store.update_category(
            event.image_id, record.category_code, record.vetoed, neg_counts
        )
        return False, None
    vetoed = set(record.vetoed) | {context}
    ranked = sorted(
        range(len(record.enroll_probs)),
        key=lambda code: (-record.enroll_probs[code], code),
    )
    new_code = next((code for code in ranked if code not in vetoed), None)
    store.update_category(event.image_id, new_code, vetoed, neg_counts)
    return True, None if new_code is None else category_by_code(new_code)
