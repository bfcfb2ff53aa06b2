"""Content-based image retrieval: color, texture and shape features with a
neural category gate, persistent enrollment, and relevance feedback."""

from .classifier import CATEGORIES, CATEGORY_NAMES, Category, NetworkWeights
from .engine import Engine, EnrollOutcome
from .imagecore import RasterImage, decode_image
from .retrieval import FeedbackEvent, QueryOutcome, QueryParams, QueryResult
from .store import ImageRecord, Store

__all__ = [
    "CATEGORIES",
    "CATEGORY_NAMES",
    "Category",
    "Engine",
    "EnrollOutcome",
    "FeedbackEvent",
    "ImageRecord",
    "NetworkWeights",
    "QueryOutcome",
    "QueryParams",
    "QueryResult",
    "RasterImage",
    "Store",
    "decode_image",
]

__version__ = "0.1.0"
