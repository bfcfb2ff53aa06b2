"""Application facade tying the feature pipelines, classifier, retrieval and
store together; both the HTTP service and the CLI sit on top of this."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import classifier, color_features, retrieval, shape_pipeline, texture_features
from .classifier import Category, NetworkWeights, TrainConfig, category_by_name
from .errors import NotFound, UntrainedClassifier
from .imagecore import decode_image, detect_format
from .retrieval import FeedbackEvent, QueryOutcome, QueryParams
from .store import ImageRecord, Store


@dataclass(frozen=True)
class EnrollOutcome:
    image_id: int
    category: Category | None
    probs: np.ndarray


class Engine:
    """One engine per open store."""

    def __init__(self, store: Store):
        self.store = store

    # -- classifier lifecycle ---------------------------------------------

    def load_weights(self) -> NetworkWeights:
        try:
            return classifier.deserialize(self.store.load_weights())
        except NotFound:
            raise UntrainedClassifier("no weights stored; run training first")

    def is_trained(self) -> bool:
        try:
            self.store.load_weights()
            return True
        except NotFound:
            return False

    def is_normalized(self) -> bool:
        try:
            self.store.load_normalization()
            return True
        except NotFound:
            return False

    def train(
        self,
        labeled_payloads,
        seed: int = 7,
        hidden: int = 24,
        cfg: TrainConfig = TrainConfig(),
        required_categories=None,
    ) -> list[float]:
        """Extract shape descriptors from (payload, category_name) pairs,
        train from a fresh seeded initialization, and persist the weights."""
        samples = []
        seen = []
        for payload, label in labeled_payloads:
            category = category_by_name(label)
            descriptor = shape_pipeline.shape_descriptor(decode_image(payload))
            samples.append((descriptor, category))
            seen.append(category)
        if required_categories is None:
            required_categories = classifier.CATEGORIES
        weights = classifier.init_network(seed, hidden)
        trained, history = classifier.train(
            weights, samples, cfg, required_categories=required_categories
        )
        self.store.save_weights(classifier.serialize(trained))
        return history

    def fit_normalization(self) -> retrieval.CorpusNormalization:
        norm = retrieval.fit_normalization(self.store.all_vectors())
        self.store.save_normalization(retrieval.serialize_normalization(norm))
        return norm

    # -- enrollment, query, feedback ----------------------------------------

    def enroll(
        self,
        payload: bytes,
        keywords=(),
        metadata=None,
        label: str | None = None,
    ) -> EnrollOutcome:
        """Run all three extractors and persist a full record.

        The stored category is the supplied label when present, otherwise the
        classifier's prediction; the prediction distribution is stored either
        way for the feedback rule.
        """
        weights = self.load_weights()
        img = decode_image(payload)
        descriptor = shape_pipeline.shape_descriptor(img)
        predicted, probs = classifier.predict_category(weights, descriptor)
        category = category_by_name(label) if label is not None else predicted
        record = ImageRecord(
            blob=payload,
            format=detect_format(payload),
            category_code=category.code,
            enroll_probs=probs,
            color_vec=color_features.color_vector(img),
            texture_vec=texture_features.texture_vector(img),
            shape_vec=descriptor,
            keywords=list(keywords),
            metadata=dict(metadata or {}),
        )
        image_id = self.store.put_record(record)
        return EnrollOutcome(image_id=image_id, category=category, probs=probs)

    def query(self, payload: bytes, params: QueryParams = QueryParams()) -> QueryOutcome:
        return retrieval.query(decode_image(payload), self.store, params)

    def feedback(self, query_id: int, image_id: int, polarity: str):
        event = FeedbackEvent(query_id=query_id, image_id=image_id, polarity=polarity)
        return retrieval.apply_feedback(event, self.store)
