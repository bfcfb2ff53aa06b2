"""Shared fixtures: tiny deterministic images plus session-scoped trained
engines (built lazily because enrollment is the expensive part)."""

from __future__ import annotations

import numpy as np
import pytest

from cbir import synthcorpus
from cbir.classifier import TrainConfig
from cbir.engine import Engine
from cbir.imagecore import RasterImage, encode_ppm
from cbir.store import Store

# Training configs pinned by the desk-scale experiments.
FIXTURE_TRAIN_CFG = TrainConfig(rate=0.3, batch_size=8, max_epochs=40000, target_loss=0.01)
FIXTURE_SEED = 11
FIXTURE_SIZE = 128


def solid_image(r: int, g: int, b: int, h: int = 8, w: int = 8) -> RasterImage:
    pixels = np.zeros((h, w, 3), dtype=np.uint8)
    pixels[:, :, 0] = r
    pixels[:, :, 1] = g
    pixels[:, :, 2] = b
    return RasterImage(pixels)


def disk_image(size: int = 128, center=(None, None), radius: float = 26.0,
               fill=(235, 235, 235), bg: int = 30) -> RasterImage:
    cy = size / 2 if center[0] is None else center[0]
    cx = size / 2 if center[1] is None else center[1]
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    mask = (yy - cy) ** 2 + (xx - cx) ** 2 <= radius**2
    pixels = np.full((size, size, 3), bg, dtype=np.uint8)
    pixels[mask] = fill
    return RasterImage(pixels)


@pytest.fixture(scope="session")
def corpus45():
    """45-image fixture: 5 per class, 9 shape classes."""
    return synthcorpus.generate_corpus(seed=FIXTURE_SEED, per_class=5, size=FIXTURE_SIZE)


@pytest.fixture(scope="session")
def trained_engine(corpus45, tmp_path_factory):
    """Store with the 45-image corpus enrolled under true labels, classifier
    trained on the same corpus, normalization fitted."""
    store = Store(tmp_path_factory.mktemp("fixture") / "corpus.db")
    engine = Engine(store)
    engine.train(
        [(im.payload, im.label) for im in corpus45],
        seed=7, hidden=48, cfg=FIXTURE_TRAIN_CFG,
    )
    ids = {}
    for im in corpus45:
        outcome = engine.enroll(
            im.payload,
            keywords=[im.kind],
            metadata={"truth": im.label, "source": im.name},
            label=im.label,
        )
        ids[im.name] = outcome.image_id
    engine.fit_normalization()
    yield engine, ids
    store.close()


@pytest.fixture(scope="session")
def mini_corpus():
    """Small 3-class corpus for fast service and CLI style tests."""
    return synthcorpus.generate_corpus(
        seed=3, per_class=3, kinds=("disk", "rect", "cross"), size=64
    )


@pytest.fixture(scope="session")
def _mini_store_template(mini_corpus, tmp_path_factory):
    """Build the mini store once; tests work on per-test copies."""
    from cbir.classifier import CATEGORIES

    path = tmp_path_factory.mktemp("mini") / "mini.db"
    store = Store(path)
    engine = Engine(store)
    engine.train(
        [(im.payload, im.label) for im in mini_corpus],
        seed=5,
        hidden=16,
        cfg=TrainConfig(rate=0.3, batch_size=4, max_epochs=200, target_loss=0.01),
        required_categories=CATEGORIES[:3],
    )
    ids = {}
    for im in mini_corpus:
        outcome = engine.enroll(im.payload, keywords=[im.kind, "sample"],
                                metadata={"source": im.name})
        ids[im.name] = outcome.image_id
    engine.fit_normalization()
    store.close()
    return path, ids


@pytest.fixture()
def mini_store_path(_mini_store_template, tmp_path):
    """Fresh copy of the prebuilt mini store for tests that mutate it."""
    import shutil

    template, ids = _mini_store_template
    path = tmp_path / "mini.db"
    shutil.copy(template, path)
    return path, ids


@pytest.fixture()
def mini_engine(mini_store_path):
    """Engine over an isolated copy of the mini store; enrolled without
    labels so stored categories always match query-time predictions."""
    path, ids = mini_store_path
    store = Store(path)
    yield Engine(store), ids
    store.close()


def blank_ppm(size: int = 32, value: int = 128) -> bytes:
    return encode_ppm(solid_image(value, value, value, size, size))
