"""Procedural desk-scale corpus: nine geometric shape families rendered as
small PPM images, with fill colors drawn from one shared palette so color
alone cannot identify a family."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classifier import CATEGORY_NAMES
from .imagecore import RasterImage, encode_ppm

SHAPE_KINDS = (
    "disk", "ring", "rect", "frame", "cross",
    "hbars", "grid", "twodisks", "triangle",
)

# Bright on dark backgrounds in every channel so thresholding is stable.
_PALETTE = (
    (250, 120, 90),
    (120, 240, 110),
    (140, 160, 250),
    (240, 220, 90),
    (230, 120, 230),
)


@dataclass(frozen=True)
class CorpusImage:
    payload: bytes
    kind: str
    label: str
    name: str


def _mask(kind: str, size: int, cy: float, cx: float, s: float) -> np.ndarray:
    """Shape geometries are tuned so classes occupy distinct outline-mass
    bands as well as distinct spectra."""
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    dy = yy - cy
    dx = xx - cx
    r = np.sqrt(dy**2 + dx**2)
    u = size / 64.0
    if kind == "disk":
        return r <= 13 * s * u
    if kind == "ring":
        return (r >= 13 * s * u) & (r <= 18 * s * u)
    if kind == "rect":
        return (np.abs(dx) <= 18 * s * u) & (np.abs(dy) <= 9 * s * u)
    if kind == "frame":
        outer = (np.abs(dx) <= 19 * s * u) & (np.abs(dy) <= 10 * s * u)
        inner = (np.abs(dx) <= 13 * s * u) & (np.abs(dy) <= 5 * s * u)
        return outer & ~inner
    if kind == "cross":
        arm = 20 * s * u
        thick = 3 * s * u
        return ((np.abs(dx) <= thick) & (np.abs(dy) <= arm)) | (
            (np.abs(dy) <= thick) & (np.abs(dx) <= arm)
        )
    if kind == "hbars":
        gap = 8 * s * u
        half = 2.5 * s * u
        return (np.abs(dx) <= 17 * s * u) & (
            (np.abs(dy + 1.5 * gap) <= half)
            | (np.abs(dy + 0.5 * gap) <= half)
            | (np.abs(dy - 0.5 * gap) <= half)
            | (np.abs(dy - 1.5 * gap) <= half)
        )
    if kind == "grid":
        box = (np.abs(dx) <= 17 * s * u) & (np.abs(dy) <= 17 * s * u)
        period = 9 * s * u
        lines = (np.abs(np.remainder(dx + 17 * s * u, period) - period / 2)
                 >= period / 2 - 1.8 * s * u) | (
            np.abs(np.remainder(dy + 17 * s * u, period) - period / 2)
            >= period / 2 - 1.8 * s * u
        )
        return box & lines
    if kind == "twodisks":
        off = 10 * s * u
        r1 = np.sqrt(dy**2 + (dx + off) ** 2)
        r2 = np.sqrt(dy**2 + (dx - off) ** 2)
        return (r1 <= 8.5 * s * u) | (r2 <= 8.5 * s * u)
    if kind == "triangle":
        h = 10 * s * u
        return (dy >= -h) & (dy <= h) & (np.abs(dx) <= (dy + h) * (2.0 / 3.0))
    raise ValueError(f"unknown shape kind {kind!r}")


def render_shape(kind: str, rng: np.random.Generator, size: int = 64,
                 fill=None) -> RasterImage:
    """One noisy image of the given shape family with jittered placement."""
    cy = size / 2 + rng.uniform(-4, 4) * size / 64
    cx = size / 2 + rng.uniform(-4, 4) * size / 64
    scale = rng.uniform(0.95, 1.05)
    mask = _mask(kind, size, cy, cx, scale)
    base = rng.uniform(25, 55)
    pixels = base + rng.uniform(-12, 12, size=(size, size, 3))
    if fill is None:
        fill = _PALETTE[int(rng.integers(len(_PALETTE)))]
    color = np.array(fill, dtype=np.float64) + rng.uniform(-12, 12, size=3)
    pixels[mask] = color + rng.uniform(-8, 8, size=(int(mask.sum()), 3))
    return RasterImage(np.clip(np.rint(pixels), 0, 255).astype(np.uint8))


def _encode(img: RasterImage, image_format: str) -> bytes:
    if image_format == "ppm":
        return encode_ppm(img)
    if image_format == "png":
        # browsers render PNG thumbnails; PPM stays the bit-exact default
        import io

        from PIL import Image

        buf = io.BytesIO()
        Image.fromarray(img.pixels, "RGB").save(buf, format="PNG")
        return buf.getvalue()
    raise ValueError(f"unsupported corpus format {image_format!r}")


def generate_corpus(seed: int, per_class: int, kinds=SHAPE_KINDS,
                    size: int = 64, image_format: str = "ppm") -> list[CorpusImage]:
    """Deterministic labeled corpus: `per_class` images per shape family.

    Shape family i is labeled with category name i, so the family carries
    the ground truth while the colors stay uninformative.
    """
    rng = np.random.default_rng(seed)
    images = []
    for kind_index, kind in enumerate(kinds):
        label = CATEGORY_NAMES[kind_index]
        for n in range(per_class):
            img = render_shape(kind, rng, size=size)
            images.append(
                CorpusImage(
                    payload=_encode(img, image_format),
                    kind=kind,
                    label=label,
                    name=f"{kind}_{n:03d}.{image_format}",
                )
            )
    return images


def write_corpus(directory: str | Path, images: list[CorpusImage]) -> Path:
    """Write images plus a labels.csv of (filename, category) rows."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    labels_path = directory / "labels.csv"
    with open(labels_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for image in images:
            (directory / image.name).write_bytes(image.payload)
            writer.writerow([image.name, image.label])
    return labels_path
