"""39-dimensional texture vector: four-level Haar decomposition of each
padded RGB channel, one spectral radius per sub-band."""

from __future__ import annotations

import numpy as np

from . import imagecore, numerics
from .errors import FeatureExtractionFailure, NoConvergence
from .imagecore import RasterImage

TEXTURE_LEVELS = 4
TEXTURE_PAD_BLOCK = 1 << TEXTURE_LEVELS
TEXTURE_DIM = 3 * (3 * TEXTURE_LEVELS + 1)

_CHANNEL_NAMES = ("red", "green", "blue")


def channel_texture(ch: np.ndarray) -> np.ndarray:
    """13 sub-band spectral radii for one channel.

    Order: deepest approximation first, then (hl, lh, hh) for levels 1..4.
    """
    padded = imagecore.pad_square_block(ch, TEXTURE_PAD_BLOCK)
    dec = numerics.dwt2_multilevel(padded, TEXTURE_LEVELS)
    radii = []
    for index, band in enumerate(dec.matrices()):
        try:
            radii.append(numerics.spectral_radius(band))
        except NoConvergence as exc:
            raise FeatureExtractionFailure(
                f"eigen iteration failed on sub-band {index}"
            ) from exc
    return np.array(radii, dtype=np.float64)


def texture_vector(img: RasterImage) -> np.ndarray:
    """39 texture features: 13 sub-band radii per channel, R then G then B."""
    capped = imagecore.cap_longer_side(img)
    parts = []
    for name, ch in zip(_CHANNEL_NAMES, imagecore.split_channels(capped)):
        try:
            parts.append(channel_texture(ch))
        except FeatureExtractionFailure as exc:
            raise FeatureExtractionFailure(f"{name} channel: {exc}") from exc
    return np.concatenate(parts)
