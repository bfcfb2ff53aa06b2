"""Fourier shape descriptor: smooth, binarize, trace edges, skeletonize,
then keep the 30 dominant log-spectrum coefficients."""

from __future__ import annotations

import os

import numpy as np

from . import imagecore, numerics
from .errors import ConstantChannel, EmptyShape
from .imagecore import RasterImage

SHAPE_DIM = 30
SMOOTH_LEVELS = 2
SMOOTH_PAD_BLOCK = 1 << SMOOTH_LEVELS

# Fixed spectrum grid so descriptors from different image sizes are comparable
# and the radix-2 FFT always applies.
FFT_SIDE = 128


def _dump(dump_dir: str, name: str, matrix: np.ndarray) -> None:
    lo, hi = float(matrix.min()), float(matrix.max())
    scaled = (matrix - lo) * (255.0 / (hi - lo)) if hi > lo else np.zeros_like(matrix)
    path = os.path.join(dump_dir, name + ".pgm")
    with open(path, "wb") as fh:
        fh.write(imagecore.encode_pgm(scaled))


def smoothed_grayscale(img: RasterImage) -> np.ndarray:
    """Low-pass reconstruction: two-level Haar pyramid rebuilt from its
    approximation alone (detail triples zeroed)."""
    gray = imagecore.to_grayscale(imagecore.cap_longer_side(img))
    padded = imagecore.pad_square_block(gray, SMOOTH_PAD_BLOCK)
    dec = numerics.dwt2_multilevel(padded, SMOOTH_LEVELS)
    return numerics.idwt2(dec.with_zeroed_details())


def skeletonize(smooth: np.ndarray) -> np.ndarray:
    """Binary skeleton of the dominant shape in a smoothed channel."""
    try:
        binary = imagecore.binarize_otsu(smooth)
    except ConstantChannel:
        raise EmptyShape("image has a single intensity; no shape exists")
    edges = imagecore.sobel_edges(binary)
    skeleton = imagecore.morph_skeleton(edges)
    if not skeleton.any():
        raise EmptyShape("skeleton has no foreground pixels")
    return skeleton


def shape_descriptor(img: RasterImage, dump_dir: str | None = None) -> np.ndarray:
    """30 dominant spectrum coefficients of the shape skeleton.

    The skeleton is resampled onto a fixed 128x128 grid, transformed with a
    centered FFT, mapped through log(1 + |F|), and the 30 largest values
    (row-major order on ties) are returned sorted descending and divided by
    the largest, so the first entry is always 1.0.
    """
    smooth = smoothed_grayscale(img)
    skeleton = skeletonize(smooth)
    grid = imagecore.resize_binary_nearest(skeleton, FFT_SIDE, FFT_SIDE)
    if not grid.any():
        raise EmptyShape("skeleton vanished during resampling")
    spectrum = numerics.fftshift(numerics.fft2(grid.astype(np.float64)))
    log_mag = np.log1p(np.abs(spectrum))
    if dump_dir is not None:
        _dump(dump_dir, "01_smoothed", smooth)
        try:
            _dump(dump_dir, "02_binary", imagecore.binarize_otsu(smooth).astype(np.float64) * 255)
        except ConstantChannel:
            pass
        _dump(dump_dir, "03_edges", imagecore.sobel_edges(imagecore.binarize_otsu(smooth)).astype(np.float64) * 255)
        _dump(dump_dir, "04_skeleton", skeleton.astype(np.float64) * 255)
        _dump(dump_dir, "05_log_spectrum", log_mag)
    flat = log_mag.ravel()
    # stable sort keeps earlier row-major positions first among ties
    order = np.argsort(-flat, kind="stable")[:SHAPE_DIM]
    top = flat[order]
    return top / top[0]
