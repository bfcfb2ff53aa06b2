"""Pixel-level primitives: decoding, channels, resizing, binarization, morphology.

Conventions used throughout the package:

* a channel matrix is a 2D float64 ndarray (row-major, finite values),
* a binary image is a 2D bool ndarray (True = foreground),
* raster pixels are 8-bit RGB triples wrapped in :class:`RasterImage`.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConstantChannel,
    CorruptPayload,
    TooSmall,
    UnsupportedFormat,
)

# Longer image side above which inputs are downscaled before feature extraction.
SIZE_CAP = 512

_LUMA_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass(frozen=True)
class RasterImage:
    """Decoded 8-bit RGB image, pixels shaped (height, width, 3)."""

    pixels: np.ndarray

    def __post_init__(self):
        p = self.pixels
        if not isinstance(p, np.ndarray) or p.ndim != 3 or p.shape[2] != 3:
            raise ValueError("pixels must be an (h, w, 3) array")
        if p.dtype != np.uint8:
            raise ValueError("pixels must be uint8")
        if p.shape[0] < 1 or p.shape[1] < 1:
            raise ValueError("image must be at least 1x1")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class StructuringElement:
    """Origin-symmetric set of (row, col) offsets containing (0, 0)."""

    offsets: tuple[tuple[int, int], ...]

    def __post_init__(self):
        offs = set(self.offsets)
        if not offs:
            raise ValueError("structuring element must be non-empty")
        if (0, 0) not in offs:
            raise ValueError("structuring element must contain the origin")
        for dr, dc in offs:
            if (-dr, -dc) not in offs:
                raise ValueError("structuring element must be symmetric about the origin")
        object.__setattr__(self, "offsets", tuple(sorted(offs)))


# Smallest symmetric element; keeps skeletons thin.
CROSS_SE = StructuringElement(((0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)))


# ---------------------------------------------------------------------------
# decoding / encoding
# ---------------------------------------------------------------------------

def _parse_pnm_header(payload: bytes) -> tuple[bytes, list[int], int]:
    """Return (magic, [width, height, maxval], offset of raster data)."""
    if len(payload) < 2:
        raise CorruptPayload("payload shorter than a magic number")
    magic = payload[:2]
    pos = 2
    fields: list[int] = []
    while len(fields) < 3:
        # skip whitespace and '#' comments
        while pos < len(payload):
            ch = payload[pos]
            if ch in b" \t\r\n":
                pos += 1
            elif ch == ord("#"):
                while pos < len(payload) and payload[pos] not in b"\r\n":
                    pos += 1
            else:
                break
        start = pos
        while pos < len(payload) and payload[pos] in b"0123456789":
            pos += 1
        if pos == start:
            raise CorruptPayload("truncated or malformed header")
        fields.append(int(payload[start:pos]))
    if pos >= len(payload) or payload[pos] not in b" \t\r\n":
        raise CorruptPayload("missing whitespace after maxval")
    return magic, fields, pos + 1


def _decode_pnm(payload: bytes) -> RasterImage:
    magic, (width, height, maxval), offset = _parse_pnm_header(payload)
    if width < 1 or height < 1:
        raise CorruptPayload("non-positive dimensions")
    if maxval != 255:
        raise UnsupportedFormat("only maxval 255 is supported")
    channels = 3 if magic == b"P6" else 1
    need = width * height * channels
    raster = payload[offset:offset + need]
    if len(raster) < need:
        raise CorruptPayload("raster data shorter than header promises")
    flat = np.frombuffer(raster, dtype=np.uint8, count=need)
    if channels == 3:
        pixels = flat.reshape(height, width, 3).copy()
    else:
        gray = flat.reshape(height, width)
        pixels = np.repeat(gray[:, :, None], 3, axis=2)
    return RasterImage(pixels)


def decode_image(payload: bytes) -> RasterImage:
    """Decode an encoded image payload into 8-bit RGB pixels.

    Binary PPM (P6) and PGM (P5) are parsed directly and bit-exactly;
    other formats are delegated to Pillow when it is installed.
    """
    if payload[:2] in (b"P6", b"P5"):
        return _decode_pnm(payload)
    try:
        from PIL import Image, UnidentifiedImageError
    except ImportError:
        raise UnsupportedFormat("not a binary PPM/PGM and Pillow is unavailable")
    try:
        with Image.open(io.BytesIO(payload)) as im:
            rgb = im.convert("RGB")
            pixels = np.asarray(rgb, dtype=np.uint8).copy()
    except UnidentifiedImageError:
        raise UnsupportedFormat("unrecognized image format")
    except Exception as exc:
        raise CorruptPayload(f"decoder failed: {exc}")
    return RasterImage(pixels)


def encode_ppm(img: RasterImage) -> bytes:
    """Serialize to binary PPM (P6, maxval 255)."""
    header = f"P6\n{img.width} {img.height}\n255\n".encode()
    return header + img.pixels.tobytes()


def encode_pgm(ch: np.ndarray) -> bytes:
    """Serialize a channel matrix to binary PGM, clamping to [0, 255]."""
    arr = np.clip(np.rint(np.asarray(ch, dtype=np.float64)), 0, 255).astype(np.uint8)
    header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode()
    return header + arr.tobytes()


_MAGIC_TAGS = (
    (b"P6", "ppm"),
    (b"P5", "pgm"),
    (b"\x89PNG", "png"),
    (b"\xff\xd8", "jpeg"),
    (b"GIF8", "gif"),
    (b"BM", "bmp"),
)

MEDIA_TYPES = {
    "ppm": "image/x-portable-pixmap",
    "pgm": "image/x-portable-graymap",
    "png": "image/png",
    "jpeg": "image/jpeg",
    "gif": "image/gif",
    "bmp": "image/bmp",
    "webp": "image/webp",
    "bin": "application/octet-stream",
}


def detect_format(payload: bytes) -> str:
    """Best-effort format tag from magic bytes, for content-type serving."""
    for magic, tag in _MAGIC_TAGS:
        if payload[:len(magic)] == magic:
            return tag
    if payload[:4] == b"RIFF" and payload[8:12] == b"WEBP":
        return "webp"
    return "bin"


# ---------------------------------------------------------------------------
# channels and geometry
# ---------------------------------------------------------------------------

def split_channels(img: RasterImage) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Extract the red, green and blue channels as float matrices."""
    p = img.pixels.astype(np.float64)
    return p[:, :, 0], p[:, :, 1], p[:, :, 2]


def to_grayscale(img: RasterImage) -> np.ndarray:
    """Luma conversion: 0.299 r + 0.587 g + 0.114 b."""
    r, g, b = split_channels(img)
    wr, wg, wb = _LUMA_WEIGHTS
    return wr * r + wg * g + wb * b


def resize_bilinear(ch: np.ndarray, new_rows: int, new_cols: int) -> np.ndarray:
    """Bilinear resampling with corner-aligned coordinates.

    Output position i maps to source position i * (rows - 1) / (new_rows - 1);
    a size-1 output axis samples position 0.
    """
    ch = np.asarray(ch, dtype=np.float64)
    if new_rows < 1 or new_cols < 1:
        raise ValueError("target dimensions must be >= 1")
    rows, cols = ch.shape
    if new_rows == rows and new_cols == cols:
        return ch.copy()
    r_pos = np.linspace(0.0, rows - 1, new_rows) if new_rows > 1 else np.zeros(1)
    c_pos = np.linspace(0.0, cols - 1, new_cols) if new_cols > 1 else np.zeros(1)
    r0 = np.floor(r_pos).astype(int)
    c0 = np.floor(c_pos).astype(int)
    r1 = np.minimum(r0 + 1, rows - 1)
    c1 = np.minimum(c0 + 1, cols - 1)
    fr = (r_pos - r0)[:, None]
    fc = (c_pos - c0)[None, :]
    return (
        ch[np.ix_(r0, c0)] * (1 - fr) * (1 - fc)
        + ch[np.ix_(r1, c0)] * fr * (1 - fc)
        + ch[np.ix_(r0, c1)] * (1 - fr) * fc
        + ch[np.ix_(r1, c1)] * fr * fc
    )


def cap_longer_side(img: RasterImage, limit: int = SIZE_CAP) -> RasterImage:
    """Downscale so the longer side is at most `limit`, preserving aspect."""
    h, w = img.height, img.width
    longer = max(h, w)
    if longer <= limit:
        return img
    if h >= w:
        new_h, new_w = limit, max(1, round(w * limit / h))
    else:
        new_h, new_w = max(1, round(h * limit / w)), limit
    out = np.empty((new_h, new_w, 3), dtype=np.uint8)
    for c in range(3):
        resized = resize_bilinear(img.pixels[:, :, c].astype(np.float64), new_h, new_w)
        out[:, :, c] = np.clip(np.rint(resized), 0, 255).astype(np.uint8)
    return RasterImage(out)


def pad_square_block(ch: np.ndarray, block: int) -> np.ndarray:
    """Zero-pad to an S x S matrix where S is max(rows, cols) rounded up to a
    multiple of `block`; the input occupies the top-left corner."""
    ch = np.asarray(ch, dtype=np.float64)
    if block < 1:
        raise ValueError("block must be >= 1")
    rows, cols = ch.shape
    side = -(-max(rows, cols) // block) * block
    if side == rows == cols:
        return ch.copy()
    out = np.zeros((side, side), dtype=np.float64)
    out[:rows, :cols] = ch
    return out


# ---------------------------------------------------------------------------
# binarization and edges
# ---------------------------------------------------------------------------

def otsu_threshold(counts: np.ndarray) -> int:
    """Threshold maximizing between-class variance; smallest value on ties.

    Background is v <= t, foreground v > t. Raises ConstantChannel when only
    one intensity is populated.
    """
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    populated = np.nonzero(counts)[0]
    if populated.size <= 1:
        raise ConstantChannel("all values are equal")
    values = np.arange(counts.size, dtype=np.float64)
    cum_n = np.cumsum(counts)
    cum_v = np.cumsum(counts * values)
    w0 = cum_n / total
    w1 = 1.0 - w0
    mu0 = np.divide(cum_v, cum_n, out=np.zeros_like(cum_v), where=cum_n > 0)
    mu1 = np.divide(cum_v[-1] - cum_v, total - cum_n,
                    out=np.zeros_like(cum_v), where=(total - cum_n) > 0)
    between = w0 * w1 * (mu0 - mu1) ** 2
    between[(cum_n == 0) | (cum_n == total)] = -1.0
    return int(np.argmax(between))


def binarize_otsu(ch: np.ndarray) -> np.ndarray:
    """Threshold a channel with Otsu's criterion on its 256-bin histogram.

    Values are rounded and clamped to [0, 255] before histogramming;
    foreground is strictly greater than the chosen threshold.
    """
    ch = np.asarray(ch, dtype=np.float64)
    if ch.size == 0:
        raise ValueError("empty channel")
    clamped = np.clip(np.rint(ch), 0, 255).astype(np.int64)
    counts = np.bincount(clamped.ravel(), minlength=256)
    threshold = otsu_threshold(counts)
    return clamped > threshold


def sobel_edges(bw: np.ndarray) -> np.ndarray:
    """Mark pixels with nonzero Sobel gradient magnitude (|gx| + |gy|).

    Border pixels lack full 3x3 support and are always background.
    """
    bw = np.asarray(bw, dtype=bool)
    rows, cols = bw.shape
    if rows < 3 or cols < 3:
        raise TooSmall("sobel needs at least a 3x3 image")
    p = bw.astype(np.int64)
    gx = (
        (p[:-2, 2:] + 2 * p[1:-1, 2:] + p[2:, 2:])
        - (p[:-2, :-2] + 2 * p[1:-1, :-2] + p[2:, :-2])
    )
    gy = (
        (p[2:, :-2] + 2 * p[2:, 1:-1] + p[2:, 2:])
        - (p[:-2, :-2] + 2 * p[:-2, 1:-1] + p[:-2, 2:])
    )
    out = np.zeros_like(bw)
    out[1:-1, 1:-1] = (np.abs(gx) + np.abs(gy)) > 0
    return out


# ---------------------------------------------------------------------------
# binary morphology
# ---------------------------------------------------------------------------

def _shift(bw: np.ndarray, dr: int, dc: int) -> np.ndarray:
    """out[i, j] = bw[i + dr, j + dc], with False outside the grid."""
    rows, cols = bw.shape
    out = np.zeros_like(bw)
    i0, i1 = max(0, -dr), min(rows, rows - dr)
    j0, j1 = max(0, -dc), min(cols, cols - dc)
    if i0 < i1 and j0 < j1:
        out[i0:i1, j0:j1] = bw[i0 + dr:i1 + dr, j0 + dc:j1 + dc]
    return out


def erode(bw: np.ndarray, se: StructuringElement = CROSS_SE) -> np.ndarray:
    """Erosion; out-of-bounds neighbors count as background."""
    bw = np.asarray(bw, dtype=bool)
    out = np.ones_like(bw)
    for dr, dc in se.offsets:
        out &= _shift(bw, dr, dc)
    return out


def dilate(bw: np.ndarray, se: StructuringElement = CROSS_SE) -> np.ndarray:
    """Dilation; out-of-bounds neighbors are ignored."""
    bw = np.asarray(bw, dtype=bool)
    out = np.zeros_like(bw)
    for dr, dc in se.offsets:
        out |= _shift(bw, -dr, -dc)
    return out


def morph_open(bw: np.ndarray, se: StructuringElement = CROSS_SE) -> np.ndarray:
    """Opening: erosion followed by dilation."""
    return dilate(erode(bw, se), se)


def morph_skeleton(bw: np.ndarray, se: StructuringElement = CROSS_SE) -> np.ndarray:
    """Morphological (Lantuejoul) skeleton.

    Union over k of E_k minus its opening, where E_k is the k-fold erosion;
    stops when the erosion is empty. The result is a subset of the input.
    """
    bw = np.asarray(bw, dtype=bool)
    skeleton = np.zeros_like(bw)
    eroded = bw.copy()
    while eroded.any():
        skeleton |= eroded & ~morph_open(eroded, se)
        eroded = erode(eroded, se)
    return skeleton


def resize_binary_nearest(bw: np.ndarray, new_rows: int, new_cols: int) -> np.ndarray:
    """Nearest-neighbor resampling: sample index = floor(i * rows / new_rows)."""
    bw = np.asarray(bw, dtype=bool)
    if new_rows < 1 or new_cols < 1:
        raise ValueError("target dimensions must be >= 1")
    rows, cols = bw.shape
    ri = (np.arange(new_rows) * rows) // new_rows
    ci = (np.arange(new_cols) * cols) // new_cols
    return bw[np.ix_(ri, ci)]
