"""Transform and linear-algebra kernels: Haar DWT, radix-2 FFT, spectral radius.

All kernels are self-contained; numpy is used only for array arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    LengthMismatch,
    MalformedPyramid,
    NoConvergence,
    NotDivisible,
    NotPowerOfTwo,
    NotSquare,
    OddDims,
    OddLength,
)

_SQRT2 = math.sqrt(2.0)


# ---------------------------------------------------------------------------
# Haar wavelets (orthonormal convention)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WaveletDecomposition:
    """Multi-level pyramid: approximation at the deepest level plus one
    (hl, lh, hh) detail triple per level, level 1 first."""

    approx: np.ndarray
    details: tuple[tuple[np.ndarray, np.ndarray, np.ndarray], ...]

    @property
    def levels(self) -> int:
        return len(self.details)

    def matrices(self) -> list[np.ndarray]:
        """All 3L + 1 sub-bands: approx first, then details level 1 upward."""
        out = [self.approx]
        for triple in self.details:
            out.extend(triple)
        return out

    def with_zeroed_details(self) -> "WaveletDecomposition":
        zeroed = tuple(
            tuple(np.zeros_like(m) for m in triple) for triple in self.details
        )
        return WaveletDecomposition(self.approx, zeroed)


def haar_forward_1d(signal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One orthonormal Haar step: a_i = (x_2i + x_2i+1)/sqrt(2), d_i likewise
    with a minus sign."""
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1 or x.size < 2 or x.size % 2 != 0:
        raise OddLength("signal length must be even and >= 2")
    return (x[0::2] + x[1::2]) / _SQRT2, (x[0::2] - x[1::2]) / _SQRT2


def haar_inverse_1d(approx: np.ndarray, detail: np.ndarray) -> np.ndarray:
    """Exact inverse of haar_forward_1d up to floating round-off."""
    a = np.asarray(approx, dtype=np.float64)
    d = np.asarray(detail, dtype=np.float64)
    if a.shape != d.shape or a.ndim != 1:
        raise LengthMismatch("approx and detail must be 1D of equal length")
    out = np.empty(2 * a.size, dtype=np.float64)
    out[0::2] = (a + d) / _SQRT2
    out[1::2] = (a - d) / _SQRT2
    return out


def _dwt_rows(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return (m[:, 0::2] + m[:, 1::2]) / _SQRT2, (m[:, 0::2] - m[:, 1::2]) / _SQRT2


def _dwt_cols(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return (m[0::2, :] + m[1::2, :]) / _SQRT2, (m[0::2, :] - m[1::2, :]) / _SQRT2


def _dwt2_once(m: np.ndarray):
    lo, hi = _dwt_rows(m)
    ll, lh = _dwt_cols(lo)
    hl, hh = _dwt_cols(hi)
    return ll, hl, lh, hh


def _idwt_cols(a: np.ndarray, d: np.ndarray) -> np.ndarray:
    out = np.empty((2 * a.shape[0], a.shape[1]), dtype=np.float64)
    out[0::2, :] = (a + d) / _SQRT2
    out[1::2, :] = (a - d) / _SQRT2
    return out


def _idwt_rows(a: np.ndarray, d: np.ndarray) -> np.ndarray:
    out = np.empty((a.shape[0], 2 * a.shape[1]), dtype=np.float64)
    out[:, 0::2] = (a + d) / _SQRT2
    out[:, 1::2] = (a - d) / _SQRT2
    return out


def _idwt2_once(ll, hl, lh, hh) -> np.ndarray:
    lo = _idwt_cols(ll, lh)
    hi = _idwt_cols(hl, hh)
    return _idwt_rows(lo, hi)


def dwt2_multilevel(ch: np.ndarray, levels: int) -> WaveletDecomposition:
    """Multi-level 2D Haar transform: rows then columns per level, recursing
    into the LL quadrant only. Yields 3 * levels + 1 sub-band matrices."""
    m = np.asarray(ch, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSquare("input must be a square matrix")
    if levels < 1:
        raise ValueError("levels must be >= 1")
    if m.shape[0] % (1 << levels) != 0:
        raise NotDivisible(f"side {m.shape[0]} not divisible by 2**{levels}")
    details = []
    current = m
    for _ in range(levels):
        current, hl, lh, hh = _dwt2_once(current)
        details.append((hl, lh, hh))
    return WaveletDecomposition(current, tuple(details))


def idwt2(dec: WaveletDecomposition) -> np.ndarray:
    """Invert dwt2_multilevel; output side = approx side * 2**levels."""
    approx = np.asarray(dec.approx, dtype=np.float64)
    if approx.ndim != 2 or approx.shape[0] != approx.shape[1]:
        raise MalformedPyramid("approx must be square")
    if not dec.details:
        raise MalformedPyramid("decomposition has no levels")
    levels = len(dec.details)
    current = approx
    for lvl in range(levels, 0, -1):
        triple = dec.details[lvl - 1]
        if len(triple) != 3:
            raise MalformedPyramid("each level needs exactly three detail matrices")
        expected = approx.shape[0] * (1 << (levels - lvl))
        for m in triple:
            m = np.asarray(m)
            if m.shape != (expected, expected):
                raise MalformedPyramid(
                    f"level {lvl} detail shape {m.shape}, expected {(expected, expected)}"
                )
        hl, lh, hh = (np.asarray(m, dtype=np.float64) for m in triple)
        current = _idwt2_once(current, hl, lh, hh)
    return current


# ---------------------------------------------------------------------------
# radix-2 FFT
# ---------------------------------------------------------------------------

def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _bit_reverse_indices(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for _ in range(bits):
        rev = (rev << 1) | (idx & 1)
        idx >>= 1
    return rev


def _fft_rows(a: np.ndarray) -> np.ndarray:
    """Iterative Cooley-Tukey over the last axis of a 2D complex array."""
    m, n = a.shape
    if n == 1:
        return a.copy()
    a = a[:, _bit_reverse_indices(n)]
    size = 2
    while size <= n:
        half = size // 2
        twiddle = np.exp(-2j * np.pi * np.arange(half) / size)
        b = a.reshape(m, n // size, size)
        even = b[:, :, :half]
        odd = b[:, :, half:] * twiddle
        a = np.concatenate((even + odd, even - odd), axis=2).reshape(m, n)
        size *= 2
    return a


def fft2(ch: np.ndarray) -> np.ndarray:
    """Unnormalized forward 2D DFT, row FFTs followed by column FFTs.

    F(u, v) = sum_xy f(x, y) exp(-2 pi i (u x / rows + v y / cols)).
    """
    m = np.asarray(ch)
    if m.ndim != 2:
        raise ValueError("input must be 2D")
    rows, cols = m.shape
    if not (_is_pow2(rows) and _is_pow2(cols)):
        raise NotPowerOfTwo(f"dims {rows}x{cols} are not powers of two")
    z = m.astype(np.complex128)
    z = _fft_rows(z)
    return _fft_rows(z.T).T


def fftshift(cm: np.ndarray) -> np.ndarray:
    """Quadrant swap moving entry (0, 0) to (rows/2, cols/2)."""
    m = np.asarray(cm)
    rows, cols = m.shape
    if rows % 2 != 0 or cols % 2 != 0:
        raise OddDims("spectrum centering needs even dimensions")
    r2, c2 = rows // 2, cols // 2
    out = np.empty_like(m)
    out[:r2, :c2] = m[r2:, c2:]
    out[:r2, c2:] = m[r2:, :c2]
    out[r2:, :c2] = m[:r2, c2:]
    out[r2:, c2:] = m[:r2, :c2]
    return out


# ---------------------------------------------------------------------------
# spectral radius of a dense real matrix
# ---------------------------------------------------------------------------

def _hessenberg(a: np.ndarray) -> np.ndarray:
    """Householder reduction to upper Hessenberg form."""
    h = a.astype(np.float64).copy()
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1:, k]
        norm_x = math.sqrt(float(x @ x))
        if norm_x == 0.0:
            continue
        alpha = -norm_x if x[0] >= 0 else norm_x
        v = x.copy()
        v[0] -= alpha
        vnorm = math.sqrt(float(v @ v))
        if vnorm == 0.0:
            continue
        v /= vnorm
        h[k + 1:, k:] -= 2.0 * np.outer(v, v @ h[k + 1:, k:])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v)
        h[k + 2:, k] = 0.0
    return h


def _householder3(x: float, y: float, z: float):
    """Reflector v, beta with (I - beta v v^T) mapping (x, y, z) onto e1."""
    scale = abs(x) + abs(y) + abs(z)
    if scale == 0.0:
        return np.zeros(3), 0.0
    xs, ys, zs = x / scale, y / scale, z / scale
    norm = math.sqrt(xs * xs + ys * ys + zs * zs)
    alpha = -norm if xs >= 0 else norm
    v = np.array([xs - alpha, ys, zs])
    vv = float(v @ v)
    if vv == 0.0:
        return np.zeros(3), 0.0
    return v, 2.0 / vv


def _householder2(x: float, y: float):
    scale = abs(x) + abs(y)
    if scale == 0.0:
        return np.zeros(2), 0.0
    xs, ys = x / scale, y / scale
    norm = math.sqrt(xs * xs + ys * ys)
    alpha = -norm if xs >= 0 else norm
    v = np.array([xs - alpha, ys])
    vv = float(v @ v)
    if vv == 0.0:
        return np.zeros(2), 0.0
    return v, 2.0 / vv


def _block2_magnitudes(a: float, b: float, c: float, d: float) -> list[float]:
    """Eigenvalue magnitudes of [[a, b], [c, d]]; complex pairs have
    magnitude sqrt(det) when the discriminant is negative."""
    tr = a + d
    det = a * d - b * c
    disc = tr * tr - 4.0 * det
    if disc >= 0.0:
        root = math.sqrt(disc)
        return [abs((tr + root) / 2.0), abs((tr - root) / 2.0)]
    return [math.sqrt(det)] * 2


def _hessenberg_eig_magnitudes(h: np.ndarray, max_sweeps: int) -> list[float]:
    """Eigenvalue magnitudes of an upper Hessenberg matrix via implicit
    double-shift QR with deflation (real Schur form, eigenvalues only)."""
    n = h.shape[0]
    eps = np.finfo(np.float64).eps
    hnorm = float(np.abs(h).sum())
    mags: list[float] = []
    hi = n - 1
    its = 0
    sweeps = 0
    while hi >= 0:
        # deflation scan: zero negligible subdiagonals above hi
        lo = hi
        while lo > 0:
            s = abs(h[lo - 1, lo - 1]) + abs(h[lo, lo])
            if s == 0.0:
                s = hnorm if hnorm > 0 else 1.0
            if abs(h[lo, lo - 1]) <= eps * s:
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            mags.append(abs(float(h[hi, hi])))
            hi -= 1
            its = 0
            continue
        if lo == hi - 1:
            mags.extend(
                _block2_magnitudes(h[lo, lo], h[lo, hi], h[hi, lo], h[hi, hi])
            )
            hi -= 2
            its = 0
            continue
        sweeps += 1
        its += 1
        if sweeps > max_sweeps:
            raise NoConvergence(f"QR iteration exceeded {max_sweeps} sweeps")
        if its in (10, 20):
            # ad-hoc exceptional shift to break symmetric stalls
            s_exc = abs(h[hi, hi - 1]) + abs(h[hi - 1, hi - 2])
            h11 = 0.75 * s_exc + h[hi, hi]
            h12 = -0.4375 * s_exc
            h21 = s_exc
            h22 = h11
        else:
            h11, h12 = h[hi - 1, hi - 1], h[hi - 1, hi]
            h21, h22 = h[hi, hi - 1], h[hi, hi]
        shift_sum = h11 + h22
        shift_prod = h11 * h22 - h12 * h21
        # first column of (H - a I)(H - b I) restricted to the block
        x = (
            h[lo, lo] * h[lo, lo]
            + h[lo, lo + 1] * h[lo + 1, lo]
            - shift_sum * h[lo, lo]
            + shift_prod
        )
        y = h[lo + 1, lo] * (h[lo, lo] + h[lo + 1, lo + 1] - shift_sum)
        z = h[lo + 2, lo + 1] * h[lo + 1, lo]
        for k in range(lo, hi - 1):
            v, beta = _householder3(x, y, z)
            if beta != 0.0:
                q = max(lo, k - 1)
                seg = h[k:k + 3, q:hi + 1]
                seg -= beta * np.outer(v, v @ seg)
                r = min(hi, k + 3)
                seg2 = h[lo:r + 1, k:k + 3]
                seg2 -= beta * np.outer(seg2 @ v, v)
            if k > lo:
                h[k + 1, k - 1] = 0.0
                h[k + 2, k - 1] = 0.0
            x = h[k + 1, k]
            y = h[k + 2, k]
            z = h[k + 3, k] if k < hi - 2 else 0.0
        v2, beta2 = _householder2(x, y)
        if beta2 != 0.0:
            q = max(lo, hi - 2)
            seg = h[hi - 1:hi + 1, q:hi + 1]
            seg -= beta2 * np.outer(v2, v2 @ seg)
            seg2 = h[lo:hi + 1, hi - 1:hi + 1]
            seg2 -= beta2 * np.outer(seg2 @ v2, v2)
        if hi - 1 > lo:
            h[hi, hi - 2] = 0.0
    return mags


def spectral_radius(m: np.ndarray) -> float:
    """Largest eigenvalue magnitude of a square real matrix.

    Hessenberg reduction followed by implicit double-shift QR; trailing 2x2
    blocks with negative discriminant contribute sqrt(det).
    """
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSquare("spectral radius needs a square matrix")
    if not np.isfinite(a).all():
        raise ValueError("matrix entries must be finite")
    n = a.shape[0]
    if n == 1:
        return abs(float(a[0, 0]))
    if n == 2:
        return max(_block2_magnitudes(a[0, 0], a[0, 1], a[1, 0], a[1, 1]))
    h = _hessenberg(a)
    mags = _hessenberg_eig_magnitudes(h, max_sweeps=100 * n)
    return max(mags)
