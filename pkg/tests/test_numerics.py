import math

import numpy as np
import pytest

from cbir.errors import (
    LengthMismatch,
    MalformedPyramid,
    NotDivisible,
    NotPowerOfTwo,
    NotSquare,
    OddDims,
    OddLength,
)
from cbir.numerics import (
    WaveletDecomposition,
    dwt2_multilevel,
    fft2,
    fftshift,
    haar_forward_1d,
    haar_inverse_1d,
    idwt2,
    spectral_radius,
)

SQRT2 = math.sqrt(2.0)


def naive_dft2(m: np.ndarray) -> np.ndarray:
    rows, cols = m.shape
    wr = np.exp(-2j * np.pi * np.outer(np.arange(rows), np.arange(rows)) / rows)
    wc = np.exp(-2j * np.pi * np.outer(np.arange(cols), np.arange(cols)) / cols)
    return wr @ m.astype(np.complex128) @ wc


# ---------------------------------------------------------------------------
# Haar
# ---------------------------------------------------------------------------

def test_haar_constant_signal():
    a, d = haar_forward_1d(np.array([3.0, 3.0]))
    assert a[0] == pytest.approx(3.0 * SQRT2)
    assert d[0] == 0.0


def test_haar_hand_values():
    a, d = haar_forward_1d(np.array([4.0, 2.0]))
    assert a[0] == pytest.approx(4.242640687119285, abs=1e-12)
    assert d[0] == pytest.approx(1.4142135623730951, abs=1e-12)


def test_haar_odd_length():
    with pytest.raises(OddLength):
        haar_forward_1d(np.array([1.0, 2.0, 3.0]))


def test_haar_inverse_round_trip():
    rng = np.random.default_rng(0)
    x = rng.normal(size=64)
    a, d = haar_forward_1d(x)
    assert np.abs(haar_inverse_1d(a, d) - x).max() < 1e-9


def test_haar_inverse_constant():
    out = haar_inverse_1d(np.array([5.0 * SQRT2]), np.array([0.0]))
    assert np.allclose(out, [5.0, 5.0])


def test_haar_inverse_length_mismatch():
    with pytest.raises(LengthMismatch):
        haar_inverse_1d(np.array([1.0, 2.0]), np.array([1.0]))


def test_dwt2_constant_input():
    for levels in (1, 2, 3, 4):
        dec = dwt2_multilevel(np.full((16, 16), 2.5), levels)
        for triple in dec.details:
            for band in triple:
                assert np.abs(band).max() == 0.0
        assert np.allclose(dec.approx, 2.5 * 2**levels)


def test_dwt2_band_count():
    dec = dwt2_multilevel(np.random.default_rng(1).normal(size=(64, 64)), 4)
    assert len(dec.matrices()) == 13
    assert dec.approx.shape == (4, 4)
    assert dec.details[0][0].shape == (32, 32)


def test_dwt2_not_divisible():
    with pytest.raises(NotDivisible):
        dwt2_multilevel(np.zeros((60, 60)), 4)


def test_dwt2_not_square():
    with pytest.raises(NotSquare):
        dwt2_multilevel(np.zeros((16, 8)), 1)


def test_dwt2_energy_and_linearity():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(32, 32))
    y = rng.normal(size=(32, 32))
    dec_x = dwt2_multilevel(x, 3)
    energy = sum(float((band**2).sum()) for band in dec_x.matrices())
    assert energy == pytest.approx(float((x**2).sum()), rel=1e-9)
    dec_y = dwt2_multilevel(y, 3)
    dec_mix = dwt2_multilevel(2.0 * x - 0.5 * y, 3)
    for got, bx, by in zip(dec_mix.matrices(), dec_x.matrices(), dec_y.matrices()):
        assert np.abs(got - (2.0 * bx - 0.5 * by)).max() < 1e-9


def test_idwt2_round_trip():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(32, 32))
    for levels in (1, 2, 3, 4):
        rec = idwt2(dwt2_multilevel(x, levels))
        assert np.abs(rec - x).max() < 1e-9


def test_idwt2_zero_and_smooth():
    zero = WaveletDecomposition(
        np.zeros((4, 4)), ((np.zeros((4, 4)),) * 3,)
    )
    assert np.abs(idwt2(zero)).max() == 0.0
    const = WaveletDecomposition(
        np.full((4, 4), 6.0), ((np.zeros((4, 4)),) * 3,)
    )
    assert np.allclose(idwt2(const), 3.0)


def test_idwt2_malformed():
    with pytest.raises(MalformedPyramid):
        idwt2(WaveletDecomposition(np.zeros((4, 4)), ()))
    with pytest.raises(MalformedPyramid):
        idwt2(
            WaveletDecomposition(
                np.zeros((4, 4)),
                ((np.zeros((4, 4)), np.zeros((4, 4)), np.zeros((2, 2))),),
            )
        )


# ---------------------------------------------------------------------------
# FFT
# ---------------------------------------------------------------------------

def test_fft2_dc_only():
    out = fft2(np.ones((8, 4)))
    assert out[0, 0] == pytest.approx(32.0)
    out[0, 0] = 0.0
    assert np.abs(out).max() < 1e-9


def test_fft2_matches_naive_dft():
    rng = np.random.default_rng(4)
    for _ in range(5):
        m = rng.normal(size=(16, 16))
        assert np.abs(fft2(m) - naive_dft2(m)).max() < 1e-9


def test_fft2_rejects_non_power_of_two():
    with pytest.raises(NotPowerOfTwo):
        fft2(np.zeros((12, 16)))


def test_fft2_shift_invariant_magnitude():
    rng = np.random.default_rng(5)
    m = rng.normal(size=(16, 16))
    base = np.abs(fft2(m))
    rolled = np.abs(fft2(np.roll(m, (3, 7), axis=(0, 1))))
    assert np.abs(base - rolled).max() < 1e-9


def test_fftshift_moves_origin_to_center():
    m = np.zeros((4, 4))
    m[0, 0] = 1.0
    assert fftshift(m)[2, 2] == 1.0
    rng = np.random.default_rng(6)
    x = rng.normal(size=(6, 8))
    assert (fftshift(fftshift(x)) == x).all()


def test_fftshift_odd_dims():
    with pytest.raises(OddDims):
        fftshift(np.zeros((3, 4)))


# ---------------------------------------------------------------------------
# spectral radius
# ---------------------------------------------------------------------------

def test_spectral_radius_identity_and_triangular():
    assert spectral_radius(np.eye(5)) == pytest.approx(1.0)
    assert spectral_radius(np.array([[2.0, 1.0], [0.0, 3.0]])) == pytest.approx(3.0)


def test_spectral_radius_rotation_block():
    assert spectral_radius(np.array([[0.0, 1.0], [-1.0, 0.0]])) == pytest.approx(1.0)


def test_spectral_radius_constructed_spectrum():
    rng = np.random.default_rng(7)
    for _ in range(30):
        n = int(rng.integers(2, 9))
        eigs = rng.uniform(-5, 5, size=n)
        q, _ = np.linalg.qr(rng.normal(size=(n, n)))
        a = q @ np.diag(eigs) @ q.T
        want = float(np.abs(eigs).max())
        assert spectral_radius(a) == pytest.approx(want, rel=1e-8)


def test_spectral_radius_scaling_and_transpose():
    rng = np.random.default_rng(8)
    a = rng.normal(size=(9, 9))
    base = spectral_radius(a)
    for c in (2.0, -0.5):
        assert spectral_radius(c * a) == pytest.approx(abs(c) * base, rel=1e-8)
    assert spectral_radius(a.T) == pytest.approx(base, rel=1e-8)


def test_spectral_radius_validation():
    with pytest.raises(NotSquare):
        spectral_radius(np.zeros((3, 4)))
    with pytest.raises(ValueError):
        spectral_radius(np.array([[np.nan, 0.0], [0.0, 1.0]]))


def test_spectral_radius_zero_matrix():
    assert spectral_radius(np.zeros((6, 6))) == 0.0
