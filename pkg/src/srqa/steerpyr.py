"""Complex steerable pyramid (frequency-domain construction).

Two scales and six orientations by default, plus real high-pass and
low-pass residuals. Radial raised-cosine filters split the spectrum in
octaves; angular responses are proportional to cos^(K-1) of the angle to
the band direction. The real-band configuration is a tight frame (the
squared frequency responses sum to one), so analysis with conjugate
synthesis reconstructs the input exactly. The complex configuration keeps
each band analytic (one frequency half-plane), whose real part equals the
corresponding real-configuration band.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial, pi

import numpy as np

from srqa.imgcore import ImageError

DEFAULT_SCALES = 2
DEFAULT_ORIENTATIONS = 6
MIN_DIM = 32


@dataclass
class SteerableDecomposition:
    """Band set produced by :func:`decompose`.

    ``bands[s][k]`` is the band at scale s+1 (0 = finest) and orientation
    k*180/K degrees, with dimensions work_shape / 2^s. ``highpass`` is at
    full working resolution and ``lowpass`` at work_shape / 2^scales.
    """

    highpass: np.ndarray
    bands: list
    lowpass: np.ndarray
    complex_bands: bool
    orig_shape: tuple
    work_shape: tuple

    @property
    def scales(self) -> int:
        return len(self.bands)

    @property
    def orientations(self) -> int:
        return len(self.bands[0])


def _polar_grid(shape):
    h, w = shape
    wy = np.fft.fftshift(np.fft.fftfreq(h))[:, None] * (2.0 * pi)
    wx = np.fft.fftshift(np.fft.fftfreq(w))[None, :] * (2.0 * pi)
    r = np.hypot(wy, wx)
    theta = np.arctan2(wy, wx)
    with np.errstate(divide="ignore"):
        t = np.log2(r / pi)  # octaves relative to the Nyquist ring; DC -> -inf
    return t, theta


def _radial_high(t, shift):
    # Raised cosine rising 0 -> 1 over t in [-1-shift, -shift].
    u = np.clip(-(t + shift), 0.0, 1.0)
    return np.cos(0.5 * pi * u)


def _angular_const(orientations: int) -> float:
    order = orientations - 1
    return float(
        np.sqrt(
            (2.0 ** (2 * order)) * factorial(order) ** 2
            / (orientations * factorial(2 * order))
        )
    )


def _angular(theta, k, orientations, complex_bands):
    order = orientations - 1
    phi = theta - pi * k / orientations
    c = np.cos(phi)
    a = _angular_const(orientations) * c ** order
    if complex_bands:
        a = 2.0 * a * (c > 0)
    return a * (-1j) ** order


def _center_crop(spec):
    # Keep the DC-centered half spectrum: DC sits at n//2 on the shifted
    # grid for any size, so the window starts at n//2 - (n//2)//2.
    h, w = spec.shape
    nh, nw = h // 2, w // 2
    top = h // 2 - nh // 2
    left = w // 2 - nw // 2
    return spec[top: top + nh, left: left + nw]


def _pad_to_multiple(img: np.ndarray, multiple: int) -> np.ndarray:
    h, w = img.shape
    ph = (-h) % multiple
    pw = (-w) % multiple
    if ph == 0 and pw == 0:
        return img
    return np.pad(img, ((0, ph), (0, pw)), mode="symmetric")


def decompose(image, scales: int = DEFAULT_SCALES,
              orientations: int = DEFAULT_ORIENTATIONS,
              complex_bands: bool = True) -> SteerableDecomposition:
    """Decompose an image into oriented frequency bands.

    Requires min dimension >= 32. Dimensions are padded symmetrically to a
    multiple of 2^scales so the spectral subsampling is lossless; band
    shapes refer to the padded working size, recorded in ``work_shape``.
    """
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise ImageError(f"expected a 2-D grayscale array, got shape {img.shape}")
    if min(img.shape) < MIN_DIM:
        raise ImageError(
            f"image too small to decompose: min dimension {min(img.shape)} < {MIN_DIM}"
        )
    orig_shape = img.shape
    img = _pad_to_multiple(img, 2 ** scales)

    spec = np.fft.fftshift(np.fft.fft2(img))
    t, _ = _polar_grid(img.shape)
    hi0 = _radial_high(t, 0.0)
    lo0 = np.sqrt(np.clip(1.0 - hi0 * hi0, 0.0, None))
    highpass = np.fft.ifft2(np.fft.ifftshift(spec * hi0)).real
    lodft = spec * lo0

    bands = []
    for _ in range(scales):
        t, theta = _polar_grid(lodft.shape)
        h1 = _radial_high(t, 1.0)
        level = []
        for k in range(orientations):
            bdft = lodft * h1 * _angular(theta, k, orientations, complex_bands)
            band = np.fft.ifft2(np.fft.ifftshift(bdft))
            level.append(band if complex_bands else band.real)
        bands.append(level)
        l1 = np.sqrt(np.clip(1.0 - h1 * h1, 0.0, None))
        # l1 vanishes on and beyond the half-Nyquist ring, so dropping the
        # outer spectrum loses nothing; 0.25 preserves spatial amplitude.
        lodft = _center_crop(lodft * l1) * 0.25

    lowpass = np.fft.ifft2(np.fft.ifftshift(lodft)).real
    return SteerableDecomposition(
        highpass=highpass,
        bands=bands,
        lowpass=lowpass,
        complex_bands=complex_bands,
        orig_shape=orig_shape,
        work_shape=img.shape,
    )


def reconstruct(decomp: SteerableDecomposition) -> np.ndarray:
    """Synthesize the image back from a decomposition (conjugate filters).

    Complex decompositions reconstruct from the real parts of their bands,
    which coincide with the real-configuration bands.
    """
    orientations = decomp.orientations
    expected = tuple(decomp.work_shape)
    for s, level in enumerate(decomp.bands):
        want = (expected[0] >> s, expected[1] >> s)
        for band in level:
            if band.shape != want:
                raise ValueError(f"malformed band shape {band.shape}, expected {want}")

    spec = np.fft.fftshift(np.fft.fft2(np.asarray(decomp.lowpass, dtype=np.float64)))
    for level in reversed(decomp.bands):
        sh, sw = spec.shape
        h, w = sh * 2, sw * 2
        up = np.zeros((h, w), dtype=complex)
        top = h // 2 - sh // 2
        left = w // 2 - sw // 2
        up[top: top + sh, left: left + sw] = spec * 4.0
        t, theta = _polar_grid((h, w))
        h1 = _radial_high(t, 1.0)
        l1 = np.sqrt(np.clip(1.0 - h1 * h1, 0.0, None))
        spec = up * l1
        for k, band in enumerate(level):
            bdft = np.fft.fftshift(np.fft.fft2(np.asarray(band).real))
            spec = spec + bdft * np.conj(h1 * _angular(theta, k, orientations, False))

    t, _ = _polar_grid(spec.shape)
    hi0 = _radial_high(t, 0.0)
    lo0 = np.sqrt(np.clip(1.0 - hi0 * hi0, 0.0, None))
    spec = spec * lo0 + np.fft.fftshift(np.fft.fft2(decomp.highpass)) * np.conj(hi0)
    out = np.fft.ifft2(np.fft.ifftshift(spec)).real
    oh, ow = decomp.orig_shape
    return out[:oh, :ow]


def filter_bank(shape, scales: int = DEFAULT_SCALES,
                orientations: int = DEFAULT_ORIENTATIONS) -> dict:
    """Full-resolution analysis frequency responses (real configuration).

    Returns highpass/lowpass radial responses and the oriented band
    responses as seen on the unsubsampled grid; the squared magnitudes of
    the full set sum to one at every frequency sample.
    """
    t, theta = _polar_grid(shape)
    hi0 = _radial_high(t, 0.0)
    lo = np.sqrt(np.clip(1.0 - hi0 * hi0, 0.0, None))
    bands = []
    for level in range(1, scales + 1):
        h = _radial_high(t, float(level))
        bands.append(
            [lo * h * _angular(theta, k, orientations, False)
             for k in range(orientations)]
        )
        lo = lo * np.sqrt(np.clip(1.0 - h * h, 0.0, None))
    return {"highpass": hi0, "bands": bands, "lowpass": lo}
