"""Global frequency features: GSM-normalized wavelet statistics, 45 dims.

Each steerable-pyramid band is divisively normalized by a local mixer
estimate shared across a 15-coefficient neighborhood (3x3 in the band,
5 in the adjacent-orientation band, 1 in the parent band), which pulls
the band marginal toward a Gaussian. Features are the GGD shapes of the
normalized bands (per band and concatenated across scales) plus
structural correlations of the high-pass response against every band and
between orientation pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from srqa import stats
from srqa.imgcore import check_gray
from srqa.steerpyr import SteerableDecomposition, decompose

NEIGHBORHOOD_SIZE = 15
GLOBAL_DIM = 45

# 3x3 window offsets in the current band, row-major; index 4 is the center.
_SELF_OFFSETS = [(dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1)]
# Center plus 4-connected neighbors in the adjacent-orientation band.
_NEIGHBOR_OFFSETS = [(0, 0), (-1, 0), (1, 0), (0, -1), (0, 1)]


class DegenerateBandError(ValueError):
    """Band with no usable covariance structure (constant or non-finite)."""


@dataclass
class GsmNormalizedBand:
    """Divisively normalized band values and the per-position mixer ẑ."""

    values: np.ndarray
    zhat: np.ndarray


def _shifted_views(arr: np.ndarray, offsets) -> list:
    padded = np.pad(arr, 1, mode="symmetric")
    h, w = arr.shape
    return [padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w] for dy, dx in offsets]


def _upsample2(arr: np.ndarray, shape) -> np.ndarray:
    up = np.kron(arr, np.ones((2, 2)))
    return up[:shape[0], :shape[1]]


def build_neighborhoods(decomp: SteerableDecomposition, scale: int,
                        orientation: int) -> np.ndarray:
    """15-dim neighborhood vectors for every position of one band.

    Layout per vector: 9 values from the 3x3 window in the band itself
    (row-major), 5 from the adjacent-orientation band (center, up, down,
    left, right) and 1 from the parent band (next coarser scale, or the
    low-pass residual at the coarsest scale), all nearest-neighbor aligned.
    Real parts of complex coefficients are used; borders extend
    symmetrically. Returns an (H*W, 15) matrix.
    """
    n_scales = decomp.scales
    n_orient = decomp.orientations
    if not (1 <= scale <= n_scales):
        raise ValueError(f"scale must be in 1..{n_scales}, got {scale}")
    if not (0 <= orientation < n_orient):
        raise ValueError(f"orientation must be in 0..{n_orient - 1}, got {orientation}")

    band = np.asarray(decomp.bands[scale - 1][orientation]).real
    adjacent = np.asarray(
        decomp.bands[scale - 1][(orientation + 1) % n_orient]
    ).real
    if scale < n_scales:
        parent_src = np.asarray(decomp.bands[scale][orientation]).real
    else:
        parent_src = np.asarray(decomp.lowpass, dtype=np.float64)
    parent = _upsample2(parent_src, band.shape)

    columns = _shifted_views(band, _SELF_OFFSETS)
    columns += _shifted_views(adjacent, _NEIGHBOR_OFFSETS)
    columns.append(parent)
    return np.stack([c.ravel() for c in columns], axis=1)


def divisive_normalize(band, neighborhoods, Q=None) -> GsmNormalizedBand:
    """Normalize a band by its estimated GSM mixer ẑ = sqrt(YᵀQ⁻¹Y/N).

    ``Q`` defaults to the sample covariance of the neighborhood vectors and
    is regularized with eps = 1e-6 * trace(Q)/N before inversion.
    """
    band = np.asarray(band, dtype=np.float64)
    nb = np.asarray(neighborhoods, dtype=np.float64)
    if nb.ndim != 2 or nb.shape[1] != NEIGHBORHOOD_SIZE:
        raise ValueError(f"neighborhoods must be (n, {NEIGHBORHOOD_SIZE}), got {nb.shape}")
    if nb.shape[0] != band.size:
        raise ValueError("neighborhood count does not match band size")
    if Q is None:
        Q = np.cov(nb, rowvar=False)
    Q = np.asarray(Q, dtype=np.float64)
    if not np.all(np.isfinite(Q)):
        raise DegenerateBandError("non-finite neighborhood covariance")
    trace = float(np.trace(Q))
    # constant bands leave only ~1e-16-scale mean-subtraction residue
    scale = max(1.0, float(np.abs(nb).max()))
    if trace <= NEIGHBORHOOD_SIZE * (1e-12 * scale) ** 2:
        raise DegenerateBandError("numerically zero neighborhood covariance")
    Qr = Q + (1e-6 * trace / NEIGHBORHOOD_SIZE) * np.eye(NEIGHBORHOOD_SIZE)
    try:
        chol = np.linalg.cholesky(Qr)
    except np.linalg.LinAlgError as exc:
        raise DegenerateBandError(f"covariance not positive definite: {exc}") from None
    w = solve_triangular(chol, nb.T, lower=True)
    quad = np.einsum("ij,ij->j", w, w)
    zhat = np.sqrt(quad / NEIGHBORHOOD_SIZE).reshape(band.shape)
    values = band / np.maximum(zhat, 1e-12)
    return GsmNormalizedBand(values=values, zhat=zhat)


def _corr_or_default(a: np.ndarray, b: np.ndarray) -> float:
    # Degenerate (constant) bands carry no structure; report 0 by convention.
    if a.max() == a.min() or b.max() == b.min():
        return 0.0
    return stats.structural_correlation(a, b)


def _fit_gamma(values: np.ndarray) -> float:
    params = stats.fit_ggd(values.ravel())
    return params.gamma


def global_features(image) -> np.ndarray:
    """45 global-frequency features.

    Order: 12 per-band GGD shapes (scale-major), 6 shapes of orientations
    concatenated across scales, 12 high-pass-vs-band structural
    correlations, 15 pairwise orientation correlations at the fine scale.
    Degenerate bands contribute the flagged defaults gamma=10, rho=0.
    """
    img = check_gray(image)
    if min(img.shape) < 32:
        raise ValueError(f"image must be at least 32x32, got {img.shape}")
    decomp = decompose(img)
    n_scales = decomp.scales
    n_orient = decomp.orientations

    normalized = {}
    for s in range(1, n_scales + 1):
        for k in range(n_orient):
            band = np.asarray(decomp.bands[s - 1][k]).real
            try:
                nb = build_neighborhoods(decomp, s, k)
                normalized[s, k] = divisive_normalize(band, nb).values
            except DegenerateBandError:
                normalized[s, k] = None

    band_gamma = []
    for s in range(1, n_scales + 1):
        for k in range(n_orient):
            values = normalized[s, k]
            band_gamma.append(stats.GAMMA_HI if values is None else _fit_gamma(values))

    concat_gamma = []
    for k in range(n_orient):
        parts = [normalized[s, k] for s in range(1, n_scales + 1)]
        if any(p is None for p in parts):
            concat_gamma.append(stats.GAMMA_HI)
        else:
            concat_gamma.append(_fit_gamma(np.concatenate([p.ravel() for p in parts])))

    highpass = decomp.highpass
    across_scale = []
    for s in range(1, n_scales + 1):
        for k in range(n_orient):
            mag = np.abs(np.asarray(decomp.bands[s - 1][k]))
            for _ in range(s - 1):
                mag = _upsample2(mag, (mag.shape[0] * 2, mag.shape[1] * 2))
            mag = mag[:highpass.shape[0], :highpass.shape[1]]
            across_scale.append(_corr_or_default(highpass, mag))

    fine_mags = [np.abs(np.asarray(decomp.bands[0][k])) for k in range(n_orient)]
    across_band = []
    for i in range(n_orient):
        for j in range(i + 1, n_orient):
            across_band.append(_corr_or_default(fine_mags[i], fine_mags[j]))

    out = np.asarray(band_gamma + concat_gamma + across_scale + across_band,
                     dtype=np.float64)
    assert out.size == GLOBAL_DIM
    return out
