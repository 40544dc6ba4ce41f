"""Spatial discontinuity features: patch covariance spectra, 75 dimensions.

Smooth content concentrates patch energy in few principal directions, so
its covariance spectrum decays fast; sharp or textured content keeps the
tail alive. Per pyramid level the 25 eigenvalues of the centered 5x5
patch covariance are sorted descending and normalized by the largest.
"""

from __future__ import annotations

import numpy as np

from srqa.imgcore import ImageError, build_pyramid, check_gray, extract_patches

PATCH = 5
SPATIAL_DIM = 75


def _level_spectrum(level: np.ndarray) -> np.ndarray:
    if min(level.shape) < PATCH:
        raise ImageError(
            f"pyramid level {level.shape} smaller than one {PATCH}x{PATCH} patch"
        )
    patches = extract_patches(level, PATCH, 1)
    centered = patches - patches.mean(axis=0)
    cov = centered.T @ centered / max(patches.shape[0] - 1, 1)
    cov = 0.5 * (cov + cov.T)  # exact symmetry before eigendecomposition
    vals = np.linalg.eigvalsh(cov)[::-1]
    vals = np.clip(vals, 0.0, None)
    if vals[0] < 1e-15:
        return np.zeros(PATCH * PATCH)
    return vals / vals[0]


def spatial_features(image) -> np.ndarray:
    """75 features: three levels of descending, max-normalized patch
    covariance eigenvalues."""
    img = check_gray(image)
    return np.concatenate([_level_spectrum(level) for level in build_pyramid(img, 3)])
