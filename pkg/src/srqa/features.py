"""Full 138-dimensional descriptor: local (18) + global (45) + spatial (75)."""

from __future__ import annotations

import numpy as np

from srqa.featglobal import GLOBAL_DIM, global_features
from srqa.featlocal import LOCAL_DIM, local_features
from srqa.featspatial import SPATIAL_DIM, spatial_features
from srqa.imgcore import check_gray

FEATURE_DIM = LOCAL_DIM + GLOBAL_DIM + SPATIAL_DIM

FEATURE_BLOCKS = {
    "local": slice(0, LOCAL_DIM),
    "global": slice(LOCAL_DIM, LOCAL_DIM + GLOBAL_DIM),
    "spatial": slice(LOCAL_DIM + GLOBAL_DIM, FEATURE_DIM),
}

# Bump when any extractor changes numerically; keys the feature cache.
EXTRACTOR_VERSION = 1


def extract_features(image) -> np.ndarray:
    """Extract the 138-dim descriptor from a grayscale image in [0, 1].

    Requires min dimension >= 32 (the wavelet decomposition floor).
    """
    img = check_gray(image)
    if min(img.shape) < 32:
        raise ValueError(f"image must be at least 32x32, got {img.shape}")
    vec = np.concatenate(
        [local_features(img), global_features(img), spatial_features(img)]
    )
    assert vec.shape == (FEATURE_DIM,)
    return vec


def split_blocks(features) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split 138-dim vectors (or an (n, 138) matrix) into the three blocks."""
    f = np.asarray(features, dtype=np.float64)
    if f.shape[-1] != FEATURE_DIM:
        raise ValueError(f"expected {FEATURE_DIM} features, got {f.shape[-1]}")
    return (
        f[..., FEATURE_BLOCKS["local"]],
        f[..., FEATURE_BLOCKS["global"]],
        f[..., FEATURE_BLOCKS["spatial"]],
    )
