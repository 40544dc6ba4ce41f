"""Local frequency features: blockwise DCT statistics, 18 dimensions.

The image pyramid is tiled into non-overlapping 7x7 blocks. Each block
contributes the GGD shape of its 48 AC coefficients, the normalized
deviation of their magnitudes, and the spread of that deviation across
three radial coefficient groups. Block statistics are pooled per pyramid
level by their mean and a one-sided decile mean.
"""

from __future__ import annotations

import numpy as np
from scipy import fft as _fft

from srqa import stats
from srqa.imgcore import ImageError, build_pyramid, check_gray

BLOCK = 7
LOCAL_DIM = 18

# Radial grouping of AC coefficients by index sum d = u + v:
# low 1..3 (9 coefficients), mid 4..6 (18), high 7..12 (21).
_D = np.add.outer(np.arange(BLOCK), np.arange(BLOCK))
GROUP_MASKS = (
    (_D >= 1) & (_D <= 3),
    (_D >= 4) & (_D <= 6),
    (_D >= 7),
)
_AC_MASK = _D > 0


def block_dct(block) -> np.ndarray:
    """Orthonormal type-II 2-D DCT of a 7x7 block."""
    b = np.asarray(block, dtype=np.float64)
    if b.shape != (BLOCK, BLOCK):
        raise ValueError(f"expected a {BLOCK}x{BLOCK} block, got {b.shape}")
    return _fft.dctn(b, norm="ortho")


def group_coefficients(coeffs):
    """Split a 7x7 coefficient block into the three radial AC groups."""
    c = np.asarray(coeffs, dtype=np.float64)
    if c.shape != (BLOCK, BLOCK):
        raise ValueError(f"expected a {BLOCK}x{BLOCK} block, got {c.shape}")
    return tuple(c[m] for m in GROUP_MASKS)


def _tile_blocks(level: np.ndarray) -> np.ndarray:
    h, w = level.shape
    bh, bw = h // BLOCK, w // BLOCK
    if bh == 0 or bw == 0:
        raise ImageError(f"pyramid level {h}x{w} smaller than one {BLOCK}x{BLOCK} block")
    tiled = level[:bh * BLOCK, :bw * BLOCK]
    blocks = tiled.reshape(bh, BLOCK, bw, BLOCK).swapaxes(1, 2)
    return blocks.reshape(-1, BLOCK, BLOCK)


def _ratio(values: np.ndarray) -> np.ndarray:
    # std/mean of magnitudes; near-zero means are flat blocks -> ratio 0.
    mean = values.mean(axis=-1)
    std = values.std(axis=-1)
    out = np.zeros_like(mean)
    ok = mean >= 1e-12
    out[ok] = std[ok] / mean[ok]
    return out


def _block_stats(blocks: np.ndarray):
    coeffs = _fft.dctn(blocks, axes=(1, 2), norm="ortho")
    ac = coeffs[:, _AC_MASK]

    mu = ac.mean(axis=1, keepdims=True)
    d = ac - mu
    m2 = np.mean(d * d, axis=1)
    m1 = np.mean(np.abs(d), axis=1)
    gamma = stats.shape_from_moments(m1, m2)
    gamma[np.sqrt(m2) < 1e-12] = stats.GAMMA_HI  # flat block: clamp shape

    mag = np.abs(ac)
    sigma_bar = _ratio(mag)
    group_ratios = np.stack(
        [_ratio(np.abs(coeffs[:, m])) for m in GROUP_MASKS], axis=0
    )
    big_sigma = group_ratios.std(axis=0)
    return gamma, sigma_bar, big_sigma


def _decile_mean(values: np.ndarray, lowest: bool) -> float:
    k = max(1, values.size // 10)
    s = np.sort(values)
    part = s[:k] if lowest else s[-k:]
    return float(part.mean())


def local_features(image) -> np.ndarray:
    """18 local-frequency features: per pyramid level, mean and one-sided
    decile mean of (γ, σ̄, Σ) over all 7x7 blocks."""
    img = check_gray(image)
    feats = []
    for level in build_pyramid(img, 3):
        gamma, sigma_bar, big_sigma = _block_stats(_tile_blocks(level))
        feats.extend([
            float(gamma.mean()),
            _decile_mean(gamma, lowest=True),
            float(sigma_bar.mean()),
            _decile_mean(sigma_bar, lowest=False),
            float(big_sigma.mean()),
            _decile_mean(big_sigma, lowest=False),
        ])
    return np.asarray(feats, dtype=np.float64)
