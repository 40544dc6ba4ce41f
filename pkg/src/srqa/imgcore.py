"""Image ingestion, luminance conversion, pyramids, patches and LR synthesis.

A grayscale image is represented throughout the package as a 2-D float64
array with values in [0, 1], row-major (height, width).
"""

from __future__ import annotations

import math

import numpy as np
from PIL import Image
from scipy import ndimage

# ITU-R BT.601 luma weights.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)

# Default (scale, kernel width) pairings used to synthesize LR images.
SCALE_SIGMA_PAIRS = {2: 0.8, 3: 1.0, 4: 1.2, 5: 1.6, 6: 1.8, 8: 2.0}


class ImageError(ValueError):
    """Unreadable, unsupported or malformed image input."""


def to_luma(r, g, b):
    """BT.601 luminance of RGB values in [0, 1]."""
    return LUMA_WEIGHTS[0] * r + LUMA_WEIGHTS[1] * g + LUMA_WEIGHTS[2] * b


def check_gray(image) -> np.ndarray:
    """Validate and return a grayscale image array.

    Accepts any array-like; requires 2-D, non-empty, finite values in [0, 1].
    """
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim != 2:
        raise ImageError(f"expected a 2-D grayscale array, got shape {arr.shape}")
    if arr.size == 0:
        raise ImageError("zero-dimension image")
    if not np.all(np.isfinite(arr)):
        raise ImageError("image contains non-finite values")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ImageError("image values must lie in [0, 1]")
    return arr


def load_image(path) -> np.ndarray:
    """Load a PNG or binary PGM/PPM file as a grayscale image in [0, 1].

    8-bit grayscale maps channels linearly to [0, 1]; RGB input is reduced
    with :func:`to_luma`. Any other format or pixel mode is rejected.
    """
    try:
        with Image.open(path) as im:
            fmt = im.format
            im.load()
            mode = im.mode
            arr = np.asarray(im)
    except FileNotFoundError:
        raise ImageError(f"unreadable file: {path}: no such file") from None
    except Exception as exc:  # Pillow raises OSError/SyntaxError variants
        raise ImageError(f"unreadable file: {path}: {exc}") from None
    if fmt not in ("PNG", "PPM"):
        raise ImageError(f"unsupported format: {fmt or 'unknown'} (PNG or PGM/PPM only)")
    if arr.size == 0:
        raise ImageError("zero-dimension image")
    if mode == "L":
        gray = arr.astype(np.float64) / 255.0
    elif mode == "RGB":
        rgb = arr.astype(np.float64) / 255.0
        gray = to_luma(rgb[..., 0], rgb[..., 1], rgb[..., 2])
    else:
        raise ImageError(f"unsupported pixel mode: {mode} (8-bit gray or RGB only)")
    return gray


def save_image(image, path) -> None:
    """Write a grayscale [0, 1] image as an 8-bit PNG/PGM (by extension)."""
    arr = check_gray(image)
    data = np.clip(np.rint(arr * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(data, mode="L").save(path)


def _gauss1d(sigma: float, size: int) -> np.ndarray:
    radius = size // 2
    d = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-(d * d) / (2.0 * sigma * sigma))
    return g / g.sum()


def gaussian_kernel(sigma: float, size: int) -> np.ndarray:
    """Normalized 2-D Gaussian kernel, weight(dx,dy) ∝ exp(-(dx²+dy²)/2σ²)."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if size % 2 == 0:
        raise ValueError(f"kernel size must be odd, got {size}")
    if size < 3:
        raise ValueError(f"kernel size must be >= 3, got {size}")
    g = _gauss1d(sigma, size)
    return np.outer(g, g)


def _blur(image: np.ndarray, sigma: float, size: int) -> np.ndarray:
    # Separable correlation with symmetric (edge-inclusive mirror) extension.
    g = _gauss1d(sigma, size)
    out = ndimage.correlate1d(image, g, axis=0, mode="reflect")
    return ndimage.correlate1d(out, g, axis=1, mode="reflect")


def downsample(image, s: int, sigma: float) -> np.ndarray:
    """Synthesize an LR image: Gaussian-weighted sums on a stride-s grid.

    The kernel support is truncated at 2*ceil(3σ)+1 taps and re-normalized;
    boundaries use symmetric extension. Images whose dimensions are not
    multiples of ``s`` are center-cropped first. Each output pixel (u, v)
    aggregates HR pixels around the grid point (s*u + s//2, s*v + s//2).
    """
    if s < 2:
        raise ValueError(f"scale factor must be >= 2, got {s}")
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise ImageError(f"expected a 2-D grayscale array, got shape {img.shape}")
    h, w = img.shape
    if h < s or w < s:
        raise ImageError(f"image {h}x{w} smaller than scale factor {s}")
    ch, cw = (h // s) * s, (w // s) * s
    top, left = (h - ch) // 2, (w - cw) // 2
    img = img[top:top + ch, left:left + cw]
    size = 2 * math.ceil(3.0 * sigma) + 1
    blurred = _blur(img, sigma, size)
    off = s // 2
    return blurred[off::s, off::s].copy()


def build_pyramid(image, levels: int = 3) -> list[np.ndarray]:
    """Gaussian pyramid; level 0 is the input, each next level blurred
    (σ=1.0, 5 taps) and decimated by 2 (ceil halving)."""
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise ImageError(f"expected a 2-D grayscale array, got shape {img.shape}")
    min_dim = min(img.shape)
    need = (2 ** (levels - 1)) * 7
    if min_dim < need:
        raise ImageError(
            f"image too small for {levels}-level pyramid: "
            f"min dimension {min_dim} < {need}"
        )
    pyr = [img]
    for _ in range(levels - 1):
        pyr.append(_blur(pyr[-1], 1.0, 5)[::2, ::2])
    return pyr


def extract_patches(image, size: int = 5, stride: int = 1) -> np.ndarray:
    """All fully-contained size×size patches, row-major vectorized, shape
    (n_patches, size²)."""
    img = np.asarray(image, dtype=np.float64)
    h, w = img.shape
    if h < size or w < size:
        raise ImageError(f"image {h}x{w} smaller than patch size {size}")
    win = np.lib.stride_tricks.sliding_window_view(img, (size, size))
    win = win[::stride, ::stride]
    return win.reshape(-1, size * size)
