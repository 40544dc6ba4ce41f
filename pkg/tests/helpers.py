"""Shared test utilities: offline image corpus, SR-style degradations and
dataset builders."""

import csv

import numpy as np
import skimage.data
from PIL import Image
from scipy import ndimage

from srqa import imgcore

HR = 240  # desk-study HR size; divisible by the scales 2, 3, 4
DESK_SCALE_SIGMA = {2: 0.8, 3: 1.0, 4: 1.2}

# Upsampler quality rank used by the pseudo-perceptual score: blocky nearest
# below smooth bilinear below unsharp-masked bicubic.
METHOD_BONUS = {"nearest": -1.2, "bilinear": -0.5, "bicubic_sharp": 0.0}


def to_gray(arr) -> np.ndarray:
    a = np.asarray(arr, dtype=np.float64) / 255.0
    if a.ndim == 3:
        a = imgcore.to_luma(a[..., 0], a[..., 1], a[..., 2])
    return a


def natural_corpus() -> dict:
    d = skimage.data
    return {
        "camera": to_gray(d.camera())[100:356, 100:356],
        "moon": to_gray(d.moon())[100:356, 100:356],
        "coins": to_gray(d.coins())[30:286, 60:316],
        "brick": to_gray(d.brick())[:256, :256],
        "astronaut": to_gray(d.astronaut())[50:306, 100:356],
    }


def desk_sources() -> dict:
    """Photographic 240x240 crops for the desk-scale study."""
    d = skimage.data
    return {
        "camera": to_gray(d.camera())[100:100 + HR, 100:100 + HR],
        "astronaut": to_gray(d.astronaut())[50:50 + HR, 100:100 + HR],
        "cat": to_gray(d.cat())[30:30 + HR, 100:100 + HR],
        "chelsea": to_gray(d.chelsea())[30:30 + HR, 100:100 + HR],
        "coffee": to_gray(d.coffee())[80:80 + HR, 180:180 + HR],
        "clock": to_gray(d.clock())[30:30 + HR, 80:80 + HR],
        "coins": to_gray(d.coins())[30:30 + HR, 60:60 + HR],
    }


def upsample(low: np.ndarray, s: int, method: str) -> np.ndarray:
    h, w = low.shape
    pil = Image.fromarray(np.clip(np.rint(low * 255), 0, 255).astype(np.uint8), "L")
    if method == "nearest":
        return np.asarray(pil.resize((w * s, h * s), Image.NEAREST), float) / 255.0
    if method == "bilinear":
        return np.asarray(pil.resize((w * s, h * s), Image.BILINEAR), float) / 255.0
    if method == "bicubic_sharp":
        x = np.asarray(pil.resize((w * s, h * s), Image.BICUBIC), float) / 255.0
        blur = ndimage.gaussian_filter(x, 1.0, mode="reflect")
        return np.clip(x + 0.8 * (x - blur), 0.0, 1.0)
    raise ValueError(f"unknown upsampler {method!r}")


def pseudo_score(s: int, method: str, rng) -> float:
    """Fixed monotone function of (scale, upsampler rank) plus bounded noise."""
    base = 9.2 - 1.35 * s + METHOD_BONUS[method]
    return float(np.clip(base + rng.uniform(-0.2, 0.2), 0.0, 10.0))


def make_desk_dataset(root) -> dict:
    """Generate the desk-scale SR study and its manifest under ``root``."""
    rng = np.random.default_rng(1234)
    rows = []
    for name, img in desk_sources().items():
        for s, sigma in DESK_SCALE_SIGMA.items():
            low = imgcore.downsample(img, s, sigma)
            for method in METHOD_BONUS:
                sr = upsample(low, s, method)
                fname = f"{name}_s{s}_{method}.png"
                imgcore.save_image(sr, root / fname)
                rows.append([fname, name, method, s, sigma,
                             repr(pseudo_score(s, method, rng))])
    manifest = root / "manifest.csv"
    with open(manifest, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["image_path", "ref_id", "method", "s", "sigma", "score"])
        writer.writerows(rows)
    cache = root / "cache"
    cache.mkdir()
    return {"manifest": manifest, "cache": cache, "n_entries": len(rows)}


def make_tiny_dataset(root, n_refs: int = 4, size: int = 48) -> dict:
    """Small fast dataset: blurred variants of noise-texture images."""
    rng = np.random.default_rng(99)
    rows = []
    for r in range(n_refs):
        base = ndimage.gaussian_filter(rng.random((size, size)), 1.0, mode="reflect")
        base = (base - base.min()) / (base.max() - base.min())
        for j, blur in enumerate([0.0, 0.8, 1.6]):
            img = ndimage.gaussian_filter(base, blur, mode="reflect") if blur else base
            img = np.clip(img, 0.0, 1.0)
            fname = f"ref{r}_v{j}.png"
            imgcore.save_image(img, root / fname)
            score = 8.0 - 2.5 * j + rng.uniform(-0.3, 0.3)
            rows.append([fname, f"ref{r}", f"m{j}", 2 + j, 0.8, repr(score)])
    manifest = root / "manifest.csv"
    with open(manifest, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["image_path", "ref_id", "method", "s", "sigma", "score"])
        writer.writerows(rows)
    cache = root / "cache"
    cache.mkdir()
    return {"manifest": manifest, "cache": cache, "n_entries": len(rows)}


def reflect_index(i: int, n: int) -> int:
    """scipy 'reflect' (half-sample symmetric) index fold: dcba|abcd|dcba."""
    while i < 0 or i >= n:
        if i < 0:
            i = -1 - i
        if i >= n:
            i = 2 * n - 1 - i
    return i
