"""Perception-guided fusion: stitch the best-scoring regions of several
SR candidates into one image.

The image is divided into a g x g grid; every candidate's cell (expanded
by an overlap margin) is scored with the trained metric and the winner is
selected per cell, ties resolved to the lowest candidate index. Cells are
blended with separable linear feathering across the overlap zones, so
every fused pixel is a convex combination of candidate pixels.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from srqa.features import extract_features
from srqa.imgcore import ImageError, to_luma
from srqa.regress.model import TwoStageModel, predict_quality

MIN_CELL = 64


@dataclass
class RegionScoreMap:
    """Per-cell winning candidate index and its (raw) quality score."""

    grid: int
    winners: np.ndarray  # (g, g) int
    scores: np.ndarray   # (g, g) float

    def to_dict(self) -> dict:
        return {
            "grid": self.grid,
            "winners": self.winners.tolist(),
            "scores": self.scores.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _as_luma(image: np.ndarray) -> np.ndarray:
    if image.ndim == 2:
        return image
    return to_luma(image[..., 0], image[..., 1], image[..., 2])


def _edges(n: int, g: int) -> list:
    return [round(i * n / g) for i in range(g + 1)]


def _ramp_weights(length: int, ramp_lo: bool, ramp_hi: bool, span: int) -> np.ndarray:
    w = np.ones(length)
    if span > 0:
        rise = (np.arange(span) + 0.5) / span
        if ramp_lo:
            w[:span] = rise
        if ramp_hi:
            w[length - span:] = rise[::-1]
    return w


def grid_fuse(candidates, model: TwoStageModel, g: int = 3,
              overlap: int = 16):
    """Fuse candidate images cellwise by predicted quality.

    ``candidates`` are same-shaped grayscale or RGB arrays in [0, 1].
    Returns (fused image, RegionScoreMap). Cells must be at least
    64x64 so the feature extractors have room to work.
    """
    if len(candidates) < 2:
        raise ValueError(f"need at least 2 candidates, got {len(candidates)}")
    imgs = [np.asarray(c, dtype=np.float64) for c in candidates]
    shape = imgs[0].shape
    for i, img in enumerate(imgs):
        if img.shape != shape:
            raise ValueError(
                f"candidate {i} shape {img.shape} does not match {shape}"
            )
        if img.ndim not in (2, 3) or (img.ndim == 3 and img.shape[2] != 3):
            raise ValueError(f"candidate {i}: expected gray or RGB, got {img.shape}")
    if g < 1:
        raise ValueError(f"grid size must be >= 1, got {g}")
    if overlap < 0:
        raise ValueError(f"overlap must be >= 0, got {overlap}")

    h, w = shape[:2]
    rows = _edges(h, g)
    cols = _edges(w, g)
    min_cell = min(
        min(rows[i + 1] - rows[i] for i in range(g)),
        min(cols[j + 1] - cols[j] for j in range(g)),
    )
    if min_cell < MIN_CELL:
        raise ImageError(
            f"cells too small: {min_cell} px < {MIN_CELL} (grid {g} on {h}x{w})"
        )
    if overlap > min_cell // 2:
        raise ValueError(f"overlap {overlap} exceeds half the cell size {min_cell}")

    winners = np.zeros((g, g), dtype=int)
    win_scores = np.zeros((g, g))
    cell_boxes = {}
    for i in range(g):
        for j in range(g):
            top = max(0, rows[i] - overlap)
            bottom = min(h, rows[i + 1] + overlap)
            left = max(0, cols[j] - overlap)
            right = min(w, cols[j + 1] + overlap)
            cell_boxes[i, j] = (top, bottom, left, right)
            best_idx = 0
            best_score = -np.inf
            for idx, img in enumerate(imgs):
                cell = _as_luma(img[top:bottom, left:right])
                score = predict_quality(model, extract_features(cell), raw=True)
                if score > best_score:
                    best_idx, best_score = idx, score
            winners[i, j] = best_idx
            win_scores[i, j] = best_score

    fused = np.zeros(shape)
    total = np.zeros((h, w))
    span = 2 * overlap
    for i in range(g):
        for j in range(g):
            top, bottom, left, right = cell_boxes[i, j]
            wy = _ramp_weights(bottom - top, ramp_lo=i > 0, ramp_hi=i < g - 1,
                               span=min(span, bottom - top))
            wx = _ramp_weights(right - left, ramp_lo=j > 0, ramp_hi=j < g - 1,
                               span=min(span, right - left))
            weight = np.outer(wy, wx)
            piece = imgs[winners[i, j]][top:bottom, left:right]
            if piece.ndim == 3:
                fused[top:bottom, left:right] += weight[..., None] * piece
            else:
                fused[top:bottom, left:right] += weight * piece
            total[top:bottom, left:right] += weight

    if fused.ndim == 3:
        fused /= total[..., None]
    else:
        fused /= total
    return fused, RegionScoreMap(grid=g, winners=winners, scores=win_scores)
