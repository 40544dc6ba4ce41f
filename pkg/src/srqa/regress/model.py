"""Two-stage model: three per-family forests combined linearly.

Model file layout (all little-endian, version 1):

    magic   4 bytes  b"SRQM"
    version uint32
    hlen    uint32   length of the JSON header
    header  hlen bytes, JSON: lambda, intercept, ridge_used, feature_dims,
                             train_meta
    3x forest:
        n_trees     uint32
        feature_dim uint32
        per tree:
            n_nodes uint32
            feature   int32[n_nodes]
            threshold float64[n_nodes]
            left      int32[n_nodes]
            right     int32[n_nodes]
            value     float64[n_nodes]

The writer is fully deterministic, so identical training runs produce
byte-identical files.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from srqa.features import FEATURE_DIM, split_blocks
from srqa.regress.forest import Forest, Tree, predict_forest_many, train_forest

MAGIC = b"SRQM"
FORMAT_VERSION = 1

SCORE_MIN = 0.0
SCORE_MAX = 10.0


class ModelFormatError(ValueError):
    """Corrupt, truncated or version-incompatible model file."""


@dataclass
class LambdaFit:
    weights: np.ndarray
    intercept: float
    ridge_used: bool


@dataclass
class TwoStageModel:
    forests: tuple          # (local, global, spatial)
    lam: np.ndarray         # per-forest weights
    intercept: float
    ridge_used: bool
    train_meta: dict = field(default_factory=dict)

    @property
    def feature_dims(self) -> tuple:
        return tuple(f.feature_dim for f in self.forests)


def fit_lambda(yhat, y, *, intercept: bool = True, ridge: float = 1e-6) -> LambdaFit:
    """Least-squares combination weights for per-forest predictions.

    Falls back to a ridge solve (flagged) when the design matrix is
    rank-deficient. ``intercept`` appends a constant column so affine
    shifts of the forest outputs are absorbed exactly.
    """
    yhat = np.asarray(yhat, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if yhat.ndim != 2 or yhat.shape[0] != y.shape[0]:
        raise ValueError(f"prediction matrix {yhat.shape} does not match {y.shape[0]} targets")
    if yhat.shape[0] < yhat.shape[1]:
        raise ValueError("need at least as many rows as prediction columns")
    A = np.column_stack([yhat, np.ones(yhat.shape[0])]) if intercept else yhat
    ridge_used = False
    if np.linalg.matrix_rank(A) < A.shape[1]:
        ridge_used = True
        coef = np.linalg.solve(A.T @ A + ridge * np.eye(A.shape[1]), A.T @ y)
    else:
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    if intercept:
        return LambdaFit(weights=coef[:-1], intercept=float(coef[-1]), ridge_used=ridge_used)
    return LambdaFit(weights=coef, intercept=0.0, ridge_used=ridge_used)


def train_two_stage(features, scores, *, n_trees: int = 2000, seed: int = 0,
                    min_leaf: int = 5, n_candidates: int | None = None,
                    subsample: float = 1.0, bootstrap: bool = True) -> TwoStageModel:
    """Train the three family forests and the combination weights.

    The weights are fitted on out-of-bag forest predictions (in-sample
    predictions when bootstrapping is disabled).
    """
    F = np.asarray(features, dtype=np.float64)
    y = np.asarray(scores, dtype=np.float64)
    if F.ndim != 2 or F.shape[1] != FEATURE_DIM:
        raise ValueError(f"expected (n, {FEATURE_DIM}) features, got shape {F.shape}")
    blocks = split_blocks(F)
    ss = np.random.SeedSequence(seed)
    keys = ss.spawn(3)
    forests = tuple(
        train_forest(
            block, y, n_trees,
            min_leaf=min_leaf, n_candidates=n_candidates,
            subsample=subsample, bootstrap=bootstrap, seed=keys[i],
        )
        for i, block in enumerate(blocks)
    )
    yhat = np.column_stack(
        [
            f.oob_prediction if f.oob_prediction is not None
            else predict_forest_many(f, block)
            for f, block in zip(forests, blocks)
        ]
    )
    fit = fit_lambda(yhat, y)
    return TwoStageModel(
        forests=forests,
        lam=fit.weights,
        intercept=fit.intercept,
        ridge_used=fit.ridge_used,
        train_meta={
            "n_trees": int(n_trees),
            "seed": int(seed),
            "min_leaf": int(min_leaf),
            "n_candidates": None if n_candidates is None else int(n_candidates),
            "subsample": float(subsample),
            "bootstrap": bool(bootstrap),
        },
    )


def predict_quality_many(model: TwoStageModel, features, raw: bool = False) -> np.ndarray:
    """Scores for an (n, 138) feature matrix; clamped to [0, 10] unless raw."""
    F = np.asarray(features, dtype=np.float64)
    blocks = split_blocks(F)
    yhat = np.column_stack(
        [predict_forest_many(f, b) for f, b in zip(model.forests, blocks)]
    )
    out = yhat @ model.lam + model.intercept
    return out if raw else np.clip(out, SCORE_MIN, SCORE_MAX)


def predict_quality(model: TwoStageModel, features, raw: bool = False) -> float:
    """Quality score of one 138-dim feature vector."""
    f = np.asarray(features, dtype=np.float64)
    if f.shape != (FEATURE_DIM,):
        raise ValueError(f"expected {FEATURE_DIM} features, got shape {f.shape}")
    if not np.all(np.isfinite(f)):
        raise ValueError("features must be finite")
    return float(predict_quality_many(model, f[None, :], raw=raw)[0])


def _pack_array(arr, dtype) -> bytes:
    return np.ascontiguousarray(arr, dtype=dtype).tobytes()


def save_model(model: TwoStageModel, path) -> None:
    """Serialize a model; see the module docstring for the layout."""
    header = json.dumps(
        {
            "lambda": [float(v) for v in model.lam],
            "intercept": float(model.intercept),
            "ridge_used": bool(model.ridge_used),
            "feature_dims": list(model.feature_dims),
            "train_meta": model.train_meta,
        },
        sort_keys=True,
        separators=(",", ":"),
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, len(header)))
        fh.write(header)
        for forest in model.forests:
            fh.write(struct.pack("<II", len(forest.trees), forest.feature_dim))
            for tree in forest.trees:
                fh.write(struct.pack("<I", tree.n_nodes))
                fh.write(_pack_array(tree.feature, "<i4"))
                fh.write(_pack_array(tree.threshold, "<f8"))
                fh.write(_pack_array(tree.left, "<i4"))
                fh.write(_pack_array(tree.right, "<i4"))
                fh.write(_pack_array(tree.value, "<f8"))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ModelFormatError("corrupt or truncated model file")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def array(self, dtype: str, count: int) -> np.ndarray:
        itemsize = np.dtype(dtype).itemsize
        return np.frombuffer(self.take(itemsize * count), dtype=dtype).copy()


def load_model(path) -> TwoStageModel:
    """Load a model saved by :func:`save_model`.

    Rejects unknown magic bytes and format versions; truncated files raise
    :class:`ModelFormatError`.
    """
    with open(path, "rb") as fh:
        reader = _Reader(fh.read())
    if reader.take(4) != MAGIC:
        raise ModelFormatError("not a srqa model file")
    version = reader.u32()
    if version != FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported model format version {version} (expected {FORMAT_VERSION})"
        )
    try:
        header = json.loads(reader.take(reader.u32()).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"corrupt model header: {exc}") from None
    forests = []
    for _ in range(3):
        n_trees = reader.u32()
        feature_dim = reader.u32()
        trees = []
        for _ in range(n_trees):
            n_nodes = reader.u32()
            trees.append(
                Tree(
                    feature=reader.array("<i4", n_nodes).astype(np.int32),
                    threshold=reader.array("<f8", n_nodes),
                    left=reader.array("<i4", n_nodes).astype(np.int32),
                    right=reader.array("<i4", n_nodes).astype(np.int32),
                    value=reader.array("<f8", n_nodes),
                )
            )
        forests.append(Forest(trees=trees, feature_dim=feature_dim))
    return TwoStageModel(
        forests=tuple(forests),
        lam=np.asarray(header["lambda"], dtype=np.float64),
        intercept=float(header["intercept"]),
        ridge_used=bool(header["ridge_used"]),
        train_meta=header.get("train_meta", {}),
    )
