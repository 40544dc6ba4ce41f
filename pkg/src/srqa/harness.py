"""Dataset manifests, validation splits, protocol runs and reports.

A manifest is a CSV with header ``image_path,ref_id,method,s,sigma,score``;
image paths are resolved relative to the manifest file. Features are
extracted once per image into a cache keyed by file content hash and
extractor version, so repeated protocol runs only pay for training.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from srqa import stats
from srqa.features import EXTRACTOR_VERSION, FEATURE_DIM, extract_features
from srqa.imgcore import load_image
from srqa.regress.model import predict_quality_many, train_two_stage

MANIFEST_FIELDS = ["image_path", "ref_id", "method", "s", "sigma", "score"]

PROTOCOLS = ("5fold", "leave-image-out", "leave-method-out")


class ManifestError(ValueError):
    """Malformed manifest content; messages carry 1-based row numbers."""


@dataclass(frozen=True)
class ManifestEntry:
    image_path: str
    ref_id: str
    method: str
    s: int
    sigma: float
    score: float


@dataclass
class EvaluationReport:
    protocol: str
    repetitions: int
    n_entries: int
    overall_rho: float
    rmse: float
    per_method: dict = field(default_factory=dict)
    predictions: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "repetitions": self.repetitions,
            "n_entries": self.n_entries,
            "overall_rho": self.overall_rho,
            "rmse": self.rmse,
            "per_method": dict(sorted(self.per_method.items())),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["group", "spearman_rho"])
        for method, rho in sorted(self.per_method.items()):
            writer.writerow([method, repr(rho)])
        writer.writerow(["overall", repr(self.overall_rho)])
        writer.writerow(["rmse", repr(self.rmse)])
        return buf.getvalue()

    def table(self) -> str:
        width = max([len("overall")] + [len(m) for m in self.per_method])
        lines = [f"protocol: {self.protocol}   repetitions: {self.repetitions}   "
                 f"entries: {self.n_entries}"]
        for method, rho in sorted(self.per_method.items()):
            lines.append(f"  {method:<{width}}  rho={rho:+.4f}")
        lines.append(f"  {'overall':<{width}}  rho={self.overall_rho:+.4f}")
        lines.append(f"  {'RMSE':<{width}}  {self.rmse:.4f}")
        return "\n".join(lines)


def load_manifest(path) -> list[ManifestEntry]:
    """Read and validate a manifest CSV.

    Checks header, field parsing, score range, scale range, key uniqueness
    and image file existence; errors name the offending row.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ManifestError(f"{path}: empty manifest") from None
        if [h.strip() for h in header] != MANIFEST_FIELDS:
            raise ManifestError(
                f"{path}: bad header {header!r}, expected {','.join(MANIFEST_FIELDS)}"
            )
        entries = []
        seen = {}
        missing = []
        for row_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(MANIFEST_FIELDS):
                raise ManifestError(f"{path}: row {row_no}: expected "
                                    f"{len(MANIFEST_FIELDS)} fields, got {len(row)}")
            image_path, ref_id, method, s_str, sigma_str, score_str = (
                c.strip() for c in row
            )
            try:
                s = int(s_str)
                sigma = float(sigma_str)
                score = float(score_str)
            except ValueError as exc:
                raise ManifestError(f"{path}: row {row_no}: {exc}") from None
            if not (0.0 <= score <= 10.0):
                raise ManifestError(
                    f"{path}: row {row_no}: score {score} outside [0, 10]"
                )
            if s < 2:
                raise ManifestError(f"{path}: row {row_no}: scale {s} < 2")
            key = (ref_id, method, s)
            if key in seen:
                raise ManifestError(
                    f"{path}: row {row_no}: duplicate (ref_id, method, s) "
                    f"{key} first seen at row {seen[key]}"
                )
            seen[key] = row_no
            resolved = Path(image_path)
            if not resolved.is_absolute():
                resolved = path.parent / resolved
            if not resolved.is_file():
                missing.append((row_no, str(resolved)))
            entries.append(
                ManifestEntry(
                    image_path=str(resolved), ref_id=ref_id, method=method,
                    s=s, sigma=sigma, score=score,
                )
            )
        if missing:
            listing = "; ".join(f"row {r}: {p}" for r, p in missing[:5])
            more = "" if len(missing) <= 5 else f" (+{len(missing) - 5} more)"
            raise ManifestError(f"{path}: missing image files: {listing}{more}")
    return entries


def _check_split_inputs(n: int, k: int) -> None:
    if k < 2:
        raise ValueError(f"need at least 2 folds, got {k}")
    if k > n:
        raise ValueError(f"cannot make {k} folds from {n} entries")


def kfold_split(entries, k: int = 5, seed: int = 0) -> list:
    """Random near-equal partition; each entry tests exactly once."""
    n = len(entries)
    _check_split_inputs(n, k)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5F01D]))
    perm = rng.permutation(n)
    folds = np.array_split(perm, k)
    out = []
    for i in range(k):
        test = np.sort(folds[i])
        train = np.sort(np.concatenate([folds[j] for j in range(k) if j != i]))
        out.append((train, test))
    return out


def _group_split(entries, labels, holdout: int, seed: int, what: str) -> list:
    distinct = sorted(set(labels))
    if holdout < 1:
        raise ValueError(f"holdout must be >= 1, got {holdout}")
    if holdout >= len(distinct):
        raise ValueError(
            f"holdout {holdout} must be smaller than the number of "
            f"distinct {what} ({len(distinct)})"
        )
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x6709]))
    order = [distinct[i] for i in rng.permutation(len(distinct))]
    groups = [order[i:i + holdout] for i in range(0, len(order), holdout)]
    labels = np.asarray(labels)
    out = []
    for group in groups:
        test_mask = np.isin(labels, group)
        out.append((np.nonzero(~test_mask)[0], np.nonzero(test_mask)[0]))
    return out


def leave_image_out_split(entries, holdout: int = 6, seed: int = 0) -> list:
    """Partition by reference image; test groups of ``holdout`` refs."""
    return _group_split(entries, [e.ref_id for e in entries], holdout, seed,
                        "reference images")


def leave_method_out_split(entries, holdout: int = 2, seed: int = 0) -> list:
    """Partition by SR method; the last group keeps any remainder."""
    return _group_split(entries, [e.method for e in entries], holdout, seed,
                        "methods")


def default_cache_dir() -> Path:
    env = os.environ.get("SRQA_CACHE_DIR")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "srqa"


def _features_for_entry(entry: ManifestEntry, cache_dir: Path) -> np.ndarray:
    blob = Path(entry.image_path).read_bytes()
    digest = hashlib.sha256(blob).hexdigest()
    cache_file = cache_dir / f"{digest}-v{EXTRACTOR_VERSION}.npy"
    if cache_file.is_file():
        vec = np.load(cache_file)
        if vec.shape == (FEATURE_DIM,):
            return vec
    vec = extract_features(load_image(entry.image_path))
    tmp = cache_file.with_name(f"{cache_file.name}.tmp{os.getpid()}")
    with open(tmp, "wb") as fh:
        np.save(fh, vec)
    os.replace(tmp, cache_file)
    return vec


def feature_matrix(entries, cache_dir=None, threads: int = 1) -> np.ndarray:
    """Extract (or load cached) features for every entry, shape (n, 138)."""
    cache_dir = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    cache_dir.mkdir(parents=True, exist_ok=True)

    def one(entry):
        try:
            return _features_for_entry(entry, cache_dir)
        except Exception as exc:
            raise RuntimeError(
                f"feature extraction failed for {entry.image_path} "
                f"(ref {entry.ref_id}, method {entry.method}, s={entry.s}): {exc}"
            ) from exc

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, entries))
    else:
        rows = [one(e) for e in entries]
    return np.vstack(rows)


def build_splits(entries, protocol: str, *, k: int = 5, holdout_refs: int = 6,
                 holdout_methods: int = 2, seed: int = 0) -> list:
    if protocol == "5fold":
        return kfold_split(entries, k=k, seed=seed)
    if protocol == "leave-image-out":
        return leave_image_out_split(entries, holdout=holdout_refs, seed=seed)
    if protocol == "leave-method-out":
        return leave_method_out_split(entries, holdout=holdout_methods, seed=seed)
    raise ValueError(f"unknown protocol {protocol!r}, expected one of {PROTOCOLS}")


def _default_train_fn(features, scores, seed, params):
    model = train_two_stage(features, scores, seed=seed, **params)
    return lambda F: predict_quality_many(model, F, raw=True)


def run_protocol(entries, protocol: str = "5fold", *, n_trees: int = 2000,
                 repetitions: int = 100, seed: int = 0, k: int = 5,
                 holdout_refs: int = 6, holdout_methods: int = 2,
                 min_leaf: int = 5, n_candidates: int | None = None,
                 subsample: float = 1.0, bootstrap: bool = True,
                 cache_dir=None, threads: int = 1,
                 train_fn=None) -> EvaluationReport:
    """Run a validation protocol and report rank correlation and error.

    Folds are fixed per invocation; repetitions resample only the forest
    randomness. The reported per-image prediction is the mean over
    repetitions; Spearman is computed on raw predictions and RMSE on
    predictions clamped to the score range.
    """
    entries = list(entries)
    feats = feature_matrix(entries, cache_dir=cache_dir, threads=threads)
    scores = np.asarray([e.score for e in entries], dtype=np.float64)
    splits = build_splits(
        entries, protocol, k=k, holdout_refs=holdout_refs,
        holdout_methods=holdout_methods, seed=seed,
    )
    if train_fn is None:
        params = dict(n_trees=n_trees, min_leaf=min_leaf,
                      n_candidates=n_candidates, subsample=subsample,
                      bootstrap=bootstrap)
        train_fn = lambda F, y, rep_seed: _default_train_fn(F, y, rep_seed, params)

    preds = np.zeros(len(entries))
    run_keys = np.random.SeedSequence([seed, 0x7E9]).generate_state(
        max(repetitions * len(splits), 1)
    )
    for rep in range(repetitions):
        for fold, (train_idx, test_idx) in enumerate(splits):
            rep_seed = int(run_keys[rep * len(splits) + fold])
            predict = train_fn(feats[train_idx], scores[train_idx], rep_seed)
            preds[test_idx] += predict(feats[test_idx])
    preds /= max(repetitions, 1)

    per_method = {}
    methods = sorted({e.method for e in entries})
    for method in methods:
        idx = [i for i, e in enumerate(entries) if e.method == method]
        try:
            per_method[method] = stats.spearman(preds[idx], scores[idx])
        except ValueError:
            per_method[method] = float("nan")
    overall = stats.spearman(preds, scores)
    err = stats.rmse(np.clip(preds, 0.0, 10.0), scores)
    return EvaluationReport(
        protocol=protocol,
        repetitions=repetitions,
        n_entries=len(entries),
        overall_rho=overall,
        rmse=err,
        per_method=per_method,
        predictions=preds,
    )
