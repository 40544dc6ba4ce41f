"""Statistical estimators shared by the feature extractors and the harness."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.special import gammaln
from scipy.stats import rankdata

GAMMA_LO = 0.1
GAMMA_HI = 10.0
_BISECT_ITERS = 40  # interval 9.9 / 2^40 ~ 9e-12, far below the 1e-4 tolerance


@dataclass(frozen=True)
class GgdParams:
    """Fitted generalized Gaussian: location mu, shape gamma, scale beta."""

    mu: float
    gamma: float
    beta: float
    degenerate: bool = False


def moment_ratio(gamma):
    """r(γ) = Γ(1/γ)Γ(3/γ)/Γ(2/γ)², strictly decreasing on [0.1, 10]."""
    g = np.asarray(gamma, dtype=np.float64)
    return np.exp(gammaln(1.0 / g) + gammaln(3.0 / g) - 2.0 * gammaln(2.0 / g))


def shape_from_moments(m1, m2):
    """GGD shape from absolute/second central moments (vectorized).

    Solves r(γ) = m2/m1² by bisection on [0.1, 10]; values outside the
    attainable ratio range clamp to the interval ends.
    """
    m1 = np.asarray(m1, dtype=np.float64)
    m2 = np.asarray(m2, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = m2 / (m1 * m1)
    lo = np.full(rho.shape, GAMMA_LO)
    hi = np.full(rho.shape, GAMMA_HI)
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        go_right = moment_ratio(mid) > rho
        lo = np.where(go_right, mid, lo)
        hi = np.where(go_right, hi, mid)
    return 0.5 * (lo + hi)


def fit_ggd(samples) -> GgdParams:
    """Moment-matching GGD fit (location = sample mean).

    Degenerate (numerically zero-variance) input returns the clamp value
    gamma=10 with the ``degenerate`` flag set instead of raising.
    """
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size < 30:
        raise ValueError(f"need at least 30 samples, got {x.size}")
    mu = float(x.mean())
    d = x - mu
    m2 = float(np.mean(d * d))
    if np.sqrt(m2) < 1e-12 * max(1.0, abs(mu)):
        return GgdParams(mu=mu, gamma=GAMMA_HI, beta=0.0, degenerate=True)
    m1 = float(np.mean(np.abs(d)))
    gamma = float(shape_from_moments(m1, m2))
    beta = float(np.exp(0.5 * (np.log(m2) + gammaln(1.0 / gamma) - gammaln(3.0 / gamma))))
    return GgdParams(mu=mu, gamma=gamma, beta=beta)


def gaussian_window(size: int = 15, sigma: float = 1.5) -> np.ndarray:
    """Normalized 2-D Gaussian weighting window."""
    radius = size // 2
    d = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-(d * d) / (2.0 * sigma * sigma))
    g /= g.sum()
    return np.outer(g, g)


def _local_mean(a: np.ndarray, g: np.ndarray) -> np.ndarray:
    out = ndimage.correlate1d(a, g, axis=0, mode="reflect")
    return ndimage.correlate1d(out, g, axis=1, mode="reflect")


def structural_correlation(a, b, size: int = 15, sigma: float = 1.5,
                           c0_scale: float = 1e-4) -> float:
    """Mean stabilized windowed cross-covariance ratio between two bands.

    ρ(x) = (2σ_xy + c0) / (σ_x² + σ_y² + c0) with Gaussian-weighted local
    moments; c0 = c0_scale × (joint dynamic range)², floored to avoid 0/0
    on constant inputs.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if min(a.shape) < size:
        raise ValueError(f"band {a.shape} smaller than {size}x{size} window")
    radius = size // 2
    d = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-(d * d) / (2.0 * sigma * sigma))
    g /= g.sum()
    mu_a = _local_mean(a, g)
    mu_b = _local_mean(b, g)
    var_a = _local_mean(a * a, g) - mu_a * mu_a
    var_b = _local_mean(b * b, g) - mu_b * mu_b
    cov = _local_mean(a * b, g) - mu_a * mu_b
    dyn = max(a.max(), b.max()) - min(a.min(), b.min())
    c0 = max(c0_scale * dyn * dyn, 1e-12)
    rho = (2.0 * cov + c0) / (var_a + var_b + c0)
    return float(rho.mean())


def spearman(x, y) -> float:
    """Spearman rank correlation (average ranks for ties)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    if x.size < 2:
        raise ValueError("need at least 2 observations")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise ValueError("constant input: rank correlation undefined")
    rx = rankdata(x, method="average")
    ry = rankdata(y, method="average")
    rx -= rx.mean()
    ry -= ry.mean()
    return float(np.dot(rx, ry) / np.sqrt(np.dot(rx, rx) * np.dot(ry, ry)))


def rmse(pred, truth) -> float:
    """Root-mean-square error."""
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(truth, dtype=np.float64)
    if p.shape != t.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {t.shape}")
    if p.size < 1:
        raise ValueError("need at least 1 observation")
    d = p - t
    return float(np.sqrt(np.mean(d * d)))


def aggregate_perceptual(scores) -> float:
    """Trimmed mean of rater scores: drop the lowest and highest 10%
    (count rounded to nearest), average the rest.

    For 50 raters this is exactly the mean of the median 40 scores.
    """
    s = np.sort(np.asarray(scores, dtype=np.float64))
    n = s.size
    if n < 10:
        raise ValueError(f"need at least 10 scores, got {n}")
    k = int(np.floor(0.1 * n + 0.5))
    return float(s[k:n - k].mean())


def kurtosis(samples) -> float:
    """Non-excess kurtosis m4/m2² (3 for a Gaussian)."""
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size < 4:
        raise ValueError(f"need at least 4 samples, got {x.size}")
    d = x - x.mean()
    m2 = np.mean(d * d)
    if m2 <= 0.0:
        raise ValueError("zero variance")
    return float(np.mean(d ** 4) / (m2 * m2))
