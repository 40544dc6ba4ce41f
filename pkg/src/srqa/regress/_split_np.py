"""NumPy fallback for the best-split scan.

Must stay numerically identical to the compiled twin in _splitkern.pyx:
sequential cumulative sums, the same expression order for variances and
gains, strict-greater selection (first index wins ties).
"""

import numpy as np

NO_SPLIT = (-np.inf, 0.0)


def best_split(xs, ys, min_leaf, var_floor):
    """Best variance-reduction split of samples sorted by feature value.

    ``xs`` must be sorted ascending with ``ys`` aligned. Returns
    (gain, threshold); gain is -inf when no valid split exists. The gain is
    n*log(var) - n_L*log(var_L) - n_R*log(var_R) with variances floored.
    """
    n = xs.shape[0]
    if n < 2 * min_leaf:
        return NO_SPLIT

    c1 = np.cumsum(ys)
    c2 = np.cumsum(ys * ys)
    s1 = c1[-1]
    s2 = c2[-1]

    nl = np.arange(1, n, dtype=np.float64)
    nr = np.arange(n - 1, 0, -1, dtype=np.float64)
    ml = c1[:-1] / nl
    mr = (s1 - c1[:-1]) / nr
    var_l = c2[:-1] / nl - ml * ml
    var_r = (s2 - c2[:-1]) / nr - mr * mr

    mean = s1 / n
    var_t = s2 / n - mean * mean
    gains = (
        n * np.log(max(var_t, var_floor))
        - nl * np.log(np.maximum(var_l, var_floor))
        - nr * np.log(np.maximum(var_r, var_floor))
    )

    i = np.arange(1, n)
    valid = (i >= min_leaf) & (n - i >= min_leaf) & (xs[1:] > xs[:-1])
    if not valid.any():
        return NO_SPLIT
    gains = np.where(valid, gains, -np.inf)
    best = int(np.argmax(gains))
    gain = float(gains[best])
    if gain == -np.inf:
        return NO_SPLIT

    a = xs[best]
    b = xs[best + 1]
    thr = 0.5 * (a + b)
    if thr >= b:  # midpoint rounded up onto the right value
        thr = a
    return gain, float(thr)
