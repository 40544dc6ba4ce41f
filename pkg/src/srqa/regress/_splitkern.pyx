# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of _split_np.best_split.

Keep the arithmetic in lockstep with the NumPy fallback: sequential
cumulative sums, identical expression order, strict-greater selection.
Compiled with -ffp-contract=off so no FMA contraction changes results.
"""

from libc.math cimport INFINITY, log


def best_split(const double[::1] xs, const double[::1] ys,
               Py_ssize_t min_leaf, double var_floor):
    """Best variance-reduction split; see _split_np.best_split."""
    cdef Py_ssize_t n = xs.shape[0]
    if n < 2 * min_leaf:
        return -INFINITY, 0.0

    cdef double s1 = 0.0, s2 = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        s1 += ys[i]
        s2 += ys[i] * ys[i]

    cdef double mean = s1 / n
    cdef double var_t = s2 / n - mean * mean
    cdef double base = n * log(var_t if var_t > var_floor else var_floor)

    cdef double c1 = 0.0, c2 = 0.0
    cdef double best_gain = -INFINITY, best_thr = 0.0
    cdef double nl, nr, ml, mr, var_l, var_r, gain, a, b, thr
    cdef Py_ssize_t nli

    for i in range(n - 1):
        c1 += ys[i]
        c2 += ys[i] * ys[i]
        nli = i + 1
        if nli < min_leaf or (n - nli) < min_leaf:
            continue
        if xs[i + 1] <= xs[i]:
            continue
        nl = <double> nli
        nr = <double> (n - nli)
        ml = c1 / nl
        mr = (s1 - c1) / nr
        var_l = c2 / nl - ml * ml
        var_r = (s2 - c2) / nr - mr * mr
        gain = (base
                - nl * log(var_l if var_l > var_floor else var_floor)
                - nr * log(var_r if var_r > var_floor else var_floor))
        if gain > best_gain:
            best_gain = gain
            a = xs[i]
            b = xs[i + 1]
            thr = 0.5 * (a + b)
            if thr >= b:
                thr = a
            best_thr = thr

    if best_gain == -INFINITY:
        return -INFINITY, 0.0
    return best_gain, best_thr
