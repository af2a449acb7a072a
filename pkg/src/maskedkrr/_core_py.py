"""Numpy implementation of the hot similarity/statistics loops.

Twin of the compiled module ``_core_cy``; ``maskedkrr._backend`` picks
whichever is importable. Reductions keep a fixed order (row order for
moments, per-pair dot products for similarity sums) so results are
deterministic for a given build.
"""

import numpy as np


def masked_dot_norms(xl, ml, xr, mr):
    """Pairwise sums over the common observed support of two masked blocks.

    ``xl`` (L x M) and ``xr`` (R x M) are zero-padded values, ``ml``/``mr``
    the matching masks. Returns (S, NL2, NR2) with

        S[i, j]   = sum_t xl[i,t] * xr[j,t]      (zero padding kills
                                                  off-support products)
        NL2[i, j] = sum_t xl[i,t]^2 * mr[j,t]    (left norm^2 on support)
        NR2[i, j] = sum_t ml[i,t] * xr[j,t]^2    (right norm^2 on support)
    """
    xl = np.asarray(xl, dtype=np.float64)
    xr = np.asarray(xr, dtype=np.float64)
    mlf = np.asarray(ml, dtype=np.float64)
    mrf = np.asarray(mr, dtype=np.float64)
    s = xl @ xr.T
    nl2 = (xl * xl) @ mrf.T
    nr2 = mlf @ (xr * xr).T
    return s, nl2, nr2


def masked_column_moments(x, p):
    """Streaming per-column (mean, M2, count) over observed entries.

    Rows are consumed top to bottom; columns update only where ``p`` marks
    the entry observed.
    """
    x = np.asarray(x, dtype=np.float64)
    pb = np.asarray(p, dtype=bool)
    n, m = x.shape
    mean = np.zeros(m)
    m2 = np.zeros(m)
    count = np.zeros(m, dtype=np.int64)
    for i in range(n):
        obs = pb[i]
        count[obs] += 1
        delta = np.where(obs, x[i] - mean, 0.0)
        mean += delta / np.maximum(count, 1)
        delta2 = np.where(obs, x[i] - mean, 0.0)
        m2 += delta * delta2
    return mean, m2, count


def welford_stream(x):
    """Final (mean, M2, count) of the streaming update applied along ``x``.

    Vectorized with prefix sums; the prefix means are the same left-to-right
    accumulation the scalar recurrence walks through.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    if n == 0:
        return 0.0, 0.0, 0
    cs = np.cumsum(x)
    k = np.arange(1, n + 1, dtype=np.float64)
    means = cs / k
    prev = np.empty(n)
    prev[0] = 0.0
    prev[1:] = means[:-1]
    m2 = float(np.sum((x - prev) * (x - means)))
    return float(means[-1]), m2, n
