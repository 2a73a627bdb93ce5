"""Pure-Python round kernel.

Mirrors ``_core.pyx`` operation for operation (same summation order, no
fused multiply-add), so both backends produce identical floats.
"""

import numpy as np


def hdd_round(hist, indptr, indices, agents, eps, powers):
    hist = np.asarray(hist, dtype=np.float64)
    horizon = hist.shape[1]
    means = np.zeros(len(indices))
    nxt = np.empty(len(agents))
    for a, i in enumerate(agents):
        lo, hi = indptr[i], indptr[i + 1]
        nbrs = indices[lo:hi]
        inside = np.abs(hist[nbrs] - hist[i]) <= eps[i]
        acc = np.zeros(hi - lo)
        for k in range(horizon):
            acc += np.where(inside[:, k], powers[i, k], 0.0)
        mu = acc / horizon
        means[lo:hi] = mu

        norm = 0.0
        for m in mu.tolist():
            norm += m
        norm += 1.0
        x = 0.0
        for m, j in zip(mu.tolist(), nbrs.tolist()):
            x += (m / norm) * hist[j, horizon - 1]
        x += (1.0 / norm) * hist[i, horizon - 1]
        nxt[a] = x
    return means, nxt
