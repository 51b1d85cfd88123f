"""Pure-numpy EM expectation pass; fallback when the Cython kernel is absent.

The corpus is laid out flat: per sentence pair, a row-major block of shape
(n_source + 1) x n_target whose entries index into the translation-table
support (row 0 of each block is the NULL source position). ``dflat`` holds
the matching diagonal-prior weights.
"""

import numpy as np


def em_pass(theta, kflat, dflat, offsets, rows, cols, counts):
    """One expectation pass: accumulate posterior counts, return log-likelihood.

    ``counts`` is accumulated in place and must be zeroed by the caller.
    """
    loglik = 0.0
    posterior = np.empty_like(dflat)
    for p in range(len(rows)):
        off = offsets[p]
        size = rows[p] * cols[p]
        block = slice(off, off + size)
        k = kflat[block].reshape(rows[p], cols[p])
        scores = theta[k] * dflat[block].reshape(rows[p], cols[p])
        z = scores.sum(axis=0)
        loglik += float(np.log(z).sum())
        posterior[block] = (scores / z).ravel()
    counts += np.bincount(kflat, weights=posterior, minlength=len(counts))
    return loglik
