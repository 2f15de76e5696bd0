"""Independent reference implementations used as test oracles.

These deliberately avoid numpy vectorisation and the package's own helpers.
"""

from fractions import Fraction

import mpmath

mpmath.mp.dps = 50


def mp_log_likelihood(n_correct, n_wrong, eps=0.1, k=10):
    e = mpmath.mpf(eps)
    return n_correct * mpmath.log(1 - e) + n_wrong * mpmath.log(e / (k - 1))


def direct_bma_weights(counts, eps=0.1, k=10):
    """Posterior from raw products of per-cell probabilities, no logs."""
    e = mpmath.mpf(eps)
    like = [(1 - e) ** c * (e / (k - 1)) ** w for c, w in counts]
    total = sum(like)
    return [float(x / total) for x in like]


def exact_simplicity(lengths, floor):
    lo, hi = min(lengths), max(lengths)
    if lo == hi:
        return [Fraction(1)] * len(lengths)
    out = []
    for L in lengths:
        s = 1 - Fraction(L - lo, hi - lo)
        out.append(min(max(s, Fraction(floor)), Fraction(1)))
    return out


def tally_matrix(pred_rows, weights, num_colors=10):
    """P[r][c][v] by summing indicator weights one hypothesis at a time."""
    R, C = len(pred_rows[0]), len(pred_rows[0][0])
    P = [[[0.0] * num_colors for _ in range(C)] for _ in range(R)]
    for r in range(R):
        for c in range(C):
            for v in range(num_colors):
                acc = 0.0
                for h, rows in enumerate(pred_rows):
                    if rows[r][c] == v:
                        acc += weights[h]
                P[r][c][v] = acc
    return P
