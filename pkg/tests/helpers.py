"""Shared independent oracles for the test suite.

These deliberately avoid the code paths they check: rank via Gaussian
elimination rather than the SVD, multiset eigenvalue matching via greedy
assignment.
"""

import numpy as np


def elimination_rank(a, rtol=1e-9):
    """Rank by Gaussian elimination with partial pivoting."""
    m = np.array(a, dtype=np.float64)
    rows, cols = m.shape
    scale = np.max(np.abs(m)) or 1.0
    rank = 0
    row = 0
    for col in range(cols):
        if row >= rows:
            break
        pivot = row + int(np.argmax(np.abs(m[row:, col])))
        if abs(m[pivot, col]) <= rtol * scale:
            continue
        m[[row, pivot]] = m[[pivot, row]]
        m[row] = m[row] / m[row, col]
        for r in range(rows):
            if r != row:
                m[r] -= m[r, col] * m[row]
        rank += 1
        row += 1
    return rank


def multiset_eig_distance(got, expected):
    """Greedy closest-pair matching distance between two eigenvalue multisets."""
    got = list(np.asarray(got, dtype=complex))
    expected = list(np.asarray(expected, dtype=complex))
    assert len(got) == len(expected)
    worst = 0.0
    remaining = expected[:]
    for g in got:
        dists = [abs(g - e) for e in remaining]
        k = int(np.argmin(dists))
        worst = max(worst, dists[k])
        remaining.pop(k)
    return worst
