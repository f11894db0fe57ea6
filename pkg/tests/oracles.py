"""Independent reference implementations used only to check the library.

Everything here is deliberately naive: full boundary matrix reduction with
no optimizations, triple-loop patch vectorization, classical Gram-Schmidt,
two-pass covariance. These stay independent of the code paths they verify.
"""

import math
from itertools import combinations

import numpy as np


def brute_force_barcodes(d: np.ndarray, scale_max: float):
    """Textbook persistence: materialize the whole filtration up to dim 2,
    order simplices by (diameter, dimension, lexicographic vertex tuple),
    reduce the full boundary matrix over Z/2, and read pairs off the lows.

    Returns (h0, h1): h0 as a sorted list of (birth, death) with death inf
    for the essential class; h1 as a sorted list of (birth, death, open).
    Zero-persistence pairs are dropped.
    """
    m = d.shape[0]
    simplices = [(0.0, 0, (i,)) for i in range(m)]
    for i, j in combinations(range(m), 2):
        if d[i, j] <= scale_max:
            simplices.append((float(d[i, j]), 1, (i, j)))
    for i, j, k in combinations(range(m), 3):
        diam = max(d[i, j], d[i, k], d[j, k])
        if diam <= scale_max:
            simplices.append((float(diam), 2, (i, j, k)))
    simplices.sort(key=lambda s: (s[0], s[1], s[2]))
    index = {s[2]: n for n, s in enumerate(simplices)}

    cols = []
    for _, dim, verts in simplices:
        if dim == 0:
            cols.append(set())
        else:
            cols.append({index[f] for f in combinations(verts, dim)})

    lowinv = {}
    pairs = []
    for jx in range(len(cols)):
        col = cols[jx]
        while col:
            low = max(col)
            other = lowinv.get(low)
            if other is None:
                lowinv[low] = jx
                pairs.append((low, jx))
                break
            col = col ^ cols[other]
        cols[jx] = col

    paired = set()
    h0, h1 = [], []
    for low, jx in pairs:
        paired.add(low)
        paired.add(jx)
        birth_d, birth_dim, _ = simplices[low]
        death_d, _, _ = simplices[jx]
        if death_d > birth_d:
            if birth_dim == 0:
                h0.append((birth_d, death_d))
            elif birth_dim == 1:
                h1.append((birth_d, death_d, False))
    for n, (diam, dim, _) in enumerate(simplices):
        if n not in paired and not cols[n]:
            if dim == 0:
                h0.append((diam, math.inf))
            elif dim == 1 and scale_max > diam:
                h1.append((diam, scale_max, True))
    return sorted(h0), sorted(h1)


def gram_schmidt(x: np.ndarray) -> np.ndarray:
    """Classical Gram-Schmidt orthonormalization of the columns of x."""
    x = np.asarray(x, dtype=np.longdouble)
    q = np.zeros_like(x)
    for j in range(x.shape[1]):
        v = x[:, j].copy()
        for i in range(j):
            v -= (q[:, i] @ x[:, j]) * q[:, i]
        q[:, j] = v / np.sqrt(v @ v)
    return q.astype(np.float64)


def vectorize_patch_oracle(values, frame, row_start, row_end, col_start, col_end, bands):
    """Triple-loop patch vectorization straight from the index arithmetic."""
    patch_cols = col_end - col_start + 1
    n = (row_end - row_start + 1) * patch_cols
    out = np.zeros((n, len(bands)))
    for r in range(row_start, row_end + 1):
        for c in range(col_start, col_end + 1):
            for j, b in enumerate(bands):
                out[(r - row_start) * patch_cols + (c - col_start), j] = values[
                    frame, r, c, b
                ]
    return out


def window_count_oracle(col_start, col_end, window_cols, stride):
    """Count window placements by explicit enumeration."""
    count = 0
    c = col_start
    while c + window_cols - 1 <= col_end:
        count += 1
        c += stride
    return count


def two_pass_covariance(pixels: np.ndarray) -> np.ndarray:
    """Divisor m-1 sample covariance via the classic two-pass formula."""
    m, b = pixels.shape
    mean = pixels.mean(axis=0)
    cov = np.zeros((b, b))
    for row in pixels:
        dev = row - mean
        cov += np.outer(dev, dev)
    return cov / (m - 1)


def random_distance_matrix(rng: np.random.Generator, m: int, ties: bool = False) -> np.ndarray:
    """Random symmetric nonnegative matrix with zero diagonal; with ties=True
    the entries come from a small integer set, stressing tie-breaking."""
    if ties:
        x = rng.integers(1, 4, (m, m)).astype(float)
    else:
        x = rng.random((m, m)) + 0.05
    d = np.minimum(x, x.T)
    np.fill_diagonal(d, 0.0)
    return d
