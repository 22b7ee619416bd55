"""Discrete Legendre transform of sampled one-dimensional functions.

``conj(s) = max_i (s * x_i - y_i)``.  The fast path keeps only the lower
convex hull of the samples (monotone chain) and then walks the hull and the
sorted slopes together, which is linear after sorting.
"""

from __future__ import annotations

import numpy as np


def lower_hull(xs, ys) -> np.ndarray:
    """Indices of the lower convex hull of points sorted by strictly increasing x."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size and np.any(np.diff(xs) <= 0):
        raise ValueError("x must be strictly increasing")
    hull: list[int] = []
    for i in range(xs.size):
        while len(hull) >= 2:
            j, k = hull[-2], hull[-1]
            # drop k unless the turn j -> k -> i is strictly convex
            cross = (xs[k] - xs[j]) * (ys[i] - ys[j]) - (ys[k] - ys[j]) * (xs[i] - xs[j])
            if cross <= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return np.array(hull, dtype=int)


def dlt(xs, ys, slopes) -> np.ndarray:
    """Conjugate values at `slopes` (any order) via hull walking."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    s = np.asarray(slopes, dtype=float)
    if xs.size == 0:
        return np.full(s.shape, -np.inf)
    h = lower_hull(xs, ys)
    hx, hy = xs[h], ys[h]
    order = np.argsort(s, kind="stable")
    out = np.empty(s.size)
    k = 0
    for idx in order:
        si = s[idx]
        # the maximizer index is nondecreasing in the slope
        while k + 1 < hx.size and si * hx[k + 1] - hy[k + 1] >= si * hx[k] - hy[k]:
            k += 1
        out[idx] = si * hx[k] - hy[k]
    return out


def dlt_brute(xs, ys, slopes) -> np.ndarray:
    """O(n m) reference: evaluate every sample for every slope."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    s = np.asarray(slopes, dtype=float)
    if xs.size == 0:
        return np.full(s.shape, -np.inf)
    return np.max(s[:, None] * xs[None, :] - ys[None, :], axis=1)


def hull_pieces(xs, ys) -> tuple[np.ndarray, np.ndarray]:
    """Affine pieces (slopes, intercepts) of the lower hull between consecutive vertices."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    h = lower_hull(xs, ys)
    if h.size == 1:
        return np.zeros(1), ys[h]
    hx, hy = xs[h], ys[h]
    sl = np.diff(hy) / np.diff(hx)
    return sl, hy[:-1] - sl * hx[:-1]


def envelope_values(xs, ys, at) -> np.ndarray:
    """Lower convex envelope of the samples evaluated at `at` (``+inf`` outside the range)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    at = np.asarray(at, dtype=float)
    h = lower_hull(xs, ys)
    out = np.interp(at, xs[h], ys[h])
    out[(at < xs[0]) | (at > xs[-1])] = np.inf
    return out
