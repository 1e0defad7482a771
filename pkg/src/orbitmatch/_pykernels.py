"""Pure numpy implementations of the hot kernels.

These define the reference semantics. The compiled module ``_ckernels``
mirrors every function here and must agree bit-for-bit; the test-suite
checks both backends against each other.

Digit streams are stored as ``blocks``: uint64 integers in ``[0, base**K)``
each holding K base-``base`` digits, most significant first. The state at
time ``i`` keeps the ``D <= K`` digits following position ``i``.
"""
from __future__ import annotations

import numpy as np

ONE_MINUS_ULP = 1.0 - 2.0 ** -53


def _powers(base, K):
    return np.array([base ** j for j in range(K + 1)], dtype=np.uint64)


def decode_windows(blocks, base, K, D, n):
    """Decode states ``0..n-1`` of a digit stream to doubles in [0, 1)."""
    blocks = np.asarray(blocks, dtype=np.uint64)
    if len(blocks) < (n - 1) // K + 2:
        raise ValueError("not enough digit blocks for the requested length")
    P = _powers(base, K)
    out = np.empty(n, dtype=np.float64)
    scale = float(base ** D)
    cut = P[K - D]
    for s in range(min(K, n)):
        k = np.arange(s, n, K) // K
        hi = blocks[k] % P[K - s] * P[s]
        lo = blocks[k + 1] // P[K - s]
        w = hi + lo
        if D < K:
            w = w // cut
        out[s::K] = w.astype(np.float64) / scale
    np.minimum(out, ONE_MINUS_ULP, out=out)
    return out


def circle_distance(a, b):
    t = np.abs(a - b)
    return np.minimum(t, 1.0 - t)


def torus_distance(a, b):
    """Chebyshev combination of circle distances; arrays of shape (n,) or (n, d)."""
    t = circle_distance(a, b)
    if t.ndim > 1:
        t = t.max(axis=-1)
    return t


def min_curve(dist, checkpoints):
    """Prefix minima at checkpoints, strict records and first exact zero.

    Returns ``(prefix_min, record_times, record_dists, zero_hit)`` where
    ``zero_hit`` is -1 when no distance is exactly zero.
    """
    dist = np.asarray(dist, dtype=np.float64)
    checkpoints = np.asarray(checkpoints, dtype=np.int64)
    run = np.minimum.accumulate(dist)
    prefix = run[checkpoints - 1]
    prev = np.concatenate(([np.inf], run[:-1]))
    rec = np.flatnonzero(dist < prev)
    zeros = np.flatnonzero(dist == 0.0)
    zero_hit = int(zeros[0]) if len(zeros) else -1
    return prefix, rec.astype(np.int64), dist[rec], zero_hit


def stream_min_curve(blocks_a, base_a, K_a, D_a, blocks_b, base_b, K_b, D_b,
                     n, checkpoints):
    xa = decode_windows(blocks_a, base_a, K_a, D_a, n)
    xb = decode_windows(blocks_b, base_b, K_b, D_b, n)
    return min_curve(torus_distance(xa, xb), checkpoints)


def stream_count_below(blocks_a, base_a, K_a, D_a, blocks_b, base_b, K_b, D_b,
                       n, r):
    xa = decode_windows(blocks_a, base_a, K_a, D_a, n)
    xb = decode_windows(blocks_b, base_b, K_b, D_b, n)
    return int(np.count_nonzero(torus_distance(xa, xb) < r))


# Pair counting.  Positions live in [0, 1); float rounding of u +- r moves a
# boundary by a few ulps at most, so anything farther than MARGIN from the
# boundary is classified by position alone and only the sliver in between
# is checked with the exact metric.
MARGIN = 1e-9
_CHUNK = 1 << 20


def _exact_hits(U, V, iu, iv, r):
    if len(iu) == 0:
        return 0
    return int(np.count_nonzero(torus_distance(U[iu], V[iv]) < r))


def _expand(lo, hi):
    """Pairs (row, col) for every col in [lo[row], hi[row])."""
    lens = np.maximum(hi - lo, 0)
    total = int(lens.sum())
    if total == 0:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    rows = np.repeat(np.arange(len(lo)), lens)
    starts = np.repeat(lo - np.concatenate(([0], np.cumsum(lens)[:-1])), lens)
    cols = np.arange(total) + starts
    return rows, cols


def brute_count(U, V, r):
    """Double loop over all pairs, chunked over U."""
    U = np.asarray(U, dtype=np.float64)
    V = np.asarray(V, dtype=np.float64)
    step = max(1, _CHUNK // max(1, len(V)))
    total = 0
    for s in range(0, len(U), step):
        a = U[s:s + step]
        d = circle_distance(a[:, None, ...], V[None, ...])
        if d.ndim > 2:
            d = d.max(axis=-1)
        total += int(np.count_nonzero(d < r))
    return total


def count_pairs_1d(U, V, r):
    """Number of pairs with circle distance < r via a sorted sweep."""
    U = np.asarray(U, dtype=np.float64)
    V = np.sort(np.asarray(V, dtype=np.float64))
    M, N = len(U), len(V)
    if M == 0 or N == 0 or r <= 0.0:
        return 0
    if r > 0.5:
        return M * N
    if 2.0 * (r + MARGIN) >= 1.0:
        return brute_count(U, V, r)
    ext = np.concatenate((V - 1.0, V, V + 1.0))
    lo_out = np.searchsorted(ext, U - r - MARGIN, "left")
    lo_in = np.searchsorted(ext, U - r + MARGIN, "right")
    hi_in = np.searchsorted(ext, U + r - MARGIN, "left")
    hi_out = np.searchsorted(ext, U + r + MARGIN, "right")
    inner = hi_in > lo_in
    total = int(np.sum(np.where(inner, hi_in - lo_in, 0)))
    # when the certain core is empty the whole outer window is uncertain
    a_hi = np.where(inner, lo_in, hi_out)
    b_lo = np.where(inner, hi_in, hi_out)
    for lo, hi in ((lo_out, a_hi), (b_lo, hi_out)):
        rows, cols = _expand(lo, hi)
        total += _exact_hits(U, V, rows, cols % N, r)
    return total


def grid_cells(r, d):
    """Cells per axis: width at least r + MARGIN, key space within int64."""
    nb = int(np.floor(1.0 / (r + MARGIN)))
    return min(nb, int(2.0 ** (62.0 / d)))


def _cell_ids(X, nb):
    c = np.floor(X * nb).astype(np.int64)
    return np.clip(c, 0, nb - 1)


def count_pairs_grid(U, V, r):
    """Cell-list count for points of shape (n, d); cell width >= r."""
    U = np.asarray(U, dtype=np.float64)
    V = np.asarray(V, dtype=np.float64)
    M, N = len(U), len(V)
    if M == 0 or N == 0 or r <= 0.0:
        return 0
    if r > 0.5:
        return M * N
    d = U.shape[1]
    nb = grid_cells(r, d)
    if nb < 3:
        return brute_count(U, V, r)
    cu = _cell_ids(U, nb)
    cv = _cell_ids(V, nb)
    mult = nb ** np.arange(d, dtype=np.int64)
    keys_v = cv @ mult
    order = np.argsort(keys_v, kind="stable")
    sorted_keys = keys_v[order]
    offsets = np.array(np.meshgrid(*([[-1, 0, 1]] * d), indexing="ij"))
    offsets = offsets.reshape(d, -1).T
    total = 0
    step = 1024
    for s in range(0, M, step):
        cu_s = cu[s:s + step]
        for off in offsets:
            keys_u = ((cu_s + off) % nb) @ mult
            lo = np.searchsorted(sorted_keys, keys_u, "left")
            hi = np.searchsorted(sorted_keys, keys_u, "right")
            rows, cols = _expand(lo, hi)
            total += _exact_hits(U, V, rows + s, order[cols], r)
    return total
