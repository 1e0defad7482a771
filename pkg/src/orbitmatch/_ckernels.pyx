# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_pykernels``.

Same signatures, same results bit-for-bit. The per-step arithmetic is
ordered exactly as in the numpy code so IEEE rounding agrees.
"""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t
from libc.stdlib cimport malloc, realloc, free
from libc.math cimport floor, fabs

cnp.import_array()

cdef double ONE_MINUS_ULP = 1.0 - 2.0 ** -53
cdef double MARGIN = 1e-9


cdef inline double circ(double a, double b) nogil:
    cdef double t = fabs(a - b)
    cdef double u = 1.0 - t
    return t if t < u else u


cdef class _Stream:
    cdef const uint64_t[::1] blocks
    cdef uint64_t P[64]
    cdef int base, K, D, pow2
    cdef uint64_t cut
    cdef double scale

    def __init__(self, blocks, int base, int K, int D, Py_ssize_t n):
        cdef int j
        self.blocks = np.ascontiguousarray(blocks, dtype=np.uint64)
        if self.blocks.shape[0] < (n - 1) // K + 2:
            raise ValueError("not enough digit blocks for the requested length")
        self.base = base
        self.K = K
        self.D = D
        self.pow2 = base == 2
        self.P[0] = 1
        for j in range(1, K + 1):
            self.P[j] = self.P[j - 1] * <uint64_t>base
        self.cut = self.P[K - D]
        self.scale = <double>(<object>base ** D)


cdef inline double _state(_Stream st, Py_ssize_t i) nogil:
    cdef Py_ssize_t k = i // st.K
    cdef int s = i - k * st.K
    cdef uint64_t w, hi, lo
    cdef double x
    if st.pow2:
        if s == 0:
            hi = st.blocks[k]
            lo = 0
        else:
            hi = (st.blocks[k] & (st.P[st.K - s] - 1)) << s
            lo = st.blocks[k + 1] >> (st.K - s)
    else:
        hi = (st.blocks[k] % st.P[st.K - s]) * st.P[s]
        lo = st.blocks[k + 1] // st.P[st.K - s]
    w = hi + lo
    if st.D < st.K:
        w = w // st.cut
    x = <double>w / st.scale
    if x > ONE_MINUS_ULP:
        x = ONE_MINUS_ULP
    return x


def decode_windows(blocks, int base, int K, int D, Py_ssize_t n):
    cdef _Stream st = _Stream(blocks, base, K, D, n)
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            o[i] = _state(st, i)
    return out


cdef tuple _pack(double[::1] prefix, int64_t *rt, double *rd, Py_ssize_t nrec,
                 Py_ssize_t zero_hit):
    rec_t = np.empty(nrec, dtype=np.int64)
    rec_d = np.empty(nrec, dtype=np.float64)
    cdef int64_t[::1] a = rec_t
    cdef double[::1] b = rec_d
    cdef Py_ssize_t j
    for j in range(nrec):
        a[j] = rt[j]
        b[j] = rd[j]
    return np.asarray(prefix), rec_t, rec_d, int(zero_hit)


cdef int _push(int64_t **rt, double **rd, Py_ssize_t *cap, Py_ssize_t nrec,
               int64_t t, double d) nogil:
    cdef int64_t *nt
    cdef double *nd
    if nrec == cap[0]:
        cap[0] *= 2
        nt = <int64_t *>realloc(rt[0], cap[0] * sizeof(int64_t))
        nd = <double *>realloc(rd[0], cap[0] * sizeof(double))
        if nt == NULL or nd == NULL:
            return -1
        rt[0] = nt
        rd[0] = nd
    rt[0][nrec] = t
    rd[0][nrec] = d
    return 0


def min_curve(dist, checkpoints):
    cdef const double[::1] dv = np.ascontiguousarray(dist, dtype=np.float64)
    cdef const int64_t[::1] cp = np.ascontiguousarray(checkpoints, dtype=np.int64)
    cdef Py_ssize_t n = dv.shape[0], nc = cp.shape[0]
    prefix_arr = np.empty(nc, dtype=np.float64)
    cdef double[::1] prefix = prefix_arr
    cdef Py_ssize_t cap = 64, nrec = 0, i, c = 0, zero_hit = -1
    cdef int64_t *rt = <int64_t *>malloc(cap * sizeof(int64_t))
    cdef double *rd = <double *>malloc(cap * sizeof(double))
    cdef double run = np.inf, d
    cdef int err = 0
    try:
        with nogil:
            for i in range(n):
                d = dv[i]
                if d < run:
                    run = d
                    if _push(&rt, &rd, &cap, nrec, i, d) < 0:
                        err = 1
                        break
                    nrec += 1
                if d == 0.0 and zero_hit < 0:
                    zero_hit = i
                while c < nc and cp[c] == i + 1:
                    prefix[c] = run
                    c += 1
        if err:
            raise MemoryError()
        return _pack(prefix, rt, rd, nrec, zero_hit)
    finally:
        free(rt)
        free(rd)


def stream_min_curve(blocks_a, int base_a, int K_a, int D_a,
                     blocks_b, int base_b, int K_b, int D_b,
                     Py_ssize_t n, checkpoints):
    cdef _Stream sa = _Stream(blocks_a, base_a, K_a, D_a, n)
    cdef _Stream sb = _Stream(blocks_b, base_b, K_b, D_b, n)
    cdef const int64_t[::1] cp = np.ascontiguousarray(checkpoints, dtype=np.int64)
    cdef Py_ssize_t nc = cp.shape[0]
    prefix_arr = np.empty(nc, dtype=np.float64)
    cdef double[::1] prefix = prefix_arr
    cdef Py_ssize_t cap = 64, nrec = 0, i, c = 0, zero_hit = -1
    cdef int64_t *rt = <int64_t *>malloc(cap * sizeof(int64_t))
    cdef double *rd = <double *>malloc(cap * sizeof(double))
    cdef double run = np.inf, d
    cdef int err = 0
    try:
        with nogil:
            for i in range(n):
                d = circ(_state(sa, i), _state(sb, i))
                if d < run:
                    run = d
                    if _push(&rt, &rd, &cap, nrec, i, d) < 0:
                        err = 1
                        break
                    nrec += 1
                if d == 0.0 and zero_hit < 0:
                    zero_hit = i
                while c < nc and cp[c] == i + 1:
                    prefix[c] = run
                    c += 1
        if err:
            raise MemoryError()
        return _pack(prefix, rt, rd, nrec, zero_hit)
    finally:
        free(rt)
        free(rd)


def stream_count_below(blocks_a, int base_a, int K_a, int D_a,
                       blocks_b, int base_b, int K_b, int D_b,
                       Py_ssize_t n, double r):
    cdef _Stream sa = _Stream(blocks_a, base_a, K_a, D_a, n)
    cdef _Stream sb = _Stream(blocks_b, base_b, K_b, D_b, n)
    cdef Py_ssize_t i, count = 0
    with nogil:
        for i in range(n):
            if circ(_state(sa, i), _state(sb, i)) < r:
                count += 1
    return int(count)


cdef inline double _cheb(const double[:, ::1] U, Py_ssize_t i,
                         const double[:, ::1] V, Py_ssize_t j, int d) nogil:
    cdef double m = 0.0, t
    cdef int k
    for k in range(d):
        t = circ(U[i, k], V[j, k])
        if t > m:
            m = t
    return m


cdef long long _brute2(const double[:, ::1] U, const double[:, ::1] V,
                       double r) nogil:
    cdef Py_ssize_t i, j
    cdef long long total = 0
    cdef int d = U.shape[1]
    for i in range(U.shape[0]):
        for j in range(V.shape[0]):
            if _cheb(U, i, V, j, d) < r:
                total += 1
    return total


def brute_count(U, V, double r):
    U = np.asarray(U, dtype=np.float64)
    V = np.asarray(V, dtype=np.float64)
    if U.ndim == 1:
        U = U[:, None]
        V = V[:, None]
    cdef const double[:, ::1] u = np.ascontiguousarray(U)
    cdef const double[:, ::1] v = np.ascontiguousarray(V)
    cdef long long total
    with nogil:
        total = _brute2(u, v, r)
    return int(total)


def count_pairs_1d(U, V, double r):
    cdef const double[::1] u = np.sort(np.asarray(U, dtype=np.float64))
    Vs = np.sort(np.asarray(V, dtype=np.float64))
    cdef Py_ssize_t M = u.shape[0], N = Vs.shape[0]
    if M == 0 or N == 0 or r <= 0.0:
        return 0
    if r > 0.5:
        return M * N
    if 2.0 * (r + MARGIN) >= 1.0:
        return brute_count(u, Vs, r)
    cdef const double[::1] v = Vs
    cdef const double[::1] ext = np.concatenate((Vs - 1.0, Vs, Vs + 1.0))
    cdef Py_ssize_t L = ext.shape[0]
    cdef Py_ssize_t i, j, lo_out = 0, lo_in = 0, hi_in = 0, hi_out = 0
    cdef Py_ssize_t a_hi, b_lo
    cdef long long total = 0
    cdef double x
    with nogil:
        for i in range(M):
            x = u[i]
            while lo_out < L and ext[lo_out] < x - r - MARGIN:
                lo_out += 1
            while lo_in < L and ext[lo_in] <= x - r + MARGIN:
                lo_in += 1
            while hi_in < L and ext[hi_in] < x + r - MARGIN:
                hi_in += 1
            while hi_out < L and ext[hi_out] <= x + r + MARGIN:
                hi_out += 1
            if hi_in > lo_in:
                total += hi_in - lo_in
                a_hi = lo_in
                b_lo = hi_in
            else:
                a_hi = hi_out
                b_lo = hi_out
            for j in range(lo_out, a_hi):
                if circ(x, v[j % N]) < r:
                    total += 1
            for j in range(b_lo, hi_out):
                if circ(x, v[j % N]) < r:
                    total += 1
    return int(total)


cdef Py_ssize_t _lower(const int64_t[::1] a, int64_t key) nogil:
    cdef Py_ssize_t lo = 0, hi = a.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if a[mid] < key:
            lo = mid + 1
        else:
            hi = mid
    return lo


def count_pairs_grid(U, V, double r):
    from ._pykernels import grid_cells, _cell_ids
    U = np.ascontiguousarray(U, dtype=np.float64)
    V = np.ascontiguousarray(V, dtype=np.float64)
    cdef Py_ssize_t M = U.shape[0], N = V.shape[0]
    if M == 0 or N == 0 or r <= 0.0:
        return 0
    if r > 0.5:
        return M * N
    cdef int d = U.shape[1]
    cdef int64_t nb = grid_cells(r, d)
    if nb < 3:
        return brute_count(U, V, r)
    cu_arr = _cell_ids(U, nb)
    mult_arr = nb ** np.arange(d, dtype=np.int64)
    keys_v = _cell_ids(V, nb) @ mult_arr
    order_arr = np.argsort(keys_v, kind="stable")
    cdef const int64_t[::1] sk = np.ascontiguousarray(keys_v[order_arr])
    cdef const int64_t[::1] order = np.ascontiguousarray(order_arr, dtype=np.int64)
    cdef const int64_t[:, ::1] cu = np.ascontiguousarray(cu_arr)
    cdef const int64_t[::1] mult = mult_arr
    cdef const double[:, ::1] u = U
    cdef const double[:, ::1] v = V
    cdef Py_ssize_t i, j, o, noff = 1
    cdef int k
    cdef int64_t key, c, rem
    cdef long long total = 0
    for k in range(d):
        noff *= 3
    with nogil:
        for i in range(M):
            for o in range(noff):
                key = 0
                rem = o
                for k in range(d):
                    c = cu[i, k] + (rem % 3) - 1
                    rem = rem // 3
                    c = (c + nb) % nb
                    key = key + c * mult[k]
                j = _lower(sk, key)
                while j < N and sk[j] == key:
                    if _cheb(u, i, v, order[j], d) < r:
                        total += 1
                    j += 1
    return int(total)
