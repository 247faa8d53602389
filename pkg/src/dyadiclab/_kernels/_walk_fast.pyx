# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled walk kernels.

Same stream layout and floating-point operation order as the numpy backend
in _walk_ref; one path at a time, tosses consumed block-wise from counter
addressed splitmix64 words, positions tracked as integers.
"""

import numpy as np

from libc.math cimport sqrt

cdef extern from *:
    """
    #if defined(_MSC_VER)
    #  include <intrin.h>
    #  define DL_POPCOUNT64(x) ((int)__popcnt64(x))
    #else
    #  define DL_POPCOUNT64(x) __builtin_popcountll(x)
    #endif
    """
    int DL_POPCOUNT64(unsigned long long) nogil

ctypedef unsigned long long u64
ctypedef long long i64

cdef u64 GOLDEN = <u64>0x9E3779B97F4A7C15
cdef u64 MIX1 = <u64>0xBF58476D1CE4E5B9
cdef u64 MIX2 = <u64>0x94D049BB133111EB


cdef inline u64 mix64(u64 z) nogil:
    z = (z ^ (z >> 30)) * MIX1
    z = (z ^ (z >> 27)) * MIX2
    return z ^ (z >> 31)


cdef inline u64 path_key(u64 seed, u64 gid) nogil:
    return mix64(mix64(seed + GOLDEN) ^ mix64((gid + 1) * GOLDEN))


cdef inline u64 word_at(u64 key, u64 ctr) nogil:
    return mix64(key + (ctr + 1) * GOLDEN)


cdef inline u64 chunk_mask(int bits) nogil:
    if bits >= 64:
        return <u64>0xFFFFFFFFFFFFFFFF
    return (<u64>1 << bits) - 1


def linear_ensemble(double f00, double gx, double gy, int N, double T,
                    Py_ssize_t num_paths, object seed, object start):
    """Constant-gradient martingale pair; see _walk_ref.linear_ensemble."""
    if N < 2 or N > 64:
        raise ValueError("resolution N must lie in [2, 64]")
    if T <= 0:
        raise ValueError("horizon T must be positive")
    cdef i64 nn = N
    cdef i64 fine_total = nn * nn * nn * nn * nn
    cdef i64 blocks = nn * nn * nn * nn
    cdef double delta = T / <double>fine_total
    cdef double step = sqrt(2.0 * delta)
    cdef int wpb = (N + 63) // 64
    cdef double eps = 1.0 / N
    cdef double threshold = (1.0 - eps) * (1.0 - eps) / (2.0 * delta)

    mf_arr = np.empty(num_paths, dtype=np.float64)
    mga_arr = np.zeros(num_paths, dtype=np.float64)
    mgb_arr = np.zeros(num_paths, dtype=np.float64)
    stop_arr = np.full(num_paths, -1, dtype=np.int64)
    cdef double[:] mf = mf_arr
    cdef double[:] mga = mga_arr
    cdef double[:] mgb = mgb_arr
    cdef i64[:] stop = stop_arr

    cdef u64 seed_u = seed
    cdef u64 start_u = start
    cdef double vx = -gy
    cdef double vy = gx

    cdef Py_ssize_t path
    cdef u64 key, mem, m, u, v, mask
    cdef i64 n, ix, iy, dix, diy
    cdef int c, bits, cnt_h, plus_h, plus_v
    cdef double dbx, dby, acc_mf, acc_mga, acc_mgb

    with nogil:
        for path in range(num_paths):
            key = path_key(seed_u, start_u + <u64>path)
            mem = word_at(key, 0) & 1
            ix = 0
            iy = 0
            acc_mf = f00
            acc_mga = 0.0
            acc_mgb = 0.0
            for n in range(1, blocks + 1):
                dix = 0
                diy = 0
                m = mem
                for c in range(wpb):
                    bits = N - 64 * c
                    if bits > 64:
                        bits = 64
                    mask = chunk_mask(bits)
                    u = word_at(key, <u64>((n - 1) * wpb + 1 + c)) & mask
                    v = ((u << 1) | m) & mask
                    cnt_h = DL_POPCOUNT64(v)
                    plus_h = DL_POPCOUNT64(u & v)
                    plus_v = DL_POPCOUNT64(u & ~v & mask)
                    dix += 2 * plus_h - cnt_h
                    diy += 2 * plus_v - (bits - cnt_h)
                    m = (u >> (bits - 1)) & 1
                mem = m
                ix += dix
                iy += diy
                dbx = dix * step
                dby = diy * step
                acc_mf += gx * dbx + gy * dby
                acc_mga += vx * dbx + vy * dby
                acc_mgb += gx * dby + gy * (-dbx)
                if <double>(ix * ix + iy * iy) >= threshold:
                    stop[path] = n
                    break
            mf[path] = acc_mf
            mga[path] = acc_mga
            mgb[path] = acc_mgb
    return mf_arr, mga_arr, mgb_arr, stop_arr


def general_ensemble(double f00, double[:] deriv_re, double[:] deriv_im,
                     int N, double T, Py_ssize_t num_paths, object seed,
                     object start):
    """General band-limited martingale pair; see _walk_ref.general_ensemble."""
    if N < 2 or N > 64:
        raise ValueError("resolution N must lie in [2, 64]")
    if T <= 0:
        raise ValueError("horizon T must be positive")
    cdef i64 nn = N
    cdef i64 fine_total = nn * nn * nn * nn * nn
    cdef i64 blocks = nn * nn * nn * nn
    cdef double delta = T / <double>fine_total
    cdef double step = sqrt(2.0 * delta)
    cdef int wpb = (N + 63) // 64
    cdef double eps = 1.0 / N
    cdef double threshold = (1.0 - eps) * (1.0 - eps) / (2.0 * delta)

    cdef int degree = deriv_re.shape[0]
    zero = np.zeros(1, dtype=np.float64)
    if degree == 0:
        deriv_re = zero
        deriv_im = zero
        degree = 1

    mf_arr = np.empty(num_paths, dtype=np.float64)
    mga_arr = np.zeros(num_paths, dtype=np.float64)
    mgb_arr = np.zeros(num_paths, dtype=np.float64)
    stop_arr = np.full(num_paths, -1, dtype=np.int64)
    cdef double[:] mf = mf_arr
    cdef double[:] mga = mga_arr
    cdef double[:] mgb = mgb_arr
    cdef i64[:] stop = stop_arr

    cdef u64 seed_u = seed
    cdef u64 start_u = start

    cdef Py_ssize_t path
    cdef u64 key, mem, m, u
    cdef i64 n, ix, iy, e
    cdef int c, bits, i, mdx
    cdef double zx, zy, wr, wi, tmp, gx, gy, db
    cdef double acc_mf, acc_mga, acc_mgb

    with nogil:
        for path in range(num_paths):
            key = path_key(seed_u, start_u + <u64>path)
            mem = word_at(key, 0) & 1
            ix = 0
            iy = 0
            acc_mf = f00
            acc_mga = 0.0
            acc_mgb = 0.0
            for n in range(1, blocks + 1):
                m = mem
                for c in range(wpb):
                    bits = N - 64 * c
                    if bits > 64:
                        bits = 64
                    u = word_at(key, <u64>((n - 1) * wpb + 1 + c))
                    for i in range(bits):
                        zx = ix * step
                        zy = iy * step
                        wr = deriv_re[degree - 1]
                        wi = deriv_im[degree - 1]
                        for mdx in range(degree - 2, -1, -1):
                            tmp = wr * zx - wi * zy + deriv_re[mdx]
                            wi = wr * zy + wi * zx + deriv_im[mdx]
                            wr = tmp
                        gx = wr
                        gy = -wi
                        e = 2 * <i64>((u >> i) & 1) - 1
                        db = e * step
                        if m & 1:
                            acc_mf += gx * db
                            acc_mga += (-gy) * db
                            acc_mgb += gy * (-db)
                            ix += e
                        else:
                            acc_mf += gy * db
                            acc_mga += gx * db
                            acc_mgb += gx * db
                            iy += e
                        m = (u >> i) & 1
                mem = m
                if <double>(ix * ix + iy * iy) >= threshold:
                    stop[path] = n
                    break
            mf[path] = acc_mf
            mga[path] = acc_mga
            mgb[path] = acc_mgb
    return mf_arr, mga_arr, mgb_arr, stop_arr
