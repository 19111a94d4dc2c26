# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled run loops. Mirrors ``_pykernels`` exactly, including float order."""

from libc.math cimport sqrt
from libc.stdlib cimport llabs

cdef int STOP_NONE = 0
cdef int STOP_TARGET = 1
cdef int STOP_SWAP_STABLE = 2


cdef inline double _cov(long long[:, ::1] counts, int t, long long pair_count,
                        const double[::1] cvec, bint uniform, double c) noexcept nogil:
    cdef double cov
    cdef Py_ssize_t i
    cdef long long x
    if uniform:
        return 2.0 * c * <double>pair_count
    cov = 0.0
    for i in range(cvec.shape[0]):
        x = counts[t, i]
        cov += 2.0 * cvec[i] * <double>(x * (x - 1) // 2)
    return cov


cdef inline double _fitness(long long[:, ::1] counts, long long[::1] tp, const double[::1] cvec,
                            bint uniform, double c, double a, double d, double q,
                            int* argmax) noexcept nogil:
    cdef double cov0 = _cov(counts, 0, tp[2], cvec, uniform, c)
    cdef double cov1 = _cov(counts, 1, tp[3], cvec, uniform, c)
    cdef double s0 = <double>tp[0] * a + sqrt(q * (<double>tp[0] * d + cov0))
    cdef double s1 = <double>tp[1] * a + sqrt(q * (<double>tp[1] * d + cov1))
    if s1 > s0:
        argmax[0] = 1
        return s1
    argmax[0] = 0
    return s0


cdef inline void _flip(unsigned char[::1] bits, const int[::1] group, long long[:, ::1] counts,
                       long long[::1] tp, Py_ssize_t j) noexcept nogil:
    cdef int g = group[j]
    cdef int src = bits[j]
    cdef int dst = 1 - src
    tp[2 + src] -= counts[src, g] - 1
    counts[src, g] -= 1
    tp[2 + dst] += counts[dst, g]
    counts[dst, g] += 1
    tp[src] -= 1
    tp[dst] += 1
    bits[j] = <unsigned char>dst


cdef bint _swap_stable(long long[:, ::1] counts, long long[::1] tp, long long k, long long n,
                       int t, double c) noexcept nogil:
    cdef long long gap, p_t
    cdef Py_ssize_t i, j
    if llabs(tp[0] - tp[1]) > 1:
        return False
    if c == 0.0:
        return True
    p_t = tp[2 + t]
    if 8 * k * p_t <= n * n - 2 * n * k + k * k:
        return True
    gap = llabs(tp[2] - tp[3])
    for i in range(k):
        for j in range(k):
            if counts[t, i] > counts[t, j] + 1 and counts[1 - t, i] - counts[1 - t, j] + 1 < gap:
                return False
    return True


def stop_code(long long[:, ::1] counts, long long[::1] tp, const double[::1] cvec, bint uniform,
              double c, double a, double d, double q, long long k, long long n,
              double target, bint use_target, bint use_swap_stable):
    cdef int t
    cdef double f = _fitness(counts, tp, cvec, uniform, c, a, d, q, &t)
    if use_target and f <= target:
        return STOP_TARGET
    if use_swap_stable and _swap_stable(counts, tp, k, n, t, c):
        return STOP_SWAP_STABLE
    return STOP_NONE


def rls_chunk(unsigned char[::1] bits, const int[::1] group, long long[:, ::1] counts,
              long long[::1] tp, const double[::1] cvec, bint uniform, double c,
              double a, double d, double q,
              double target, bint use_target, bint use_swap_stable,
              const long long[::1] coin, const long long[::1] first, const long long[::1] second,
              long long n_iter, long long iter_offset, double cur_f,
              long long[::1] traj_iter, double[::1] traj_val):
    cdef long long k = cvec.shape[0]
    cdef long long n = bits.shape[0]
    cdef long long it = 0, i, j
    cdef Py_ssize_t ntraj = 0
    cdef int stop = STOP_NONE
    cdef int t
    cdef double f
    with nogil:
        while it < n_iter:
            i = first[it]
            if coin[it] == 0 or n < 2:
                _flip(bits, group, counts, tp, i)
                j = -1
            else:
                j = second[it]
                if j >= i:
                    j += 1
                _flip(bits, group, counts, tp, i)
                _flip(bits, group, counts, tp, j)
            it += 1
            f = _fitness(counts, tp, cvec, uniform, c, a, d, q, &t)
            if f <= cur_f:
                if f < cur_f:
                    traj_iter[ntraj] = iter_offset + it
                    traj_val[ntraj] = f
                    ntraj += 1
                cur_f = f
                if use_target and f <= target:
                    stop = STOP_TARGET
                    break
                if use_swap_stable and _swap_stable(counts, tp, k, n, t, c):
                    stop = STOP_SWAP_STABLE
                    break
            else:
                if j >= 0:
                    _flip(bits, group, counts, tp, j)
                _flip(bits, group, counts, tp, i)
    return it, stop, cur_f, ntraj


def ea_chunk(unsigned char[::1] bits, const int[::1] group, long long[:, ::1] counts,
             long long[::1] tp, const double[::1] cvec, bint uniform, double c,
             double a, double d, double q,
             double target, bint use_target, bint use_swap_stable,
             const long long[::1] flip_pos, const long long[::1] offsets,
             long long n_iter, long long iter_offset, double cur_f,
             long long[::1] traj_iter, double[::1] traj_val):
    cdef long long k = cvec.shape[0]
    cdef long long n = bits.shape[0]
    cdef long long it = 0, lo, hi, p
    cdef Py_ssize_t ntraj = 0
    cdef int stop = STOP_NONE
    cdef int t
    cdef double f
    with nogil:
        while it < n_iter:
            lo = offsets[it]
            hi = offsets[it + 1]
            p = lo
            while p < hi:
                _flip(bits, group, counts, tp, flip_pos[p])
                p += 1
            it += 1
            if hi == lo:
                continue
            f = _fitness(counts, tp, cvec, uniform, c, a, d, q, &t)
            if f <= cur_f:
                if f < cur_f:
                    traj_iter[ntraj] = iter_offset + it
                    traj_val[ntraj] = f
                    ntraj += 1
                cur_f = f
                if use_target and f <= target:
                    stop = STOP_TARGET
                    break
                if use_swap_stable and _swap_stable(counts, tp, k, n, t, c):
                    stop = STOP_SWAP_STABLE
                    break
            else:
                p = hi - 1
                while p >= lo:
                    _flip(bits, group, counts, tp, flip_pos[p])
                    p -= 1
    return it, stop, cur_f, ntraj
