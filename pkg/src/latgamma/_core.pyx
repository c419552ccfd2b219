# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled lattice pair-count kernels.

All arrays are C-contiguous 3-d uint8 (lower-dimensional fields are padded
with leading axes of length 1). ``periodic`` is a length-3 int array.
"""

import numpy as np
from libc.stdint cimport int32_t, int64_t, uint8_t


cdef inline void _axis(Py_ssize_t n, int64_t c, int per,
                       Py_ssize_t *lo, Py_ssize_t *hi, Py_ssize_t *cm) noexcept nogil:
    if per:
        cm[0] = ((c % n) + n) % n
        lo[0] = 0
        hi[0] = n
    else:
        cm[0] = c
        lo[0] = 0 if c >= 0 else -c
        hi[0] = n - c if c >= 0 else n
        if hi[0] < lo[0]:
            hi[0] = lo[0]


cdef int64_t _count_shift(const uint8_t[:, :, ::1] ua, const uint8_t[:, :, ::1] la,
                          const uint8_t[:, :, ::1] ub, const uint8_t[:, :, ::1] rb,
                          int64_t c0, int64_t c1, int64_t c2,
                          int p0, int p1, int p2) noexcept nogil:
    cdef Py_ssize_t n0 = ua.shape[0], n1 = ua.shape[1], n2 = ua.shape[2]
    cdef Py_ssize_t lo0, hi0, m0, lo1, hi1, m1, lo2, hi2, m2
    cdef Py_ssize_t i0, i1, i2, j0, j1, split
    cdef const uint8_t *pa
    cdef const uint8_t *pl
    cdef const uint8_t *pb
    cdef const uint8_t *pr
    cdef int64_t acc = 0
    _axis(n0, c0, p0, &lo0, &hi0, &m0)
    _axis(n1, c1, p1, &lo1, &hi1, &m1)
    _axis(n2, c2, p2, &lo2, &hi2, &m2)
    if p2:
        split = n2 - m2
    else:
        split = hi2
    for i0 in range(lo0, hi0):
        j0 = i0 + m0
        if j0 >= n0:
            j0 -= n0
        for i1 in range(lo1, hi1):
            j1 = i1 + m1
            if j1 >= n1:
                j1 -= n1
            pa = &ua[i0, i1, 0]
            pl = &la[i0, i1, 0]
            pb = &ub[j0, j1, 0]
            pr = &rb[j0, j1, 0]
            for i2 in range(lo2, split):
                acc += pl[i2] & pr[i2 + m2] & (pa[i2] ^ pb[i2 + m2])
            for i2 in range(split, hi2):
                acc += pl[i2] & pr[i2 + m2 - n2] & (pa[i2] ^ pb[i2 + m2 - n2])
    return acc


def pair_counts(const uint8_t[:, :, ::1] ua, const uint8_t[:, :, ::1] la,
                const uint8_t[:, :, ::1] ub, const uint8_t[:, :, ::1] rb,
                const int64_t[:, ::1] shifts, periodic):
    """``N[s] = sum_i la[i] rb[i+s] |ua[i] - ub[i+s]|`` for each shift row ``s``."""
    cdef Py_ssize_t S = shifts.shape[0], s
    cdef int p0 = int(periodic[0]), p1 = int(periodic[1]), p2 = int(periodic[2])
    out = np.zeros(S, dtype=np.int64)
    cdef int64_t[::1] res = out
    with nogil:
        for s in range(S):
            res[s] = _count_shift(ua, la, ub, rb, shifts[s, 0], shifts[s, 1], shifts[s, 2], p0, p1, p2)
    return out


def nonconstant_lines(const uint8_t[:, :, ::1] u, const int64_t[:, ::1] shifts, periodic,
                      const int32_t[:, ::1] band, const int64_t[::1] limits):
    """Number of maximal discrete lines ``i + k s`` in the window on which ``u`` changes.

    ``band`` holds site coordinates; for shift ``s`` only the first
    ``limits[s]`` rows are probed. The caller guarantees that every jump
    ``u[i] != u[i+s]`` has ``i`` among them.
    """
    cdef Py_ssize_t n0 = u.shape[0], n1 = u.shape[1], n2 = u.shape[2]
    cdef Py_ssize_t S = shifts.shape[0]
    cdef int per[3]
    per[0] = int(periodic[0]); per[1] = int(periodic[1]); per[2] = int(periodic[2])
    out = np.zeros(S, dtype=np.int64)
    cdef int64_t[::1] res = out
    mark_arr = np.zeros(n0 * n1 * n2, dtype=np.int32)
    cdef int32_t[::1] mark = mark_arr
    cdef const uint8_t *flat = &u[0, 0, 0]
    cdef Py_ssize_t s, b, a, B
    cdef int32_t stamp
    cdef int64_t n[3]
    cdef int64_t sv[3]
    cdef int64_t i[3]
    cdef int64_t j[3]
    cdef int64_t st[3]
    cdef int64_t f, g, t, ta, cnt
    cdef int cyc, ok
    n[0] = n0; n[1] = n1; n[2] = n2
    with nogil:
        for s in range(S):
            sv[0] = shifts[s, 0]; sv[1] = shifts[s, 1]; sv[2] = shifts[s, 2]
            if sv[0] == 0 and sv[1] == 0 and sv[2] == 0:
                continue
            cyc = 1
            for a in range(3):
                if per[a]:
                    sv[a] = ((sv[a] % n[a]) + n[a]) % n[a]
                elif sv[a] != 0:
                    cyc = 0
            stamp = <int32_t>(s + 1)
            cnt = 0
            B = limits[s]
            for b in range(B):
                ok = 1
                for a in range(3):
                    i[a] = band[b, a]
                    j[a] = i[a] + sv[a]
                    if per[a]:
                        if j[a] >= n[a]:
                            j[a] -= n[a]
                    elif j[a] < 0 or j[a] >= n[a]:
                        ok = 0
                if not ok:
                    continue
                f = (i[0] * n1 + i[1]) * n2 + i[2]
                g = (j[0] * n1 + j[1]) * n2 + j[2]
                if flat[f] == flat[g]:
                    continue
                if not cyc:
                    t = -1
                    for a in range(3):
                        if sv[a] != 0 and not per[a]:
                            if sv[a] > 0:
                                ta = i[a] // sv[a]
                            else:
                                ta = (n[a] - 1 - i[a]) // (-sv[a])
                            if t < 0 or ta < t:
                                t = ta
                    for a in range(3):
                        st[a] = i[a] - t * sv[a]
                        if per[a]:
                            st[a] = ((st[a] % n[a]) + n[a]) % n[a]
                    g = (st[0] * n1 + st[1]) * n2 + st[2]
                    if mark[g] != stamp:
                        mark[g] = stamp
                        cnt += 1
                else:
                    if mark[f] == stamp:
                        continue
                    cnt += 1
                    st[0] = i[0]; st[1] = i[1]; st[2] = i[2]
                    while True:
                        g = (st[0] * n1 + st[1]) * n2 + st[2]
                        mark[g] = stamp
                        for a in range(3):
                            st[a] += sv[a]
                            if st[a] >= n[a]:
                                st[a] -= n[a]
                        if st[0] == i[0] and st[1] == i[1] and st[2] == i[2]:
                            break
            res[s] = cnt
    return out
