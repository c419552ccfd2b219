"""Pure numpy versions of the routines in ``_core``; same signatures and results."""

import numpy as np


def _axis_slices(n, c, per):
    """Source and destination slices along one axis for shift ``c``.

    Returns a list of ``(src, dst)`` slice pairs so that ``dst`` indices are
    ``src + c`` (wrapped when periodic).
    """
    if per:
        m = c % n
        if m == 0:
            return [(slice(0, n), slice(0, n))]
        return [(slice(0, n - m), slice(m, n)), (slice(n - m, n), slice(0, m))]
    if abs(c) >= n:
        return []
    if c >= 0:
        return [(slice(0, n - c), slice(c, n))]
    return [(slice(-c, n), slice(0, n + c))]


def pair_counts(ua, la, ub, rb, shifts, periodic):
    ua = np.asarray(ua)
    shape = ua.shape
    out = np.zeros(len(shifts), dtype=np.int64)
    for k, c in enumerate(np.asarray(shifts)):
        per_axis = [_axis_slices(shape[a], int(c[a]), bool(periodic[a])) for a in range(3)]
        if any(not p for p in per_axis):
            continue
        acc = 0
        for s0, d0 in per_axis[0]:
            for s1, d1 in per_axis[1]:
                for s2, d2 in per_axis[2]:
                    src = (s0, s1, s2)
                    dst = (d0, d1, d2)
                    acc += int(np.count_nonzero(la[src] & rb[dst] & (ua[src] ^ ub[dst])))
        out[k] = acc
    return out


def _orbit_rep(idx, step, shape):
    """Smallest flat index on the periodic orbit of each multi-index in ``idx``."""
    n = np.asarray(shape)
    length = 1
    for a in range(3):
        if step[a] != 0:
            length = np.lcm(length, n[a] // np.gcd(abs(int(step[a])), n[a]))
    best = np.ravel_multi_index(idx.T, shape)
    cur = idx.copy()
    for _ in range(int(length) - 1):
        cur = (cur + step) % n
        best = np.minimum(best, np.ravel_multi_index(cur.T, shape))
    return best


def nonconstant_lines(u, shifts, periodic, band, limits):
    u = np.asarray(u)
    shape = np.asarray(u.shape)
    flat = u.reshape(-1)
    band = np.asarray(band, dtype=np.int64).reshape(-1, 3)
    per = np.asarray(periodic, dtype=bool)
    out = np.zeros(len(shifts), dtype=np.int64)
    for k, s in enumerate(np.asarray(shifts, dtype=np.int64)):
        if not s.any():
            continue
        idx = band[: limits[k]]
        j = idx + s
        ok = np.ones(len(idx), dtype=bool)
        for a in range(3):
            if per[a]:
                j[:, a] %= shape[a]
            else:
                ok &= (j[:, a] >= 0) & (j[:, a] < shape[a])
        i_ok = idx[ok]
        j_ok = j[ok]
        jump = flat[np.ravel_multi_index(i_ok.T, u.shape)] != flat[np.ravel_multi_index(j_ok.T, u.shape)]
        src = i_ok[jump]
        if src.size == 0:
            continue
        restricted = [a for a in range(3) if s[a] != 0 and not per[a]]
        if restricted:
            steps = []
            for a in restricted:
                if s[a] > 0:
                    steps.append(src[:, a] // s[a])
                else:
                    steps.append((shape[a] - 1 - src[:, a]) // (-s[a]))
            t = np.min(np.stack(steps), axis=0)
            start = src - t[:, None] * s
            start[:, per] %= shape[per]
            reps = np.ravel_multi_index(start.T, u.shape)
        else:
            reps = _orbit_rep(src, s, u.shape)
        out[k] = np.unique(reps).size
    return out
