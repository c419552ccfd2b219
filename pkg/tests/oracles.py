"""Independent reference computations used as test oracles.

Plain loops over sites and displacements, sharing no code with the package.
"""

import itertools
import math

import numpy as np


def brute_pair_count(u, xi, periodic):
    """#{i in window : i + xi in window (or wrapped) and u_i != u_{i+xi}} for a 1-offset field."""
    u = np.asarray(u)
    n = u.shape
    count = 0
    for i in itertools.product(*(range(m) for m in n)):
        j = []
        ok = True
        for a in range(len(n)):
            t = i[a] + xi[a]
            if periodic[a]:
                t %= n[a]
            elif not 0 <= t < n[a]:
                ok = False
                break
            j.append(t)
        if ok and u[i] != u[tuple(j)]:
            count += 1
    return count


def brute_pair_count_offsets(values, offsets, xi_cell, p, q, periodic):
    """Pairs (cell i, offset p) -> (cell i + xi_cell, offset q) with differing values."""
    v = np.asarray(values)
    n = v.shape[:-1]
    count = 0
    for i in itertools.product(*(range(m) for m in n)):
        j = []
        ok = True
        for a in range(len(n)):
            t = i[a] + xi_cell[a]
            if periodic[a]:
                t %= n[a]
            elif not 0 <= t < n[a]:
                ok = False
                break
            j.append(t)
        if ok and v[i + (p,)] != v[tuple(j) + (q,)]:
            count += 1
    return count


def ball_shifts(dim, R):
    """Integer xi != 0 with |xi| < R."""
    m = math.ceil(R)
    out = []
    for xi in itertools.product(range(-m, m + 1), repeat=dim):
        if any(xi) and sum(x * x for x in xi) < R * R:
            out.append(xi)
    return out


def brute_ball_energy(u, eps, eta, periodic):
    """Energy for the unit-ball kernel on Z^d by enumerating every ordered pair."""
    u = np.asarray(u)
    d = u.ndim
    R = eta / eps
    total = 0
    for xi in ball_shifts(d, R):
        total += brute_pair_count(u, xi, periodic)
    return eps ** (2 * d) / eta ** (d + 1) * total


def halfspace_1d_closed_form(R):
    """h^2 M (M + 1) with M the largest integer < R and h = 1/R."""
    M = math.ceil(R) - 1
    return M * (M + 1) / R ** 2


def line_values(u, base, xi, periodic):
    """Values along the maximal line base + k xi inside the window (restricted axes only)."""
    u = np.asarray(u)
    n = u.shape
    pts = [tuple(base)]
    for sign in (1, -1):
        cur = list(base)
        while True:
            cur = [c + sign * x for c, x in zip(cur, xi)]
            if any(not 0 <= c < m for c, m in zip(cur, n)):
                break
            if sign > 0:
                pts.append(tuple(cur))
            else:
                pts.insert(0, tuple(cur))
    return [int(u[p]) for p in pts]


def brute_nonconstant_lines(u, xi, periodic):
    """Number of maximal lines along xi on which u is not constant."""
    u = np.asarray(u)
    n = u.shape
    seen = set()
    count = 0
    for i in itertools.product(*(range(m) for m in n)):
        if i in seen:
            continue
        line = [i]
        seen.add(i)
        for sign in (1, -1):
            cur = i
            while True:
                nxt = []
                ok = True
                for a in range(len(n)):
                    t = cur[a] + sign * xi[a]
                    if periodic[a]:
                        t %= n[a]
                    elif not 0 <= t < n[a]:
                        ok = False
                        break
                    nxt.append(t)
                if not ok:
                    break
                cur = tuple(nxt)
                if cur in seen:
                    break
                seen.add(cur)
                line.append(cur)
        if len({int(u[p]) for p in line}) > 1:
            count += 1
    return count


def polar_first_moment_2d():
    """int_{B_1} |xi| dxi = int_0^1 r * 2 pi r dr."""
    return 2 * math.pi / 3


def exp_phi_1d(rate, cutoff):
    """int_{-c}^{c} e^{-rate |x|} |x| dx in closed form."""
    if rate == 0:
        return cutoff ** 2
    r, c = rate, cutoff
    return 2 * (1 / r ** 2 - math.exp(-r * c) * (c / r + 1 / r ** 2))


def ball_3d_phi_by_slices():
    """pi/2 from slicing the unit ball orthogonally to e_1: 2 int_0^1 x pi (1 - x^2) dx."""
    xs = np.linspace(0, 1, 200001)
    ys = xs * math.pi * (1 - xs ** 2)
    return 2 * float(np.sum((ys[1:] + ys[:-1]) / 2 * np.diff(xs)))


def rectangle_pair_count(n1, n2, xi):
    """N_xi for the indicator of an n1 x n2 block of ones inside a large zero window."""
    a, b = abs(xi[0]), abs(xi[1])
    inter = max(n1 - a, 0) * max(n2 - b, 0)
    return 2 * (n1 * n2 - inter)
