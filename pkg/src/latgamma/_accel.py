"""Select the compiled pair-count core, or the numpy fallback.

Set ``LATGAMMA_PURE=1`` to force the fallback even when the extension is built.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _fallback

try:
    if os.environ.get("LATGAMMA_PURE", "") not in ("", "0"):
        raise ImportError("fallback forced by LATGAMMA_PURE")
    from . import _core as _impl

    COMPILED = True
except ImportError:
    _impl = _fallback
    COMPILED = False

BACKEND = "cython" if COMPILED else "numpy"

_threads = None


def set_threads(n: int | None) -> None:
    """Worker count for shift-parallel loops; None means ``LATGAMMA_THREADS`` or all cores."""
    global _threads
    if n is not None and n < 1:
        raise ValueError("thread count must be positive")
    _threads = n


def get_threads() -> int:
    if _threads is not None:
        return _threads
    env = os.environ.get("LATGAMMA_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def as3d(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.uint8)
    return a.reshape((1,) * (3 - a.ndim) + a.shape)


def pad_shifts(shifts: np.ndarray) -> np.ndarray:
    s = np.asarray(shifts, dtype=np.int64).reshape(len(shifts), -1)
    return np.ascontiguousarray(np.pad(s, ((0, 0), (3 - s.shape[1], 0))))


def pad_periodic(periodic) -> np.ndarray:
    return np.asarray((True,) * (3 - len(periodic)) + tuple(periodic), dtype=np.int64)


def pair_counts(ua, la, ub, rb, shifts, periodic, impl=None) -> np.ndarray:
    """Direct counts for every shift; arrays are d-dimensional uint8, shifts ``(S, d)``."""
    mod = impl or _impl
    A, L, B, R = (as3d(x) for x in (ua, la, ub, rb))
    S = pad_shifts(shifts)
    P = pad_periodic(periodic)
    threads = get_threads()
    if threads == 1 or len(S) < 2 * threads:
        return mod.pair_counts(A, L, B, R, S, P)
    parts = np.array_split(S, threads)
    with ThreadPoolExecutor(threads) as pool:
        res = pool.map(lambda s: mod.pair_counts(A, L, B, R, np.ascontiguousarray(s), P), parts)
    return np.concatenate(list(res))


def nonconstant_lines(u, shifts, periodic, band, limits=None, impl=None) -> np.ndarray:
    """Non-constant line counts per shift.

    ``band`` is a ``(B, d)`` array of site coordinates; shift ``k`` probes
    ``band[:limits[k]]`` (all of it by default).
    """
    mod = impl or _impl
    U = as3d(u)
    S = pad_shifts(shifts)
    P = pad_periodic(periodic)
    band = np.asarray(band, dtype=np.int32)
    band = np.ascontiguousarray(np.pad(band, ((0, 0), (3 - band.shape[1], 0))))
    if limits is None:
        limits = np.full(len(S), len(band), dtype=np.int64)
    limits = np.ascontiguousarray(limits, dtype=np.int64)
    threads = get_threads()
    if threads == 1 or len(S) < 2 * threads:
        return mod.nonconstant_lines(U, S, P, band, limits)
    parts = np.array_split(np.arange(len(S)), threads)
    with ThreadPoolExecutor(threads) as pool:
        res = pool.map(
            lambda ix: mod.nonconstant_lines(U, np.ascontiguousarray(S[ix]), P, band, limits[ix]), parts
        )
    return np.concatenate(list(res))
