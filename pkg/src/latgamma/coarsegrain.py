"""Majority-phase coarse graining on cubes of side ``eta / (4 eps)``."""

from __future__ import annotations

import enum
import json
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .energy import EnergyParams
from .field import SpinField

__all__ = [
    "Label",
    "CoarseGrainParams",
    "CoarseGrainResult",
    "majority_statistic",
    "classify",
    "k_sets",
    "boundary_measure",
]


class Label(enum.IntEnum):
    PHASE0 = 0
    PHASE1 = 1
    MIXED = 2


@dataclass(frozen=True)
class CoarseGrainParams:
    """Threshold ``delta`` in (0, 1) and the cube side in cells."""

    delta: float
    side: int
    rounding_error: float = 0.0
    energy: Optional[EnergyParams] = None

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie strictly between 0 and 1")
        if int(self.side) != self.side or self.side < 1:
            raise ValueError("cube side must be a positive integer")

    @classmethod
    def from_energy(cls, p: EnergyParams, delta: float) -> "CoarseGrainParams":
        exact = p.eta / (4 * p.eps)
        side = max(1, int(round(exact)))
        err = abs(side - exact) / exact
        if err > 0.25:
            warnings.warn(
                f"cube side rounded from {exact:.3g} to {side} sites ({err:.0%} change)", stacklevel=2
            )
        return cls(delta=delta, side=side, rounding_error=err, energy=p)


def _cube_range(origin: int, n: int, s: int) -> tuple[int, int]:
    """Coarse indices ``k`` whose cube ``s k - s//2 + [0, s)`` fits in ``[origin, origin + n)``."""
    h = s // 2
    kmin = -((-(origin + h)) // s)  # ceil
    kmax = (origin + n - s + h) // s
    return kmin, max(kmin - 1, kmax)


@dataclass(frozen=True, eq=False)
class CoarseGrainResult:
    k_origin: tuple
    labels: np.ndarray
    D: np.ndarray
    ones: np.ndarray
    sites_per_cube: int
    side: int
    cube_length: float
    delta: float
    periodic: tuple
    excluded_sites: int
    rounding_error: float
    mixed_measure: float
    mixed_boundary: float
    k1_perimeter: float
    adjacent_count: int

    @property
    def extents(self) -> tuple:
        return self.labels.shape

    @property
    def n_phase1(self) -> int:
        return int(np.count_nonzero(self.labels == Label.PHASE1))

    @property
    def n_phase0(self) -> int:
        return int(np.count_nonzero(self.labels == Label.PHASE0))

    @property
    def n_mixed(self) -> int:
        return int(np.count_nonzero(self.labels == Label.MIXED))

    def to_dict(self) -> dict:
        flat = self.labels.ravel()
        rle = []
        if flat.size:
            edges = np.flatnonzero(np.diff(flat)) + 1
            starts = np.concatenate([[0], edges])
            ends = np.concatenate([edges, [flat.size]])
            rle = [[int(flat[a]), int(b - a)] for a, b in zip(starts, ends)]
        hist, _ = np.histogram(self.D, bins=32, range=(0.0, 1.0))
        return {
            "extents": list(self.extents),
            "k_origin": list(self.k_origin),
            "labels_rle": rle,
            "label_codes": {lab.name: int(lab) for lab in Label},
            "D_histogram": {"bins": 32, "range": [0.0, 1.0], "counts": hist.tolist()},
            "delta": self.delta,
            "cube_side_sites": self.side,
            "cube_length": self.cube_length,
            "side_rounding_error": self.rounding_error,
            "excluded_sites": self.excluded_sites,
            "n_phase1": self.n_phase1,
            "n_phase0": self.n_phase0,
            "n_mixed": self.n_mixed,
            "adjacent_count": self.adjacent_count,
            "mixed_measure": self.mixed_measure,
            "mixed_boundary": self.mixed_boundary,
            "k1_perimeter": self.k1_perimeter,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _block_ones(f: SpinField, s: int):
    """Per-cube one-counts over the fully contained cubes, plus bookkeeping."""
    ranges = [_cube_range(o, n, s) for o, n in zip(f.origin, f.extents)]
    m = tuple(kmax - kmin + 1 for kmin, kmax in ranges)
    starts = [s * kmin - s // 2 - o for (kmin, _), o in zip(ranges, f.origin)]
    sl = tuple(slice(st, st + s * mk) for st, mk in zip(starts, m))
    block = f.values[sl + (slice(None),)].astype(np.int64)
    shape = []
    for mk in m:
        shape += [mk, s]
    block = block.reshape(tuple(shape) + (f.lattice.n_offsets,))
    sum_axes = tuple(range(1, 2 * f.dim, 2)) + (2 * f.dim,)
    ones = block.sum(axis=sum_axes) if min(m) > 0 else np.zeros(m, dtype=np.int64)
    per = s ** f.dim * f.lattice.n_offsets
    covered = int(np.prod(m)) * per
    coarse_periodic = tuple(
        p and mk * s == n for p, mk, n in zip(f.periodic, m, f.extents)
    )
    return tuple(k for k, _ in ranges), ones, per, f.n_sites - covered, coarse_periodic


def majority_statistic(f: SpinField, k, p: CoarseGrainParams) -> float:
    """``|#ones - #zeros| / #sites`` on the cube with absolute coarse index ``k``."""
    s = p.side
    k = tuple(int(x) for x in np.atleast_1d(k))
    sl = []
    for kk, o, n in zip(k, f.origin, f.extents):
        a = s * kk - s // 2 - o
        if a < 0 or a + s > n:
            raise ValueError(f"cube {k} is not fully inside the window")
        sl.append(slice(a, a + s))
    cube = f.values[tuple(sl)]
    ones = int(np.count_nonzero(cube))
    return abs(2 * ones - cube.size) / cube.size


def boundary_measure(grid, side: float, periodic=None, window_faces: bool = True) -> float:
    """``(exposed faces) * side^(d-1)`` for the union of the marked cubes.

    A face is exposed when the neighbouring cell is not in the set. Periodic
    axes wrap; on the other axes, faces on the grid boundary count only when
    ``window_faces`` is set (the outside is then treated as empty).
    """
    g = np.asarray(grid, dtype=bool)
    d = g.ndim
    if periodic is None:
        periodic = (False,) * d
    faces = 0
    for a in range(d):
        if periodic[a]:
            faces += int(np.count_nonzero(g != np.roll(g, 1, axis=a)))
            continue
        lo = [slice(None)] * d
        hi = [slice(None)] * d
        lo[a] = slice(0, -1)
        hi[a] = slice(1, None)
        faces += int(np.count_nonzero(g[tuple(lo)] != g[tuple(hi)]))
        if window_faces and g.shape[a] > 0:
            first = [slice(None)] * d
            last = [slice(None)] * d
            first[a] = 0
            last[a] = -1
            faces += int(np.count_nonzero(g[tuple(first)])) + int(np.count_nonzero(g[tuple(last)]))
    return faces * float(side) ** (d - 1)


def classify(f: SpinField, p: CoarseGrainParams) -> CoarseGrainResult:
    """Label every fully contained cube as Phase1, Phase0 or Mixed."""
    s = p.side
    k_origin, ones, per, excluded, cper = _block_ones(f, s)
    zeros = per - ones
    D = np.abs(ones - zeros) / per
    labels = np.full(ones.shape, Label.MIXED, dtype=np.int8)
    clear = ~(D < 1 - p.delta)
    labels[clear & (ones > zeros)] = Label.PHASE1
    labels[clear & (ones < zeros)] = Label.PHASE0
    length = s * f.eps
    mixed = labels == Label.MIXED
    k1 = labels == Label.PHASE1
    k0 = labels == Label.PHASE0
    adjacent = np.zeros(ones.shape, dtype=bool)
    for a in range(f.dim):
        nxt = np.roll(k0, -1, axis=a)
        if not cper[a]:
            idx = [slice(None)] * f.dim
            idx[a] = -1
            nxt[tuple(idx)] = False
        adjacent |= k1 & nxt
    d = f.dim
    return CoarseGrainResult(
        k_origin=k_origin,
        labels=labels,
        D=D,
        ones=ones,
        sites_per_cube=per,
        side=s,
        cube_length=length,
        delta=p.delta,
        periodic=cper,
        excluded_sites=excluded,
        rounding_error=p.rounding_error,
        mixed_measure=int(np.count_nonzero(mixed)) * length ** d,
        mixed_boundary=boundary_measure(mixed, length, cper, window_faces=False),
        k1_perimeter=boundary_measure(k1, length, cper, window_faces=False),
        adjacent_count=int(np.count_nonzero(adjacent)),
    )


def k_sets(r: CoarseGrainResult) -> tuple[np.ndarray, np.ndarray]:
    """Indicator grids of ``K_1`` (Phase1 cubes) and ``K_0`` (Phase0 cubes)."""
    return r.labels == Label.PHASE1, r.labels == Label.PHASE0
