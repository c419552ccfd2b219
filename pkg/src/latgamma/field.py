"""Binary spin fields on finite windows of scaled periodic lattices."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

__all__ = [
    "PeriodicLattice",
    "SpinField",
    "TargetSet",
    "HalfSpace",
    "Polytope",
    "Ball",
    "Perforated",
    "Complement",
    "Whole",
    "sample",
    "interpolate",
    "window_average",
    "window_fraction",
    "l1_distance",
    "voronoi_volume_estimate",
]


class PeriodicLattice:
    """Sites ``offset + Z^d`` for each offset in the half-open unit cell."""

    def __init__(self, offsets):
        off = np.atleast_2d(np.asarray(offsets, dtype=float))
        if off.shape[0] < 1:
            raise ValueError("a lattice needs at least one offset")
        if off.shape[1] not in (1, 2, 3):
            raise ValueError("lattice dimension must be 1, 2 or 3")
        if np.any(off < 0) or np.any(off >= 1):
            raise ValueError("offsets must lie in [0, 1)^d")
        if len({tuple(o) for o in off}) != off.shape[0]:
            raise ValueError("offsets must be pairwise distinct")
        off.setflags(write=False)
        self.offsets = off

    @classmethod
    def cubic(cls, dim: int) -> "PeriodicLattice":
        return cls(np.zeros((1, dim)))

    @property
    def dim(self) -> int:
        return self.offsets.shape[1]

    @property
    def n_offsets(self) -> int:
        return self.offsets.shape[0]

    @property
    def is_cubic(self) -> bool:
        return self.n_offsets == 1 and not np.any(self.offsets)

    def __eq__(self, other):
        return isinstance(other, PeriodicLattice) and np.array_equal(self.offsets, other.offsets)

    def __hash__(self):
        return hash(self.offsets.tobytes())

    def __repr__(self):
        return f"PeriodicLattice(offsets={self.offsets.tolist()})"


def _parse_boundary(boundary, dim: int) -> tuple[bool, ...]:
    if isinstance(boundary, str):
        if boundary not in ("periodic", "restricted"):
            raise ValueError(f"unknown boundary {boundary!r}")
        return (boundary == "periodic",) * dim
    flags = tuple(
        b if isinstance(b, bool) else _parse_boundary(b, 1)[0] for b in boundary
    )
    if len(flags) != dim:
        raise ValueError("per-axis boundary must have one entry per axis")
    return flags


@dataclass(frozen=True, eq=False)
class SpinField:
    """Occupancies ``u_i`` in {0, 1} on a window of the lattice ``eps * L``.

    ``values`` has shape ``extents + (n_offsets,)``; cell ``c`` of the window
    sits at absolute cell index ``origin + c``. ``periodic[a]`` selects
    wrapping along axis ``a``; otherwise interactions stay in the window.
    """

    lattice: PeriodicLattice
    eps: float
    origin: tuple
    values: np.ndarray
    periodic: tuple

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.uint8)
        d = self.lattice.dim
        if v.ndim != d + 1 or v.shape[-1] != self.lattice.n_offsets:
            raise ValueError(f"values must have shape extents + ({self.lattice.n_offsets},)")
        if np.any(v > 1):
            raise ValueError("spin values must be 0 or 1")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if len(self.origin) != d:
            raise ValueError("origin must have one entry per axis")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "origin", tuple(int(o) for o in self.origin))
        object.__setattr__(self, "periodic", _parse_boundary(self.periodic, d))
        object.__setattr__(self, "eps", float(self.eps))

    @classmethod
    def from_array(cls, arr, eps: float = 1.0, origin=None, boundary="periodic") -> "SpinField":
        """Field on Z^d from a plain ``extents``-shaped 0/1 array."""
        a = np.asarray(arr, dtype=np.uint8)
        d = a.ndim
        if origin is None:
            origin = tuple(-(n // 2) for n in a.shape)
        return cls(PeriodicLattice.cubic(d), eps, tuple(origin), a[..., None], boundary)

    @property
    def dim(self) -> int:
        return self.lattice.dim

    @property
    def extents(self) -> tuple:
        return self.values.shape[:-1]

    @property
    def n_sites(self) -> int:
        return self.values.size

    @property
    def boundary(self) -> str:
        if all(self.periodic):
            return "periodic"
        if not any(self.periodic):
            return "restricted"
        return "mixed"

    @property
    def array(self) -> np.ndarray:
        """Values on Z^d without the trailing offset axis."""
        if self.lattice.n_offsets != 1:
            raise ValueError("array view is only defined for single-offset lattices")
        return self.values[..., 0]

    def with_values(self, values) -> "SpinField":
        return SpinField(self.lattice, self.eps, self.origin, values, self.periodic)

    def flipped(self) -> "SpinField":
        return self.with_values(1 - self.values)

    def cell_indices(self) -> np.ndarray:
        """Absolute cell index of every window cell, shape ``extents + (d,)``."""
        axes = [np.arange(n) + o for n, o in zip(self.extents, self.origin)]
        grids = np.meshgrid(*axes, indexing="ij")
        return np.stack(grids, axis=-1)

    def sites(self) -> np.ndarray:
        """Unscaled site coordinates, shape ``extents + (n_offsets, d)``."""
        cells = self.cell_indices().astype(float)
        return cells[..., None, :] + self.lattice.offsets

    def positions(self) -> np.ndarray:
        """Physical site positions ``eps * i``."""
        return self.eps * self.sites()

    def physical_box(self) -> tuple[np.ndarray, np.ndarray]:
        lo = self.eps * np.asarray(self.origin, dtype=float)
        hi = lo + self.eps * np.asarray(self.extents, dtype=float)
        return lo, hi


# -- target sets -----------------------------------------------------------

class TargetSet:
    """A subset of R^d that can be sampled on a lattice."""

    def indicator(self, positions: np.ndarray, sites: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class HalfSpace(TargetSet):
    """``{x : <x, nu> >= offset}``.

    Points with ``<x, nu> < offset`` (the shifted ``H^nu``, strict inequality)
    carry the value 0; ``nu`` points into the 1-phase.
    """

    normal: tuple
    offset: float = 0.0

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float).reshape(-1)
        if abs(np.linalg.norm(n) - 1.0) > 1e-12:
            raise ValueError("half-space normal must be a unit vector")
        object.__setattr__(self, "normal", tuple(float(x) for x in n))

    def indicator(self, positions, sites):
        return ~(positions @ np.asarray(self.normal) < self.offset)


@dataclass(frozen=True)
class Polytope(TargetSet):
    """Intersection of closed half-spaces."""

    constraints: tuple

    def __post_init__(self):
        if len(self.constraints) == 0:
            raise ValueError("a polytope needs at least one constraint")
        object.__setattr__(self, "constraints", tuple(self.constraints))

    @classmethod
    def box(cls, lo, hi) -> "Polytope":
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        cons = []
        for a in range(lo.size):
            e = np.zeros(lo.size)
            e[a] = 1.0
            cons.append(HalfSpace(tuple(e), float(lo[a])))
            cons.append(HalfSpace(tuple(-e), float(-hi[a])))
        return cls(tuple(cons))

    @property
    def dim(self) -> int:
        return len(self.constraints[0].normal)

    def indicator(self, positions, sites):
        out = np.ones(positions.shape[:-1], dtype=bool)
        for h in self.constraints:
            out &= h.indicator(positions, sites)
        return out


@dataclass(frozen=True)
class Ball(TargetSet):
    center: tuple
    radius: float

    def indicator(self, positions, sites):
        c = np.asarray(self.center, dtype=float)
        return np.sum((positions - c) ** 2, axis=-1) < self.radius ** 2


@dataclass(frozen=True)
class Perforated(TargetSet):
    """Everything except the perforation ``N Z^d`` (in unscaled lattice units)."""

    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ValueError("perforation period N must be an integer >= 2")

    def indicator(self, positions, sites):
        on_grid = np.all(np.mod(sites, self.N) == 0, axis=-1)
        return ~on_grid


@dataclass(frozen=True)
class Complement(TargetSet):
    inner: TargetSet

    def indicator(self, positions, sites):
        return ~self.inner.indicator(positions, sites)


@dataclass(frozen=True)
class Whole(TargetSet):
    def indicator(self, positions, sites):
        return np.ones(positions.shape[:-1], dtype=bool)


# -- operations --------------------------------------------------------------

def _window_tuple(window, dim: int) -> tuple:
    if np.isscalar(window):
        window = (int(window),) * dim
    w = tuple(int(n) for n in window)
    if len(w) != dim or min(w) < 1:
        raise ValueError("window extents must be positive, one per axis")
    return w


def sample(
    target: TargetSet,
    lattice: Union[PeriodicLattice, int],
    eps: float,
    window,
    boundary="periodic",
    origin=None,
) -> SpinField:
    """Sample ``u_i = chi_A(eps i)`` on a window of ``window`` cells per axis.

    ``origin`` is the absolute index of the first cell; by default the window
    is centred, i.e. ``origin = -(n // 2)``.
    """
    if isinstance(lattice, int):
        lattice = PeriodicLattice.cubic(lattice)
    d = lattice.dim
    w = _window_tuple(window, d)
    if origin is None:
        origin = tuple(-(n // 2) for n in w)
    proto = SpinField(lattice, eps, origin, np.zeros(w + (lattice.n_offsets,), np.uint8), boundary)
    sites = proto.sites()
    vals = target.indicator(eps * sites, sites).astype(np.uint8)
    return proto.with_values(vals)


def interpolate(f: SpinField, x) -> int:
    """Value of the piecewise-constant interpolation at the physical point ``x``.

    Nearest scaled site wins; ties go to the lexicographically smallest
    ``(cell index, offset index)``.
    """
    y = np.asarray(x, dtype=float).reshape(-1) / f.eps
    if y.size != f.dim:
        raise ValueError("point dimension does not match the field")
    best = None
    corners = np.array(np.meshgrid(*([[0, 1]] * f.dim), indexing="ij")).reshape(f.dim, -1).T
    for p, off in enumerate(f.lattice.offsets):
        base = np.floor(y - off).astype(np.int64)
        for c in base + corners:
            diff = y - (c + off)
            key = (float(diff @ diff), tuple(int(t) for t in c), p)
            if best is None or key < best:
                best = key
    _, cell, p = best
    local = []
    for a, (ci, o, n) in enumerate(zip(cell, f.origin, f.extents)):
        li = ci - o
        if f.periodic[a]:
            li %= n
        elif not 0 <= li < n:
            raise ValueError(f"point {tuple(np.asarray(x).reshape(-1))} lies outside the restricted window")
        local.append(li)
    return int(f.values[tuple(local) + (p,)])


def _region_mask(f: SpinField, region) -> np.ndarray:
    if region is None:
        return np.ones(f.values.shape, dtype=bool)
    lo, hi = (np.asarray(r, dtype=float).reshape(-1) for r in region)
    pos = f.positions()
    return np.all((pos >= lo) & (pos < hi), axis=-1)


def window_fraction(f: SpinField, region=None) -> Fraction:
    """Exact fraction of ones among the sites with position in ``[lo, hi)``."""
    m = _region_mask(f, region)
    n = int(np.count_nonzero(m))
    if n == 0:
        raise ValueError("region contains no sites of the window")
    return Fraction(int(np.count_nonzero(f.values[m])), n)


def window_average(f: SpinField, region=None) -> float:
    """Mean of ``u`` over the sites in the axis-aligned box ``region = (lo, hi)``."""
    return float(window_fraction(f, region))


def l1_distance(f: SpinField, target: TargetSet, region=None) -> float:
    """Discrete L1 distance ``eps^d * #{i in region : u_i != chi_A(eps i)}``."""
    m = _region_mask(f, region)
    sites = f.sites()
    ref = target.indicator(f.eps * sites, sites)
    bad = np.count_nonzero((f.values.astype(bool) != ref) & m)
    return f.eps ** f.dim * bad


def voronoi_volume_estimate(lattice: PeriodicLattice, offset_index: int, samples: int = 100_000, seed=0):
    """Monte Carlo estimate of ``|V_i|`` for the sites of one offset class.

    Returns ``(estimate, standard_error)``.
    """
    from scipy.spatial import cKDTree

    if samples < 10_000:
        raise ValueError("use at least 10^4 samples")
    d = lattice.dim
    shifts = np.array(np.meshgrid(*([[-1, 0, 1]] * d), indexing="ij")).reshape(d, -1).T
    pts = (lattice.offsets[None, :, :] + shifts[:, None, :]).reshape(-1, d)
    owner = np.tile(np.arange(lattice.n_offsets), shifts.shape[0])
    rng = np.random.default_rng(seed)
    x = rng.random((samples, d))
    _, idx = cKDTree(pts).query(x)
    p = float(np.mean(owner[idx] == offset_index))
    return p, math.sqrt(max(p * (1 - p), 0.0) / samples)
