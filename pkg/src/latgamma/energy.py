"""Scaled long-range pair energies.

The energy of a field ``u`` on ``eps * L`` is

    (eps^(2d) / eta^(d+1)) * sum_{i,j} a(eps (i - j) / eta) |u_i - u_j|

over ordered pairs. Grouping pairs by their lattice displacement ``xi``
reduces it to ``prefactor * sum_xi a(eps xi / eta) * N_xi`` where ``N_xi``
counts sites whose partner at ``i + xi`` differs. The counts are computed
either directly (compiled core) or from FFT correlations using
``|u_i - u_j| = u_i + u_j - 2 u_i u_j``.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.fft
from scipy import ndimage

from . import _accel
from .field import PeriodicLattice, SpinField
from .kernel import Kernel

__all__ = [
    "NumericalError",
    "CoefficientMask",
    "coefficient_mask",
    "EnergyParams",
    "ShiftBlock",
    "interaction_shifts",
    "pair_counts",
    "pair_difference_count",
    "energy",
    "energy_direct",
    "energy_fft",
    "weighted_total",
    "count_line_jumps",
    "line_jump_counts",
    "line_jump_bound",
]


class NumericalError(ArithmeticError):
    """FFT correlation failed to reproduce integer pair counts."""


@dataclass(frozen=True)
class CoefficientMask:
    """Site-separable modification of the coefficients ``a_ij``.

    A pair keeps its coefficient only if both sites are active. ``perforation``
    deactivates the sites of ``N Z^d``; ``custom`` takes a predicate on unscaled
    site coordinates (array ``(..., d)`` -> bool array) returning the active sites.
    """

    rule: str = "full"
    N: Optional[int] = None
    predicate: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)

    def __post_init__(self):
        if self.rule not in ("full", "perforation", "custom"):
            raise ValueError(f"unknown mask rule {self.rule!r}")
        if self.rule == "perforation" and (self.N is None or self.N < 2):
            raise ValueError("perforation mask needs N >= 2")
        if self.rule == "custom" and self.predicate is None:
            raise ValueError("custom mask needs a predicate")

    @property
    def is_full(self) -> bool:
        return self.rule == "full"

    def site_weights(self, f: SpinField) -> np.ndarray:
        if self.rule == "full":
            return np.ones(f.values.shape, dtype=np.uint8)
        sites = f.sites()
        if self.rule == "perforation":
            active = ~np.all(np.mod(sites, self.N) == 0, axis=-1)
        else:
            active = np.asarray(self.predicate(sites), dtype=bool)
        return active.astype(np.uint8)


def coefficient_mask(rule: str = "full", N: Optional[int] = None, predicate=None) -> CoefficientMask:
    return CoefficientMask(rule, N, predicate)


@dataclass(frozen=True)
class EnergyParams:
    """Scales ``(eps, eta)``, the kernel, and optional mask / localization box.

    ``region`` is a physical box ``(lo, hi)``; when set, the outer site ``i``
    of each pair ranges over the sites with position in ``[lo, hi)`` only.
    """

    eps: float
    eta: float
    kernel: Kernel
    mask: CoefficientMask = CoefficientMask()
    region: Optional[tuple] = None

    def __post_init__(self):
        if self.eps <= 0 or self.eta <= 0:
            raise ValueError("eps and eta must be positive")
        if not self.eps < self.eta < 1:
            warnings.warn(f"expected eps < eta < 1, got eps={self.eps}, eta={self.eta}", stacklevel=3)
        elif self.eta / self.eps < 4:
            warnings.warn(
                f"eta/eps = {self.eta / self.eps:.3g} < 4: coarse-graining cubes are below one site",
                stacklevel=3,
            )

    @property
    def dim(self) -> int:
        return self.kernel.dim

    @property
    def ratio(self) -> float:
        """Interaction range in lattice units, ``R = eta / eps``."""
        return self.eta / self.eps

    @property
    def prefactor(self) -> float:
        d = self.dim
        return self.eps ** (2 * d) / self.eta ** (d + 1)

    def with_kernel(self, kernel: Kernel) -> "EnergyParams":
        return EnergyParams(self.eps, self.eta, kernel, self.mask, self.region)


@dataclass(frozen=True)
class ShiftBlock:
    """Cell shifts ``c`` between offset classes ``p -> q`` and their weights."""

    p: int
    q: int
    cells: np.ndarray
    weights: np.ndarray


@functools.lru_cache(maxsize=64)
def _shift_blocks(lattice: PeriodicLattice, kernel: Kernel, eps: float, eta: float) -> tuple:
    h = eps / eta
    R = kernel.support_radius
    blocks = []
    for p, op in enumerate(lattice.offsets):
        for q, oq in enumerate(lattice.offsets):
            delta = oq - op
            lim = R / h
            axes = [np.arange(math.floor(-lim - dl), math.ceil(lim - dl) + 1) for dl in delta]
            grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, lattice.dim)
            scaled = (grid + delta) * h
            # shifts within rounding of the support edge count as on it (open support)
            keep = np.sqrt(np.sum(scaled * scaled, axis=1)) < R * (1 - 1e-12)
            if p == q:
                keep &= np.any(grid != 0, axis=1)
            cells = grid[keep].astype(np.int64)
            w = np.asarray(kernel(scaled[keep]), dtype=float).reshape(-1)
            nz = w > 0
            cells, w = cells[nz], w[nz]
            cells.setflags(write=False)
            w.setflags(write=False)
            blocks.append(ShiftBlock(p, q, cells, w))
    return tuple(blocks)


def interaction_shifts(f_or_lattice, p: EnergyParams) -> tuple:
    """All shift blocks with nonzero weight ``a(eps (c + o_q - o_p) / eta)``."""
    lattice = f_or_lattice.lattice if isinstance(f_or_lattice, SpinField) else f_or_lattice
    if lattice.dim != p.dim:
        raise ValueError("kernel and lattice dimensions differ")
    return _shift_blocks(lattice, p.kernel, float(p.eps), float(p.eta))


def _site_masks(f: SpinField, mask: CoefficientMask, region):
    w = mask.site_weights(f)
    left = w
    if region is not None:
        lo, hi = (np.asarray(r, dtype=float).reshape(-1) for r in region)
        pos = f.positions()
        inside = np.all((pos >= lo) & (pos < hi), axis=-1)
        left = w & inside.astype(np.uint8)
    return left, w


def _check_range(f: SpinField, blocks) -> None:
    for a, (n, per) in enumerate(zip(f.extents, f.periodic)):
        if per:
            continue
        reach = max((int(np.max(np.abs(b.cells[:, a]))) for b in blocks if len(b.cells)), default=0)
        if reach >= n:
            warnings.warn(
                f"restricted window ({n} cells on axis {a}) is smaller than the interaction range ({reach})",
                stacklevel=4,
            )


def _direct_counts(f: SpinField, p: EnergyParams, blocks) -> list:
    left, right = _site_masks(f, p.mask, p.region)
    u = f.values
    out = []
    for b in blocks:
        if len(b.cells) == 0:
            out.append(np.zeros(0, dtype=np.int64))
            continue
        out.append(
            _accel.pair_counts(
                u[..., b.p], left[..., b.p], u[..., b.q], right[..., b.q], b.cells, f.periodic
            )
        )
    return out


def _fft_counts(f: SpinField, p: EnergyParams, blocks) -> list:
    left, right = _site_masks(f, p.mask, p.region)
    u = f.values
    n = f.extents
    reach = [0] * f.dim
    for b in blocks:
        if len(b.cells):
            reach = [max(r, int(m)) for r, m in zip(reach, np.max(np.abs(b.cells), axis=0))]
    shape = tuple(
        na if per else scipy.fft.next_fast_len(na + min(ra, na - 1), real=True)
        for na, per, ra in zip(n, f.periodic, reach)
    )
    workers = _accel.get_threads()
    cache = {}

    def transforms(k):
        if k not in cache:
            L = left[..., k].astype(float)
            R = right[..., k].astype(float)
            uk = u[..., k].astype(float)
            cache[k] = tuple(
                scipy.fft.rfftn(x, s=shape, workers=workers) for x in (L * uk, L, R * uk, R)
            )
        return cache[k]

    # relative to the window, but never loose enough to make rounding ambiguous
    tol = min(1e-6 * f.n_sites, 0.25)
    out = []
    for b in blocks:
        if len(b.cells) == 0:
            out.append(np.zeros(0, dtype=np.int64))
            continue
        LA, LW, _, _ = transforms(b.p)
        _, _, RB, RW = transforms(b.q)
        spec = np.conj(LA) * RW + np.conj(LW) * RB - 2.0 * np.conj(LA) * RB
        corr = scipy.fft.irfftn(spec, s=shape, workers=workers)
        idx = tuple(np.mod(b.cells[:, a], shape[a]) for a in range(f.dim))
        raw = corr[idx]
        counts = np.rint(raw)
        resid = float(np.max(np.abs(raw - counts))) if raw.size else 0.0
        if resid > tol:
            raise NumericalError(f"FFT pair counts off integers by {resid:.3g} (> {tol:.3g})")
        counts = counts.astype(np.int64)
        for a in range(f.dim):
            if not f.periodic[a]:
                counts[np.abs(b.cells[:, a]) >= n[a]] = 0
        out.append(counts)
    return out


def pair_counts(f: SpinField, p: EnergyParams, method: str = "fft") -> list:
    """``N_xi`` for every shift of every block, as a list aligned with :func:`interaction_shifts`."""
    blocks = interaction_shifts(f, p)
    _check_range(f, blocks)
    if method == "fft":
        return _fft_counts(f, p, blocks)
    if method == "direct":
        return _direct_counts(f, p, blocks)
    raise ValueError(f"unknown method {method!r}")


def weighted_total(p: EnergyParams, blocks, counts) -> float:
    """``prefactor * sum w * N`` with one fixed pairwise reduction over all shifts."""
    if not blocks:
        return 0.0
    w = np.concatenate([b.weights for b in blocks])
    c = np.concatenate(counts).astype(float)
    if w.size == 0:
        return 0.0
    d = p.dim
    # eps^(2d) is often a power of two; dividing last keeps closed forms exact
    return float(np.sum(w * c)) * p.eps ** (2 * d) / p.eta ** (d + 1)


def energy_direct(f: SpinField, p: EnergyParams) -> float:
    blocks = interaction_shifts(f, p)
    return weighted_total(p, blocks, pair_counts(f, p, "direct"))


def energy_fft(f: SpinField, p: EnergyParams) -> float:
    blocks = interaction_shifts(f, p)
    return weighted_total(p, blocks, pair_counts(f, p, "fft"))


def energy(f: SpinField, p: EnergyParams, method: str = "fft") -> float:
    if method == "fft":
        return energy_fft(f, p)
    if method == "direct":
        return energy_direct(f, p)
    raise ValueError(f"unknown method {method!r}")


def pair_difference_count(
    f: SpinField, xi, offsets=(0, 0), mask: Optional[CoefficientMask] = None, region=None
) -> int:
    """``N_xi = #{i : u_{i+xi} != u_i}`` for one cell shift between offset classes."""
    xi = np.asarray(xi, dtype=np.int64).reshape(1, -1)
    if xi.shape[1] != f.dim:
        raise ValueError("shift dimension does not match the field")
    pr, qr = offsets
    left, right = _site_masks(f, mask or CoefficientMask(), region)
    u = f.values
    return int(_accel.pair_counts(u[..., pr], left[..., pr], u[..., qr], right[..., qr], xi, f.periodic)[0])


def count_line_jumps(f: SpinField, xi, base) -> int:
    """Value changes of ``u`` along ``base + k xi`` between consecutive in-window sites.

    ``base`` is an absolute lattice index; the window must be restricted along
    every axis on which ``xi`` moves.
    """
    if not f.lattice.is_cubic:
        raise ValueError("line scans are defined on Z^d")
    xi = np.asarray(xi, dtype=np.int64).reshape(-1)
    b = np.asarray(base, dtype=np.int64).reshape(-1) - np.asarray(f.origin)
    if xi.size != f.dim or b.size != f.dim or not xi.any():
        raise ValueError("need a nonzero shift and a base point of the field's dimension")
    kmin, kmax = -(1 << 62), 1 << 62
    for a, (n, s) in enumerate(zip(f.extents, xi)):
        if s == 0:
            if f.periodic[a]:
                b[a] %= n
            elif not 0 <= b[a] < n:
                return 0
            continue
        if f.periodic[a]:
            raise ValueError("count_line_jumps needs a restricted window along the line")
        lo, hi = (-b[a]) / s, (n - 1 - b[a]) / s
        if s < 0:
            lo, hi = hi, lo
        kmin = max(kmin, math.ceil(lo))
        kmax = min(kmax, math.floor(hi))
    if kmax <= kmin:
        return 0
    ks = np.arange(kmin, kmax + 1)
    pts = b[None, :] + ks[:, None] * xi[None, :]
    vals = f.array[tuple(pts.T)]
    return int(np.count_nonzero(vals[1:] != vals[:-1]))


def _interface_band(f: SpinField, reach) -> tuple[np.ndarray, np.ndarray]:
    """Sites within l-infinity distance ``reach`` of a jump, nearest first, with their distances."""
    u = f.array
    iface = np.zeros(u.shape, dtype=bool)
    for a in range(f.dim):
        if f.periodic[a]:
            diff = u != np.roll(u, -1, axis=a)
            iface |= diff | np.roll(diff, 1, axis=a)
        else:
            sl_lo = [slice(None)] * f.dim
            sl_hi = [slice(None)] * f.dim
            sl_lo[a] = slice(0, -1)
            sl_hi[a] = slice(1, None)
            diff = u[tuple(sl_lo)] != u[tuple(sl_hi)]
            iface[tuple(sl_lo)] |= diff
            iface[tuple(sl_hi)] |= diff
    if not iface.any():
        return np.zeros((0, f.dim), dtype=np.int64), np.zeros(0, dtype=np.int64)
    # l-infinity distance to the interface; periodic axes are padded by wrapping
    reach = int(reach)
    pad = [(reach, reach) if per else (0, 0) for per in f.periodic]
    dist = ndimage.distance_transform_cdt(~np.pad(iface, pad, mode="wrap"), metric="chessboard")
    dist = dist[tuple(slice(lo, lo + n) for (lo, _), n in zip(pad, u.shape))].reshape(-1)
    flat = np.flatnonzero(dist <= reach)
    d = dist[flat]
    order = np.argsort(d, kind="stable")
    coords = np.stack(np.unravel_index(flat[order], u.shape), axis=-1)
    return coords, d[order].astype(np.int64)


def line_jump_counts(f: SpinField, p: EnergyParams, impl=None) -> np.ndarray:
    """Per shift, the number of maximal in-window lines ``i + k xi`` on which ``u`` is not constant."""
    if not f.lattice.is_cubic:
        raise ValueError("line-jump counts are defined on Z^d")
    if not p.mask.is_full or p.region is not None:
        raise ValueError("line-jump counts need full coefficients and no localization")
    (block,) = interaction_shifts(f, p)
    cells = block.cells
    if len(cells) == 0:
        return np.zeros(0, dtype=np.int64)
    # lines along xi and -xi coincide: count each once
    first = np.argmax(cells != 0, axis=1)
    sign = cells[np.arange(len(cells)), first]
    canon = np.where((sign > 0)[:, None], cells, -cells)
    uniq, inverse = np.unique(canon, axis=0, return_inverse=True)
    # a jump across xi has an interface site within |xi|_inf of its start
    span = np.max(np.abs(uniq), axis=1)
    coords, dist = _interface_band(f, int(span.max()))
    limits = np.searchsorted(dist, span, side="right")
    counts = _accel.nonconstant_lines(f.array, uniq, f.periodic, coords, limits, impl=impl)
    return counts[np.asarray(inverse).reshape(-1)]


def line_jump_bound(f: SpinField, p: EnergyParams) -> float:
    """``prefactor * sum_xi a(eps xi/eta) * #(non-constant lines along xi)``.

    Every non-constant line carries at least one jump, so this never exceeds
    the energy of the same field.
    """
    blocks = interaction_shifts(f, p)
    return weighted_total(p, blocks, [line_jump_counts(f, p)])
