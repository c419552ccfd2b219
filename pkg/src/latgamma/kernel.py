"""Interaction profiles and their continuum surface-tension functionals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "Kernel",
    "QuadratureSpec",
    "eval_kernel",
    "phi",
    "sigma_radial",
    "first_moment",
    "load_table",
]

# int_{B_1} |xi_1| dxi for the unit ball in dimension d.
_BALL_SIGMA = {1: 1.0, 2: 4.0 / 3.0, 3: math.pi / 2.0}
# int_{B_1} |xi| dxi
_BALL_MOMENT = {1: 1.0, 2: 2.0 * math.pi / 3.0, 3: math.pi}


@dataclass(frozen=True)
class QuadratureSpec:
    """Midpoint-rule grid: spacing ``h`` over the box ``[-half_width, half_width]^d``.

    Either field may be left as None, in which case the kernel's defaults apply
    (box = support, h = support/256 for d <= 2 and support/64 for d = 3).
    """

    h: Optional[float] = None
    half_width: Optional[float] = None


@dataclass(frozen=True, eq=False)
class Kernel:
    """A nonnegative interaction profile ``a`` on R^d with bounded support.

    Use the constructors :meth:`ball`, :meth:`exponential`, :meth:`tabulated`
    or :meth:`from_function` rather than the raw initializer.
    """

    dim: int
    kind: str
    radius: float = 1.0
    rate: float = 0.0
    radii: Optional[np.ndarray] = None
    table: Optional[np.ndarray] = None
    scale: float = 1.0
    fn: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)
    radial: bool = True

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.dim}")
        if self.scale < 0:
            raise ValueError("kernel scale must be nonnegative")
        if self.kind not in ("ball", "exp", "table", "function"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")

    # -- constructors -----------------------------------------------------
    @classmethod
    def ball(cls, dim: int, radius: float = 1.0) -> "Kernel":
        """Indicator of the open ball of the given radius."""
        if radius <= 0:
            raise ValueError("ball radius must be positive")
        return cls(dim=dim, kind="ball", radius=float(radius))

    @classmethod
    def exponential(cls, dim: int, rate: float, cutoff: float) -> "Kernel":
        """``exp(-rate |xi|)`` for ``|xi| < cutoff``, zero beyond."""
        if cutoff <= 0 or rate < 0:
            raise ValueError("need cutoff > 0 and rate >= 0")
        return cls(dim=dim, kind="exp", radius=float(cutoff), rate=float(rate))

    @classmethod
    def tabulated(cls, dim: int, radii, values) -> "Kernel":
        """Radial profile from samples, linearly interpolated, zero past the last radius."""
        r = np.asarray(radii, dtype=float)
        v = np.asarray(values, dtype=float)
        if r.ndim != 1 or r.shape != v.shape or r.size < 1:
            raise ValueError("radii and values must be 1-d arrays of equal length")
        if np.any(np.diff(r) <= 0) or r[0] < 0:
            raise ValueError("radii must be nonnegative and strictly increasing")
        if np.any(v < 0):
            raise ValueError("tabulated values must be nonnegative")
        r.setflags(write=False)
        v.setflags(write=False)
        return cls(dim=dim, kind="table", radii=r, table=v)

    @classmethod
    def from_function(cls, dim: int, fn, support_radius: float, radial: bool = False) -> "Kernel":
        """Wrap a vectorized callable ``fn(xi[..., d]) -> a``; zero outside the support."""
        return cls(dim=dim, kind="function", radius=float(support_radius), fn=fn, radial=radial)

    def scaled(self, t: float) -> "Kernel":
        """The profile multiplied by ``t >= 0``."""
        return Kernel(
            dim=self.dim, kind=self.kind, radius=self.radius, rate=self.rate,
            radii=self.radii, table=self.table, scale=self.scale * t, fn=self.fn,
            radial=self.radial,
        )

    # -- derived data -----------------------------------------------------
    @property
    def support_radius(self) -> float:
        if self.scale == 0:
            return 0.0
        if self.kind != "table":
            return self.radius
        nz = np.nonzero(self.table)[0]
        if nz.size == 0:
            return 0.0
        last = nz[-1]
        # the interpolant stays positive up to the next (zero) sample
        return float(self.radii[min(last + 1, self.radii.size - 1)])

    @property
    def lower_bound_certificate(self) -> Optional[tuple[float, float]]:
        """A pair ``(c0, r0)`` with ``a >= c0`` on ``|xi| <= r0``, or None if the profile vanishes at 0."""
        R = self.support_radius
        if R == 0:
            return None
        if self.kind == "ball":
            return (self.scale, 0.5 * R)
        if self.kind == "exp":
            r0 = 0.5 * R
            return (self.scale * math.exp(-self.rate * r0), r0)
        if self.kind == "table":
            if self.table[0] == 0 or self.radii[0] > 0:
                return None
            zero = np.nonzero(self.table == 0)[0]
            first_zero = self.radii[zero[0]] if zero.size else R
            r0 = 0.5 * float(first_zero)
            grid = np.concatenate([self.radii[self.radii <= r0], [r0]])
            c0 = float(np.min(self._radial_profile(grid)))
            return (c0, r0) if c0 > 0 else None
        # generic callable: probe a small ball
        r0 = 0.25 * R
        pts = _sphere_probe(self.dim, r0)
        c0 = float(np.min(self(pts)))
        return (c0, r0) if c0 > 0 else None

    def closed_form_sigma(self) -> Optional[float]:
        """Exact ``int a(xi)|xi_1| dxi`` when known (ball indicator), else None."""
        if self.kind == "ball":
            return self.scale * _BALL_SIGMA[self.dim] * self.radius ** (self.dim + 1)
        return None

    def closed_form_first_moment(self) -> Optional[float]:
        if self.kind == "ball":
            return self.scale * _BALL_MOMENT[self.dim] * self.radius ** (self.dim + 1)
        return None

    # -- evaluation -------------------------------------------------------
    def _radial_profile(self, r: np.ndarray) -> np.ndarray:
        if self.kind == "ball":
            out = (r < self.radius).astype(float)
        elif self.kind == "exp":
            out = np.where(r < self.radius, np.exp(-self.rate * r), 0.0)
        elif self.kind == "table":
            out = np.interp(r, self.radii, self.table, left=self.table[0], right=0.0)
            out = np.where(r > self.radii[-1], 0.0, out)
        else:
            raise TypeError("not a radial profile")
        return self.scale * out

    def __call__(self, xi) -> np.ndarray:
        """Evaluate ``a`` at the points ``xi`` (shape ``(..., d)``)."""
        x = np.asarray(xi, dtype=float)
        if self.dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        if x.shape[-1] != self.dim:
            raise ValueError(f"expected vectors of dimension {self.dim}, got shape {x.shape}")
        if self.kind == "function":
            r = np.sqrt(np.sum(x * x, axis=-1))
            val = np.asarray(self.fn(x), dtype=float)
            return self.scale * np.where(r > self.radius, 0.0, val)
        r = np.sqrt(np.sum(x * x, axis=-1))
        return self._radial_profile(r)


def eval_kernel(k: Kernel, xi) -> np.ndarray | float:
    val = k(xi)
    return float(val) if np.ndim(val) == 0 else val


def load_table(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a two-column ``radius value`` text file."""
    data = np.loadtxt(path, ndmin=2)
    if data.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns, got {data.shape[1]}")
    return data[:, 0], data[:, 1]


def _sphere_probe(dim: int, r: float) -> np.ndarray:
    t = np.linspace(-r, r, 9)
    grids = np.meshgrid(*([t] * dim), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    return pts[np.sum(pts * pts, axis=1) <= r * r]


def _midpoints(half_width: float, h: float) -> np.ndarray:
    # mirrored construction so the grid is exactly symmetric about 0
    n_half = max(1, math.ceil(half_width / h))
    step = half_width / n_half
    pos = (np.arange(n_half) + 0.5) * step
    return np.concatenate([-pos[::-1], pos]), step


def _resolve(k: Kernel, q: Optional[QuadratureSpec]) -> tuple[float, float]:
    q = q or QuadratureSpec()
    R = k.support_radius
    hw = R if q.half_width is None else float(q.half_width)
    if hw < R:
        raise ValueError(f"quadrature box half-width {hw} is smaller than the support radius {R}")
    if q.h is not None:
        h = float(q.h)
    else:
        h = (R if R > 0 else 1.0) / (256 if k.dim <= 2 else 64)
    if h <= 0:
        raise ValueError("quadrature spacing must be positive")
    return hw, h


def _integrate(k: Kernel, q: Optional[QuadratureSpec], weight) -> float:
    hw, h = _resolve(k, q)
    if hw == 0:
        return 0.0
    m, step = _midpoints(hw, h)
    d = k.dim
    cell = step ** d
    total = 0.0
    # chunk along the first axis to bound memory in 3-d
    rest = np.meshgrid(*([m] * (d - 1)), indexing="ij") if d > 1 else []
    rest = [g.ravel() for g in rest]
    for x0 in np.array_split(m, max(1, m.size // 32)):
        if d == 1:
            pts = x0[:, None]
        else:
            cols = [np.repeat(x0, rest[0].size)] + [np.tile(g, x0.size) for g in rest]
            pts = np.stack(cols, axis=-1)
        total += float(np.sum(k(pts) * weight(pts)))
    return total * cell


def phi(k: Kernel, nu, q: Optional[QuadratureSpec] = None) -> float:
    """Surface tension ``int a(xi) |<xi, nu>| dxi`` by the midpoint rule."""
    n = np.asarray(nu, dtype=float).reshape(-1)
    if n.size != k.dim:
        raise ValueError(f"direction has dimension {n.size}, kernel has {k.dim}")
    if abs(np.linalg.norm(n) - 1.0) > 1e-12:
        raise ValueError("direction must be a unit vector")
    return _integrate(k, q, lambda p: np.abs(p @ n))


def sigma_radial(k: Kernel, q: Optional[QuadratureSpec] = None) -> float:
    """The constant ``sigma`` with ``F(A) = sigma * Per(A)`` for radial profiles."""
    if not k.radial:
        raise ValueError("sigma_radial requires a radially symmetric kernel")
    e1 = np.zeros(k.dim)
    e1[0] = 1.0
    return phi(k, e1, q)


def first_moment(k: Kernel, q: Optional[QuadratureSpec] = None) -> float:
    """``int a(xi) |xi| dxi``; finite for every admissible kernel."""
    return _integrate(k, q, lambda p: np.sqrt(np.sum(p * p, axis=-1)))
