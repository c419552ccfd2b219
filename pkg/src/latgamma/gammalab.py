"""Experiment drivers checking discrete energies against the surface-tension limit.

Each driver walks a :class:`Schedule` of ``(eps, eta)`` pairs, samples a target
set on the lattice, evaluates the scaled energy and the coarse-graining
diagnostics, and collects everything in a :class:`ConvergenceReport`.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .coarsegrain import CoarseGrainParams, Label, classify
from .energy import CoefficientMask, EnergyParams, energy, line_jump_bound
from .field import HalfSpace, PeriodicLattice, Perforated, Polytope, TargetSet, sample, window_fraction
from .kernel import Kernel, QuadratureSpec, phi

__all__ = [
    "Schedule",
    "StepRecord",
    "ConvergenceReport",
    "riemann_phi",
    "phi_target",
    "polytope_faces",
    "halfspace_experiment",
    "polytope_experiment",
    "perforation_counterexample",
    "fit_rate",
]

CSV_COLUMNS = (
    "eps", "eta", "energy", "normalized", "target", "rel_error",
    "mixed_count", "mixed_measure", "k1_perimeter",
)


@dataclass(frozen=True)
class Schedule:
    """Decreasing scales ``(eps, eta)`` with ``eta -> 0`` and ``eps / eta -> 0``."""

    steps: tuple
    rule: str = "custom"
    window: Optional[float] = None

    def __post_init__(self):
        steps = tuple((float(e), float(h)) for e, h in self.steps)
        if not steps:
            raise ValueError("a schedule needs at least one step")
        for e, h in steps:
            if not 0 < e < h:
                raise ValueError(f"need 0 < eps < eta, got ({e}, {h})")
        for (e0, h0), (e1, h1) in zip(steps, steps[1:]):
            if not e1 < e0:
                raise ValueError("eps must be strictly decreasing")
            if h1 > h0 or e1 / h1 > e0 / h0:
                raise ValueError("eta and eps/eta must not increase along the schedule")
        object.__setattr__(self, "steps", steps)

    @classmethod
    def power(cls, eps0: float = 1 / 256, n_steps: int = 5, factor: float = 2.0,
              exponent: float = 0.5, window: Optional[float] = None) -> "Schedule":
        """``eps_k = eps0 / factor^k`` and ``eta = eps^exponent``."""
        eps = [eps0 / factor ** k for k in range(n_steps)]
        return cls(tuple((e, e ** exponent) for e in eps), f"eta=eps^{exponent:g}", window)

    @classmethod
    def from_ratios(cls, ratios: Sequence[float], exponent: float = 0.5,
                    window: Optional[float] = None) -> "Schedule":
        """Steps with prescribed ``eta/eps = R`` on the curve ``eta = eps^exponent``."""
        if not 0 < exponent < 1:
            raise ValueError("exponent must lie in (0, 1)")
        steps = []
        for R in ratios:
            e = float(R) ** (1.0 / (exponent - 1.0))
            steps.append((e, R * e))
        return cls(tuple(steps), f"eta=eps^{exponent:g}", window)

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)


@dataclass
class StepRecord:
    eps: float
    eta: float
    energy: float
    normalized: float
    target: float
    rel_error: float
    mixed_count: int
    mixed_measure: float
    k1_perimeter: float
    extras: dict = field(default_factory=dict)


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


def _jsonable(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


@dataclass
class ConvergenceReport:
    kind: str
    target: float
    target_source: str
    records: list
    params: dict = field(default_factory=dict)
    rate: Optional[float] = None

    @property
    def rel_errors(self) -> np.ndarray:
        return np.array([r.rel_error for r in self.records])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.records:
            w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return _jsonable({
            "kind": self.kind,
            "target": self.target,
            "target_source": self.target_source,
            "rate": self.rate,
            "params": self.params,
            "records": [
                {**{c: getattr(r, c) for c in CSV_COLUMNS}, "extras": r.extras} for r in self.records
            ],
        })

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def write(self, out_dir, stem: str) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        pc, pj = out / f"{stem}.csv", out / f"{stem}.json"
        pc.write_text(self.to_csv(), encoding="utf-8", newline="\n")
        pj.write_text(self.to_json(indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n")
        return pc, pj


def riemann_phi(k: Kernel, nu, h: float) -> float:
    """``sum_{xi in Z^d} h^d a(h xi) |<h xi, nu>|`` over ``|h xi| < support``."""
    R = k.support_radius
    if h <= 0:
        raise ValueError("need h > 0")
    if R == 0:
        return 0.0
    n = np.asarray(nu, dtype=float).reshape(-1)
    m = math.ceil(R / h)
    ax = np.arange(-m, m + 1)
    pts = np.stack(np.meshgrid(*([ax] * k.dim), indexing="ij"), axis=-1).reshape(-1, k.dim) * h
    inside = np.sqrt(np.sum(pts * pts, axis=1)) < R * (1 - 1e-12)
    pts = pts[inside]
    return float(h ** k.dim * np.sum(k(pts) * np.abs(pts @ n)))


def phi_target(k: Kernel, nu, quadrature: Optional[QuadratureSpec] = None) -> tuple[float, str]:
    """``phi_a(nu)`` with its provenance tag."""
    if k.radial:
        s = k.closed_form_sigma()
        if s is not None:
            return s, "closed-form"
    return phi(k, nu, quadrature), "quadrature"


def polytope_faces(A: Polytope) -> tuple[list, np.ndarray, np.ndarray]:
    """Boundary pieces ``[(measure, outward normal)]`` and the bounding box of ``A``."""
    d = A.dim
    normals = np.array([c.normal for c in A.constraints])
    offs = np.array([c.offset for c in A.constraints])
    if d == 1:
        lo = max([o * n for n, o in zip(normals[:, 0], offs) if n > 0], default=-np.inf)
        hi = min([o * n for n, o in zip(normals[:, 0], offs) if n < 0], default=np.inf)
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise ValueError("polytope is unbounded")
        faces = [(1.0, np.array([-1.0])), (1.0, np.array([1.0]))] if lo < hi else []
        return faces, np.array([lo]), np.array([hi])
    from scipy.optimize import linprog
    from scipy.spatial import ConvexHull, HalfspaceIntersection

    # constraints <x, n> >= c  <=>  -n x <= -c
    A_ub, b_ub = -normals, -offs
    lo, hi = np.empty(d), np.empty(d)
    for a in range(d):
        cvec = np.zeros(d)
        cvec[a] = 1.0
        r1 = linprog(cvec, A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * d)
        r2 = linprog(-cvec, A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * d)
        if r1.status != 0 or r2.status != 0:
            raise ValueError("polytope is empty or unbounded")
        lo[a], hi[a] = r1.fun, -r2.fun
    # Chebyshev centre: maximise r with n.x - r|n| >= c
    norms = np.linalg.norm(normals, axis=1)
    res = linprog(
        np.r_[np.zeros(d), -1.0],
        A_ub=np.c_[-normals, norms], b_ub=-offs,
        bounds=[(None, None)] * d + [(0, None)],
    )
    if res.status != 0 or res.x[-1] <= 1e-12:
        return [], lo, hi
    center = res.x[:d]
    hs = HalfspaceIntersection(np.c_[-normals, offs], center)
    hull = ConvexHull(hs.intersections)
    faces = []
    for simplex, eq in zip(hull.simplices, hull.equations):
        P = hs.intersections[simplex]
        if d == 2:
            area = float(np.linalg.norm(P[1] - P[0]))
        else:
            area = 0.5 * float(np.linalg.norm(np.cross(P[1] - P[0], P[2] - P[0])))
        faces.append((area, eq[:d] / np.linalg.norm(eq[:d])))
    return faces, lo, hi


def _aligned(lo_cell: int, hi_cell: int, s: int) -> tuple[int, int]:
    """Cube-aligned ``(origin, extent)`` covering cells ``[lo_cell, hi_cell]``."""
    h = s // 2
    k0 = math.floor((lo_cell + h) / s)
    k1 = math.ceil((hi_cell + h - s + 1) / s)
    return s * k0 - h, s * (k1 - k0 + 1)


def _coarse_entries(cg) -> dict:
    return {
        "n_phase1": cg.n_phase1,
        "n_phase0": cg.n_phase0,
        "adjacent_count": cg.adjacent_count,
        "mixed_boundary": cg.mixed_boundary,
        "cube_side_sites": cg.side,
        "cube_length": cg.cube_length,
        "side_rounding_error": cg.rounding_error,
    }


def _cube_centers(cg, eps: float) -> np.ndarray:
    s = cg.side
    axes = [
        (s * (np.arange(m) + k0) - s // 2 + (s - 1) / 2.0) * eps
        for m, k0 in zip(cg.extents, cg.k_origin)
    ]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


def halfspace_experiment(
    k: Kernel,
    nu,
    schedule: Schedule,
    delta: float = 0.5,
    window: Optional[float] = None,
    target_set: Optional[TargetSet] = None,
    method: str = "fft",
    line_bound: bool = True,
    quadrature: Optional[QuadratureSpec] = None,
) -> ConvergenceReport:
    """Energy per unit interface area of sampled half-spaces ``{<x, nu> >= 0}``.

    For coordinate normals the window is periodic along the interface and
    restricted across it. For oblique normals the window is restricted and
    the energy is localized on an interior box whose margin exceeds the
    interaction range; the interface measure is that of its section of the box.
    ``window`` is the physical side (default ``8 * max eta``); it is held fixed
    along the schedule so cube counts scale with ``eta``. ``target_set``
    replaces the sampled half-space (e.g. a constant field).
    """
    n = np.asarray(nu, dtype=float).reshape(-1)
    d = k.dim
    if n.size != d or abs(np.linalg.norm(n) - 1) > 1e-12:
        raise ValueError("nu must be a unit vector of the kernel's dimension")
    target, source = phi_target(k, n, quadrature)
    L = window if window is not None else (schedule.window or 8.0 * max(h for _, h in schedule))
    lattice = PeriodicLattice.cubic(d)
    tset = target_set if target_set is not None else HalfSpace(tuple(n), 0.0)
    nz = np.flatnonzero(n)
    aligned = nz.size == 1
    m = int(np.argmax(np.abs(n)))
    records = []
    for eps, eta in schedule:
        p = EnergyParams(eps, eta, k)
        cgp = CoarseGrainParams.from_energy(p, delta)
        s = cgp.side
        reach = math.ceil(p.ratio * k.support_radius)
        half_t = max(1, round(L / (2 * eps)))
        if aligned:
            origin, extents = [], []
            for a in range(d):
                half = half_t if a != m else max(half_t, reach + 2 * s)
                o, e = _aligned(-half, half - 1, s)
                origin.append(o)
                extents.append(e)
            periodic = tuple(a != m for a in range(d))
            f = sample(tset, lattice, eps, extents, periodic, origin)
            measure = float(np.prod([extents[a] * eps for a in range(d) if a != m])) if d > 1 else 1.0
            E = energy(f, p, method)
            extras = {"window": list(extents), "interface_measure": measure}
            bound_ref = E
        else:
            tang = sum(abs(n[a]) for a in range(d) if a != m)
            half_m = math.ceil((tang * half_t + reach) / abs(n[m])) + s
            halves = [half_t if a != m else half_m for a in range(d)]
            origin, extents = [], []
            for a in range(d):
                o, e = _aligned(-halves[a] - reach - 1, halves[a] + reach, s)
                origin.append(o)
                extents.append(e)
            f = sample(tset, lattice, eps, extents, "restricted", origin)
            lo = np.array([(-hv - 0.5) * eps for hv in halves])
            hi = np.array([(hv - 0.5) * eps for hv in halves])
            measure = float(np.prod([2 * halves[a] * eps for a in range(d) if a != m])) / abs(n[m])
            pl = EnergyParams(eps, eta, k, region=(lo, hi))
            E = energy(f, pl, method)
            bound_ref = energy(f, p, method)
            extras = {"window": list(extents), "interface_measure": measure, "window_energy": bound_ref}
        if line_bound:
            lb = line_jump_bound(f, p)
            extras["line_jump_bound"] = lb
            extras["line_bound_ok"] = bool(lb <= bound_ref)
        cg = classify(f, cgp)
        extras.update(_coarse_entries(cg))
        centers = _cube_centers(cg, eps)
        inside = tset.indicator(centers, centers / eps)
        k1 = cg.labels == Label.PHASE1
        bad = k1 != inside
        depth = np.abs(centers @ n) / cg.cube_length
        extras["k1_mismatch_layers"] = float(np.max(depth[bad])) if bad.any() else 0.0
        normalized = E / measure
        rel = (normalized - target) / target if target else normalized
        records.append(StepRecord(eps, eta, E, normalized, target, rel, cg.n_mixed,
                                  cg.mixed_measure, cg.k1_perimeter, extras))
    rep = ConvergenceReport(
        "halfspace", target, source, records,
        params={"nu": n.tolist(), "delta": delta, "window": L, "rule": schedule.rule,
                "kernel": k.kind, "dim": d, "method": method},
    )
    rep.rate = _maybe_rate(rep)
    return rep


def polytope_experiment(
    k: Kernel,
    A: Polytope,
    schedule: Schedule,
    delta: float = 0.5,
    window=None,
    method: str = "fft",
    quadrature: Optional[QuadratureSpec] = None,
) -> ConvergenceReport:
    """Total energy of ``chi_A`` samples against ``sum_faces area * phi_a(normal)``.

    The window is periodic with a margin of at least ``eta + support * eta``
    around ``A``, so no interacting pair wraps across a nonzero site.
    """
    d = k.dim
    if A.dim != d:
        raise ValueError("polytope and kernel dimensions differ")
    faces, blo, bhi = polytope_faces(A)
    perimeter = float(sum(a for a, _ in faces))
    if k.radial and k.closed_form_sigma() is not None:
        target, source = k.closed_form_sigma() * perimeter, "closed-form"
    else:
        target = float(sum(a * phi(k, nrm, quadrature) for a, nrm in faces))
        source = "quadrature"
    lattice = PeriodicLattice.cubic(d)
    records = []
    for eps, eta in schedule:
        p = EnergyParams(eps, eta, k)
        cgp = CoarseGrainParams.from_energy(p, delta)
        s = cgp.side
        margin = eta + k.support_radius * eta
        if window is not None:
            wlo, whi = (np.asarray(w, dtype=float).reshape(-1) for w in window)
            if np.any(blo - wlo < margin) or np.any(whi - bhi < margin):
                raise ValueError(f"window leaves less than the required margin {margin:g} around A")
            lo_c = np.ceil(wlo / eps).astype(int)
            hi_c = np.floor(whi / eps).astype(int)
        else:
            mc = math.ceil(margin / eps) + 1
            lo_c = np.floor(blo / eps).astype(int) - mc
            hi_c = np.ceil(bhi / eps).astype(int) + mc
        origin, extents = zip(*(_aligned(int(a), int(b), s) for a, b in zip(lo_c, hi_c)))
        f = sample(A, lattice, eps, extents, "periodic", origin)
        E = energy(f, p, method)
        cg = classify(f, cgp)
        extras = {"window": list(extents), "perimeter": perimeter}
        extras.update(_coarse_entries(cg))
        normalized = E / perimeter if perimeter else E
        rel = (E - target) / target if target else E
        records.append(StepRecord(eps, eta, E, normalized, target, rel, cg.n_mixed,
                                  cg.mixed_measure, cg.k1_perimeter, extras))
    rep = ConvergenceReport(
        "polytope", target, source, records,
        params={"delta": delta, "rule": schedule.rule, "kernel": k.kind, "dim": d,
                "faces": [[a, nrm.tolist()] for a, nrm in faces], "method": method},
    )
    rep.rate = _maybe_rate(rep)
    return rep


def perforation_counterexample(
    N: int,
    d: int,
    schedule: Schedule,
    kernel: Optional[Kernel] = None,
    boxes_per_side: int = 2,
    side: float = 1.0,
    delta: Optional[float] = None,
    method: str = "fft",
) -> ConvergenceReport:
    """Zero-energy fields whose weak limit is the constant ``1 - 1/N^d``.

    Coefficients vanish on pairs touching ``N Z^d`` and ``u`` is 0 exactly
    there. Records carry the masked energy (0), the unmasked energy, the exact
    box averages and the coarse-grain labels.
    """
    k = kernel or Kernel.ball(d)
    if k.dim != d:
        raise ValueError("kernel dimension differs from d")
    expected = 1 - Fraction(1, N ** d)
    if delta is None:
        delta = (1 + 2 / N ** d) / 2
    mask = CoefficientMask("perforation", N)
    lattice = PeriodicLattice.cubic(d)
    block = N * boxes_per_side
    records = []
    for eps, eta in schedule:
        n = block * math.ceil(side / (eps * block))
        f = sample(Perforated(N), lattice, eps, n, "periodic")
        masked = EnergyParams(eps, eta, k, mask=mask)
        E = energy(f, masked, method)
        E_full = energy(f, EnergyParams(eps, eta, k), method)
        w = n // boxes_per_side
        averages = []
        for j in np.ndindex(*(boxes_per_side,) * d):
            lo = np.array([(o + jj * w - 0.5) * eps for o, jj in zip(f.origin, j)])
            hi = lo + w * eps
            averages.append(window_fraction(f, (lo, hi)))
        cg = classify(f, CoarseGrainParams.from_energy(masked, delta))
        extras = {
            "unmasked_energy": E_full,
            "box_averages": averages,
            "expected_average": expected,
            "averages_exact": all(a == expected for a in averages),
            "all_phase1": cg.n_phase1 == cg.labels.size,
            "window": n,
        }
        extras.update(_coarse_entries(cg))
        records.append(StepRecord(eps, eta, E, E, 0.0, E, cg.n_mixed, cg.mixed_measure,
                                  cg.k1_perimeter, extras))
    return ConvergenceReport(
        "counterexample", 0.0, "exact", records,
        params={"N": N, "dim": d, "delta": delta, "boxes_per_side": boxes_per_side,
                "kernel": k.kind, "rule": schedule.rule, "method": method},
    )


def fit_rate(report_or_errors, h=None) -> float:
    """Least-squares slope of ``log|error|`` against ``log(eps/eta)``."""
    if isinstance(report_or_errors, ConvergenceReport):
        errs = report_or_errors.rel_errors
        h = np.array([r.eps / r.eta for r in report_or_errors.records])
    else:
        errs = np.asarray(report_or_errors, dtype=float)
        h = np.asarray(h, dtype=float)
    errs = np.abs(errs)
    ok = errs > 0
    if np.count_nonzero(ok) < 3:
        raise ValueError("need at least three steps with nonzero error")
    slope, _ = np.polyfit(np.log(h[ok]), np.log(errs[ok]), 1)
    return float(slope)


def _maybe_rate(rep: ConvergenceReport) -> Optional[float]:
    try:
        return fit_rate(rep)
    except ValueError:
        return None
