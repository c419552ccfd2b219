"""Command-line front end.

Settings come from three layers: built-in defaults, an optional INI file
(``--config``, one section per module) and command-line flags, later layers
winning. Example config::

    [kernel]
    kind = ball
    radius = 1.0

    [gammalab]
    ratios = 16, 24, 32, 48, 64
    nu = 1, 0

    [coarsegrain]
    delta = 0.5
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import _accel, spin1
from .coarsegrain import CoarseGrainParams, classify
from .energy import CoefficientMask, EnergyParams, NumericalError, energy
from .field import (
    Ball,
    Complement,
    HalfSpace,
    PeriodicLattice,
    Perforated,
    Polytope,
    SpinField,
    Whole,
    sample,
    window_fraction,
)
from .gammalab import Schedule, halfspace_experiment, perforation_counterexample, polytope_experiment
from .kernel import Kernel, QuadratureSpec, load_table, phi

EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    kernel: str = "ball:1"
    dim: int = 2
    offsets: Optional[list] = None
    target: str = "halfspace:1,0"
    ratios: Optional[list] = None
    eps0: float = 1 / 256
    steps: int = 5
    factor: float = 2.0
    exponent: float = 0.5
    delta: Optional[float] = None
    eps: Optional[float] = None
    eta: Optional[float] = None
    nu: Optional[list] = None
    N: int = 2
    window: Optional[list] = None
    side: Optional[float] = None
    box: Optional[str] = None
    boundary: str = "periodic"
    method: str = "fft"
    mask: str = "full"
    directions: int = 16
    quad_h: Optional[float] = None
    line_bound: bool = True
    input: Optional[str] = None
    output: Optional[str] = None
    out: str = "latgamma-out"
    seed: int = 0
    threads: Optional[int] = None


# config file key -> RunConfig field, per section
_SECTIONS = {
    "kernel": {"kind": "kernel", "descriptor": "kernel", "dim": "dim"},
    "field": {
        "dim": "dim", "eps": "eps", "window": "window", "boundary": "boundary",
        "offsets": "offsets", "target": "target", "input": "input", "output": "output",
    },
    "energy": {"eta": "eta", "method": "method", "mask": "mask", "n": "N"},
    "coarsegrain": {"delta": "delta"},
    "gammalab": {
        "ratios": "ratios", "eps0": "eps0", "steps": "steps", "factor": "factor",
        "exponent": "exponent", "nu": "nu", "box": "box", "n": "N", "d": "dim",
        "side": "side", "line_bound": "line_bound", "directions": "directions",
        "quad_h": "quad_h",
    },
    "run": {"out": "out", "seed": "seed", "threads": "threads"},
}

_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _floats(text) -> list:
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    return [float(x) for x in str(text).replace(";", ",").split(",") if x.strip()]


def _convert(name: str, value):
    if value is None:
        return None
    try:
        if name in ("nu", "ratios"):
            return _floats(value)
        if name == "window":
            return [int(x) for x in _floats(value)]
        if name == "offsets":
            rows = [r for r in str(value).split(";") if r.strip()]
            return [_floats(r) for r in rows]
        if name == "line_bound":
            if isinstance(value, bool):
                return value
            v = str(value).strip().lower()
            if v not in ("1", "0", "true", "false", "yes", "no", "on", "off"):
                raise ValueError(value)
            return v in ("1", "true", "yes", "on")
        t = _TYPES[name]
        if "int" in str(t):
            return int(value)
        if "float" in str(t):
            return float(value)
        return str(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {name}: {value!r}") from exc


def read_config(path, command: str) -> RunConfig:
    """Load an INI file into a :class:`RunConfig` for ``command``."""
    cp = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    cfg = RunConfig(command=command)
    updates = {}
    kernel_keys = {}
    for section in cp.sections():
        keys = _SECTIONS.get(section.lower())
        if keys is None:
            raise ConfigError(f"unknown config section [{section}]")
        for key, value in cp.items(section):
            if section.lower() == "kernel" and key in ("radius", "rate", "cutoff", "table"):
                kernel_keys[key] = value
                continue
            if key not in keys:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            updates[keys[key]] = _convert(keys[key], value)
    if kernel_keys or "kernel" in updates:
        updates["kernel"] = _kernel_descriptor(updates.get("kernel", "ball"), kernel_keys)
    return replace(cfg, **updates)


def _kernel_descriptor(kind: str, keys: dict) -> str:
    if ":" in kind:
        return kind
    if kind == "ball":
        return f"ball:{keys.get('radius', 1.0)}"
    if kind in ("exp", "exponential"):
        if "cutoff" not in keys or "rate" not in keys:
            raise ConfigError("exponential kernel needs rate and cutoff")
        return f"exp:{keys['rate']}:{keys['cutoff']}"
    if kind in ("table", "tabulated"):
        if "table" not in keys:
            raise ConfigError("tabulated kernel needs a table path")
        return f"table:{keys['table']}"
    raise ConfigError(f"unknown kernel kind {kind!r}")


def build_kernel(desc: str, dim: int) -> Kernel:
    """``ball:r``, ``exp:rate:cutoff`` or ``table:path``."""
    kind, _, rest = desc.partition(":")
    try:
        if kind == "ball":
            return Kernel.ball(dim, float(rest) if rest else 1.0)
        if kind in ("exp", "exponential"):
            rate, cutoff = rest.split(":")
            return Kernel.exponential(dim, float(rate), float(cutoff))
        if kind in ("table", "tabulated"):
            r, v = load_table(rest)
            return Kernel.tabulated(dim, r, v)
    except OSError:
        raise
    except ValueError as exc:
        raise ConfigError(f"bad kernel descriptor {desc!r}: {exc}") from exc
    raise ConfigError(f"unknown kernel kind in {desc!r}")


def build_target(desc: str):
    """Target set descriptors for ``field gen``.

    ``halfspace:n1,n2[:offset]``, ``ball:c1,c2:r``, ``box:lo1,lo2:hi1,hi2``,
    ``perforated:N``, ``whole``, ``empty`` and ``random[:p]`` (Bernoulli sites).
    """
    kind, *args = desc.split(":")
    try:
        if kind == "halfspace":
            n = np.array(_floats(args[0]))
            off = float(args[1]) if len(args) > 1 else 0.0
            return HalfSpace(tuple(n / np.linalg.norm(n)), off)
        if kind == "ball":
            return Ball(tuple(_floats(args[0])), float(args[1]))
        if kind == "box":
            return Polytope.box(_floats(args[0]), _floats(args[1]))
        if kind == "perforated":
            return Perforated(int(args[0]))
        if kind == "whole":
            return Whole()
        if kind == "empty":
            return Complement(Whole())
        if kind == "random":
            return float(args[0]) if args else 0.5
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"bad target descriptor {desc!r}") from exc
    raise ConfigError(f"unknown target kind {kind!r}")


def _schedule(cfg: RunConfig) -> Schedule:
    try:
        if cfg.ratios:
            return Schedule.from_ratios(cfg.ratios, cfg.exponent)
        return Schedule.power(cfg.eps0, cfg.steps, cfg.factor, cfg.exponent)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _lattice(cfg: RunConfig) -> PeriodicLattice:
    if cfg.offsets:
        return PeriodicLattice(cfg.offsets)
    return PeriodicLattice.cubic(cfg.dim)


def _mask(cfg: RunConfig) -> CoefficientMask:
    rule, _, arg = cfg.mask.partition(":")
    if rule == "full":
        return CoefficientMask()
    if rule == "perforation":
        return CoefficientMask("perforation", int(arg) if arg else cfg.N)
    raise ConfigError(f"unknown mask {cfg.mask!r}")


def _load_field(cfg: RunConfig) -> SpinField:
    if not cfg.input:
        raise ConfigError(f"{cfg.command} needs an input field")
    try:
        return spin1.read(cfg.input)
    except spin1.Spin1Error as exc:
        raise ConfigError(f"cannot read {cfg.input}: {exc}") from exc


def _energy_params(cfg: RunConfig, f: SpinField) -> EnergyParams:
    if cfg.eta is None:
        raise ConfigError("eta is required")
    k = build_kernel(cfg.kernel, f.dim)
    return EnergyParams(f.eps, cfg.eta, k, mask=_mask(cfg))


def _directions(d: int, n: int) -> np.ndarray:
    if d == 1:
        return np.array([[1.0], [-1.0]])
    if d == 2:
        t = 2 * np.pi * np.arange(n) / n
        return np.stack([np.cos(t), np.sin(t)], axis=1)
    # Fibonacci points on the sphere
    k = np.arange(n) + 0.5
    z = 1 - 2 * k / n
    r = np.sqrt(1 - z * z)
    t = np.pi * (1 + 5 ** 0.5) * k
    return np.stack([r * np.cos(t), r * np.sin(t), z], axis=1)


def _out(cfg: RunConfig) -> Path:
    p = Path(cfg.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _emit_report(rep, cfg: RunConfig, stem: str):
    pc, pj = rep.write(_out(cfg), stem)
    print(json.dumps({"csv": str(pc), "json": str(pj), "rate": rep.rate, "steps": len(rep.records)}))


def cmd_energy(cfg: RunConfig) -> None:
    f = _load_field(cfg)
    p = _energy_params(cfg, f)
    print("%.17g" % energy(f, p, cfg.method))


def cmd_coarse_grain(cfg: RunConfig) -> None:
    f = _load_field(cfg)
    p = _energy_params(cfg, f)
    r = classify(f, CoarseGrainParams.from_energy(p, 0.5 if cfg.delta is None else cfg.delta))
    text = r.to_json(sort_keys=True)
    (_out(cfg) / "coarse_grain.json").write_text(text + "\n", encoding="utf-8")
    print(text)


def cmd_phi(cfg: RunConfig) -> None:
    k = build_kernel(cfg.kernel, cfg.dim)
    q = QuadratureSpec(h=cfg.quad_h) if cfg.quad_h else None
    dirs = _directions(cfg.dim, cfg.directions)
    lines = [",".join([f"nu{a + 1}" for a in range(cfg.dim)] + ["phi"])]
    for nu in dirs:
        lines.append(",".join(["%.17g" % x for x in nu] + ["%.17g" % phi(k, nu, q)]))
    text = "\n".join(lines) + "\n"
    (_out(cfg) / "phi.csv").write_text(text, encoding="utf-8", newline="\n")
    sys.stdout.write(text)


def cmd_halfspace(cfg: RunConfig) -> None:
    nu = np.array(cfg.nu if cfg.nu else [1.0] + [0.0] * (cfg.dim - 1))
    if nu.size != cfg.dim:
        raise ConfigError("nu must have d components")
    nu = nu / np.linalg.norm(nu)
    k = build_kernel(cfg.kernel, cfg.dim)
    rep = halfspace_experiment(
        k, nu, _schedule(cfg), 0.5 if cfg.delta is None else cfg.delta,
        window=cfg.side, method=cfg.method, line_bound=cfg.line_bound,
    )
    _emit_report(rep, cfg, "halfspace")


def cmd_polytope(cfg: RunConfig) -> None:
    if cfg.box:
        lo, _, hi = cfg.box.partition(":")
        A = Polytope.box(_floats(lo), _floats(hi))
    else:
        A = Polytope.box([0.0] * cfg.dim, [1.0] * cfg.dim)
    if A.dim != cfg.dim:
        raise ConfigError("box dimension differs from d")
    k = build_kernel(cfg.kernel, cfg.dim)
    rep = polytope_experiment(k, A, _schedule(cfg), 0.5 if cfg.delta is None else cfg.delta,
                              method=cfg.method)
    _emit_report(rep, cfg, "polytope")


def cmd_counterexample(cfg: RunConfig) -> None:
    k = build_kernel(cfg.kernel, cfg.dim)
    rep = perforation_counterexample(cfg.N, cfg.dim, _schedule(cfg), kernel=k, delta=cfg.delta,
                                     method=cfg.method)
    _emit_report(rep, cfg, "counterexample")


def cmd_field_gen(cfg: RunConfig) -> None:
    if cfg.eps is None or not cfg.window:
        raise ConfigError("field gen needs eps and window")
    lattice = _lattice(cfg)
    d = lattice.dim
    window = cfg.window * d if len(cfg.window) == 1 else cfg.window
    rng = np.random.default_rng(cfg.seed)
    target = build_target(cfg.target)
    boundary = cfg.boundary.split(",") if "," in cfg.boundary else cfg.boundary
    if isinstance(target, float):
        proto = sample(Whole(), lattice, cfg.eps, window, boundary)
        f = proto.with_values((rng.random(proto.values.shape) < target).astype(np.uint8))
    else:
        f = sample(target, lattice, cfg.eps, window, boundary)
    path = Path(cfg.output) if cfg.output else _out(cfg) / "field.spin1"
    path.parent.mkdir(parents=True, exist_ok=True)
    spin1.write(f, path)
    print(json.dumps({"path": str(path), "n_sites": f.n_sites, "ones": int(f.values.sum())}))


def cmd_field_info(cfg: RunConfig) -> None:
    f = _load_field(cfg)
    info = {
        "dim": f.dim,
        "extents": list(f.extents),
        "offsets": f.lattice.n_offsets,
        "eps": f.eps,
        "origin": list(f.origin),
        "boundary": [("periodic" if p else "restricted") for p in f.periodic],
        "n_sites": f.n_sites,
        "ones": int(f.values.sum()),
        "fraction": str(window_fraction(f)),
    }
    if cfg.eta is not None:
        info["energy"] = energy(f, _energy_params(cfg, f), cfg.method)
    print(json.dumps(info, sort_keys=True))


COMMANDS = {
    "energy": cmd_energy,
    "coarse-grain": cmd_coarse_grain,
    "phi": cmd_phi,
    "halfspace": cmd_halfspace,
    "polytope": cmd_polytope,
    "counterexample": cmd_counterexample,
    "field gen": cmd_field_gen,
    "field info": cmd_field_info,
}


def run(cfg: RunConfig) -> int:
    """Execute one command; returns the process exit status."""
    if cfg.threads is not None:
        _accel.set_threads(cfg.threads)
    try:
        COMMANDS[cfg.command](cfg)
    except NumericalError as exc:
        return _fail(EXIT_NUMERIC, exc)
    except OSError as exc:
        return _fail(EXIT_IO, exc)
    except ValueError as exc:
        return _fail(EXIT_CONFIG, exc)
    return 0


def _fail(code: int, exc: BaseException) -> int:
    line = {"error": type(exc).__name__, "message": str(exc), "exit": code}
    print(json.dumps(line), file=sys.stderr)
    return code


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI file with per-module sections")
    p.add_argument("--out", help="output directory")
    p.add_argument("--threads", type=int, help="worker threads (default: LATGAMMA_THREADS or all cores)")
    p.add_argument("--seed", type=int, help="seed for random fields")
    p.add_argument("--kernel", help="ball:r, exp:rate:cutoff or table:path")
    p.add_argument("--d", dest="dim", type=int, help="dimension")
    p.add_argument("--eps", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--delta", type=float, help="coarse-grain threshold in (0, 1)")
    p.add_argument("--method", choices=("fft", "direct"))


def _schedule_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--ratios", help="comma-separated eta/eps values")
    p.add_argument("--eps0", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--factor", type=float)
    p.add_argument("--exponent", type=float, help="eta = eps^exponent")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="latgamma", argument_default=argparse.SUPPRESS)
    _common(parser)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        p = sub.add_parser(name, argument_default=argparse.SUPPRESS, **kw)
        _common(p)
        return p

    p = add("energy", help="evaluate the energy of a SPIN1 field")
    p.add_argument("input")
    p.add_argument("--mask", help="full or perforation:N")
    p = add("coarse-grain", help="coarse-grain a SPIN1 field, JSON output")
    p.add_argument("input")
    p = add("phi", help="tabulate the surface tension over directions")
    p.add_argument("--directions", type=int)
    p.add_argument("--quad-h", dest="quad_h", type=float)
    p = add("halfspace", help="half-space convergence run")
    _schedule_args(p)
    p.add_argument("--nu", help="normal x,y[,z]")
    p.add_argument("--side", type=float, help="physical window side (default 8 * max eta)")
    p.add_argument("--no-line-bound", dest="line_bound", action="store_false")
    p = add("polytope", help="polytope recovery run")
    _schedule_args(p)
    p.add_argument("--box", help="lo1,lo2:hi1,hi2 (default unit cube)")
    p = add("counterexample", help="perforated-coefficient counterexample")
    _schedule_args(p)
    p.add_argument("--N", type=int)
    p = add("field", help="SPIN1 field utilities")
    fsub = p.add_subparsers(dest="field_command", required=True)
    g = fsub.add_parser("gen", argument_default=argparse.SUPPRESS, help="sample a target set")
    _common(g)
    g.add_argument("--target", help="halfspace:n | ball:c:r | box:lo:hi | perforated:N | random[:p]")
    g.add_argument("--window", help="cells per axis, n or n1,n2,...")
    g.add_argument("--boundary", help="periodic, restricted, or per-axis list")
    g.add_argument("--offsets", help="lattice offsets 'x,y;x,y'")
    g.add_argument("--output", "-o")
    i = fsub.add_parser("info", argument_default=argparse.SUPPRESS, help="describe a SPIN1 field")
    _common(i)
    i.add_argument("input")
    return parser


def parse_args(argv=None) -> RunConfig:
    ns = vars(make_parser().parse_args(argv))
    command = ns.pop("command")
    if command == "field":
        command = "field " + ns.pop("field_command")
    path = ns.pop("config", None)
    cfg = read_config(path, command) if path else RunConfig(command=command)
    updates = {k: _convert(k, v) for k, v in ns.items()}
    cfg = replace(cfg, **updates)
    if cfg.threads is None and os.environ.get("LATGAMMA_THREADS"):
        cfg = replace(cfg, threads=_convert("threads", os.environ["LATGAMMA_THREADS"]))
    return cfg


def main(argv=None) -> int:
    try:
        cfg = parse_args(argv)
    except OSError as exc:
        return _fail(EXIT_IO, exc)
    except ValueError as exc:
        return _fail(EXIT_CONFIG, exc)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
