"""Compare the compiled direct counts, the numpy fallback and the FFT path.

    python benchmarks/bench_pair_counts.py --sizes 64 128 256 --ratios 4 8 16

Every run checks that the three methods agree before reporting timings.
"""

import argparse
import time

import numpy as np

from latgamma import _accel, _fallback
from latgamma.energy import EnergyParams, interaction_shifts, line_jump_counts, pair_counts
from latgamma.field import HalfSpace, SpinField, sample
from latgamma.kernel import Kernel

try:
    from latgamma import _core
except ImportError:
    _core = None


def best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def direct(f, p, impl):
    (block,) = interaction_shifts(f, p)
    u = f.array.astype(np.uint8)
    ones = np.ones_like(u)
    return _accel.pair_counts(u, ones, u, ones, block.cells, f.periodic, impl=impl)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256])
    ap.add_argument("--ratios", type=float, nargs="+", default=[4, 8, 16])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--skip-fallback-above", type=int, default=200_000,
                    help="skip the numpy fallback when sites * shifts exceeds this many thousand")
    ap.add_argument("--lines", action="store_true", help="also time the line-jump counts on a half-space")
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    print(f"compiled core: {'yes' if _core is not None else 'no'}, threads: {_accel.get_threads()}")
    print(f"{'n':>6} {'R':>5} {'shifts':>7} {'cython s':>10} {'numpy s':>10} {'fft s':>10}  match")
    for n in args.sizes:
        a = (rng.random((n, n)) < 0.5).astype(np.uint8)
        f = SpinField.from_array(a, eps=1.0 / n, boundary=["periodic", "restricted"])
        for R in args.ratios:
            p = EnergyParams(1.0 / n, R / n, Kernel.ball(2))
            S = len(interaction_shifts(f, p)[0].cells)
            t_fft, c_fft = best_of(lambda: pair_counts(f, p, "fft")[0], args.repeat)
            row = [f"{n:6d}", f"{R:5g}", f"{S:7d}"]
            results = [c_fft]
            if _core is not None:
                t_c, c_c = best_of(lambda: direct(f, p, _core), args.repeat)
                row.append(f"{t_c:10.4f}")
                results.append(c_c)
            else:
                row.append(f"{'-':>10}")
            if n * n * S <= args.skip_fallback_above * 1000:
                t_n, c_n = best_of(lambda: direct(f, p, _fallback), args.repeat)
                row.append(f"{t_n:10.4f}")
                results.append(c_n)
            else:
                row.append(f"{'skipped':>10}")
            row.append(f"{t_fft:10.4f}")
            ok = all(np.array_equal(results[0], r) for r in results[1:])
            print(" ".join(row), " ", "yes" if ok else "NO")
            if not ok:
                raise SystemExit("methods disagree")

    if args.lines:
        print(f"\n{'n':>6} {'R':>5} {'cython s':>10} {'numpy s':>10}  match")
        for n in args.sizes:
            f = sample(HalfSpace((0.6, 0.8)), 2, 1.0 / n, n, "restricted", origin=(-n // 2, -n // 2))
            for R in args.ratios:
                p = EnergyParams(1.0 / n, R / n, Kernel.ball(2))
                t_n, c_n = best_of(lambda: line_jump_counts(f, p, impl=_fallback), args.repeat)
                if _core is not None:
                    t_c, c_c = best_of(lambda: line_jump_counts(f, p, impl=_core), args.repeat)
                    ok = np.array_equal(c_c, c_n)
                    print(f"{n:6d} {R:5g} {t_c:10.4f} {t_n:10.4f}  {'yes' if ok else 'NO'}")
                else:
                    print(f"{n:6d} {R:5g} {'-':>10} {t_n:10.4f}")


if __name__ == "__main__":
    main()
