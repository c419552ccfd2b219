import importlib.util
from pathlib import Path


def test_benchmark_smoke(capsys):
    path = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_pair_counts.py"
    spec = importlib.util.spec_from_file_location("bench_pair_counts", path)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    mod.main(["--sizes", "24", "--ratios", "4", "--repeat", "1", "--lines"])
    out = capsys.readouterr().out
    assert "NO" not in out and out.count("yes") >= 1
