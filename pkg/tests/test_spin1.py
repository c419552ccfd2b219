import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latgamma import spin1
from latgamma.field import PeriodicLattice, SpinField


def field_strategy():
    @st.composite
    def build(draw):
        d = draw(st.integers(1, 3))
        ext = tuple(draw(st.lists(st.integers(1, 5), min_size=d, max_size=d)))
        m = draw(st.integers(1, 2))
        offsets = [[0.0] * d] if m == 1 else [[0.0] * d, [0.5] * d]
        bits = draw(st.lists(st.integers(0, 1), min_size=int(np.prod(ext)) * m, max_size=int(np.prod(ext)) * m))
        vals = np.array(bits, dtype=np.uint8).reshape(ext + (m,))
        eps = draw(st.floats(1e-6, 10.0, allow_nan=False))
        origin = tuple(draw(st.lists(st.integers(-50, 50), min_size=d, max_size=d)))
        periodic = tuple(draw(st.lists(st.booleans(), min_size=d, max_size=d)))
        return SpinField(PeriodicLattice(offsets), eps, origin, vals, periodic)

    return build()


@settings(max_examples=60, deadline=None)
@given(field_strategy())
def test_roundtrip_exact(f):
    g = spin1.loads(spin1.dumps(f))
    assert g.lattice == f.lattice
    assert g.eps == f.eps
    assert g.origin == f.origin
    assert g.periodic == f.periodic
    assert np.array_equal(g.values, f.values)
    assert spin1.dumps(g) == spin1.dumps(f)


def test_layout():
    f = SpinField.from_array(np.array([[0, 1, 1], [1, 0, 0]]), eps=0.5, origin=(0, -1),
                             boundary=["restricted", "periodic"])
    text = spin1.dumps(f)
    assert text.splitlines() == [
        "SPIN1", "d 2", "window 2 3", "origin 0 -1", "eps 0.5",
        "boundary restricted periodic", "offsets 1", "0.0 0.0", "011", "100",
    ]


def test_file_roundtrip(tmp_path):
    f = SpinField.from_array(np.eye(4, dtype=np.uint8), eps=0.1)
    spin1.write(f, tmp_path / "f.spin1")
    g = spin1.read(tmp_path / "f.spin1")
    assert np.array_equal(g.values, f.values) and g.eps == 0.1


@pytest.mark.parametrize(
    "text",
    [
        "",
        "SPIN2\n",
        "SPIN1\nd 1\nwindow 2\norigin 0\neps 1\nboundary periodic\noffsets 1\n0.0\n012\n",
        "SPIN1\nd 1\nwindow 3\norigin 0\neps 1\nboundary periodic\noffsets 1\n0.0\n01\n",
        "SPIN1\nd 1\nwindow 2\norigin 0\neps 1\nboundary periodic\noffsets 1\n0.0\n0a\n",
        "SPIN1\nd 2\nwindow 2\norigin 0\neps 1\nboundary periodic\noffsets 1\n0.0\n01\n",
        "SPIN1\nd 1\nwindow 2\norigin 0\nepsilon 1\nboundary periodic\noffsets 1\n0.0\n01\n",
    ],
)
def test_malformed_rejected(text):
    with pytest.raises(spin1.Spin1Error):
        spin1.loads(text)
