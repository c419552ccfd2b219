import contextlib

import pytest

# criterion number -> (title, passed, detail)
GATE = {}


class Gate:
    def __init__(self, number, title):
        self.number = number
        self.title = title
        self.detail = ""

    @contextlib.contextmanager
    def check(self):
        try:
            yield self
        except BaseException as exc:
            self._record(False, self.detail or f"{type(exc).__name__}: {exc}".splitlines()[0])
            raise
        self._record(True, self.detail)

    def _record(self, ok, detail):
        # parametrized criteria pass only if every case passes
        _, prev_ok, prev_detail = GATE.get(self.number, (None, True, ""))
        detail = "; ".join(x for x in (prev_detail, detail) if x)
        GATE[self.number] = (self.title, prev_ok and ok, detail)


@pytest.fixture
def gate():
    return Gate


def pytest_terminal_summary(terminalreporter):
    if not GATE:
        return
    tr = terminalreporter
    tr.section("acceptance")
    for n in sorted(GATE):
        title, ok, detail = GATE[n]
        line = f"[{'PASS' if ok else 'FAIL'}] {n:2d}. {title}"
        if detail:
            line += f"  ({detail})"
        tr.write_line(line)
