import contextlib
import time

import pytest

_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES] = []


class _Check:
    def __init__(self):
        self.ok = False
        self.detail = ""
        self.advisory = False


@pytest.fixture
def criterion(request):
    """Context manager that records one PASS/FAIL line per acceptance criterion."""
    lines = request.config.stash[_LINES]

    @contextlib.contextmanager
    def record(number, title, limit=None):
        c = _Check()
        start = time.perf_counter()
        try:
            yield c
        except BaseException as exc:
            c.ok = False
            c.detail = f"{c.detail} error: {type(exc).__name__}: {exc}".strip()
            raise
        finally:
            elapsed = time.perf_counter() - start
            if limit is not None and elapsed > limit:
                c.ok = False
                c.detail += f" (took {elapsed:.1f} s, limit {limit} s)"
            status = "PASS" if c.ok else ("ADVISORY" if c.advisory else "FAIL")
            line = f"criterion {number:>2} {status:<8} {title}: {c.detail} [{elapsed:.2f} s]"
            lines.append(line)
            print(line)
        if not c.ok and not c.advisory:
            pytest.fail(line)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash[_LINES]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
