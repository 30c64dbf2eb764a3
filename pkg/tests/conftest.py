import random
import time
from contextlib import contextmanager

import pytest

from credsig import primitives as prim


@pytest.fixture
def tiny():
    return prim.group_params("tiny-test")


@pytest.fixture
def standard():
    return prim.group_params("standard")


@pytest.fixture
def rng():
    return random.Random(20230418)


def message_with_scalar(params, target, prefix=b"m"):
    """Smallest counter message whose chameleon scalar equals ``target`` (search oracle)."""
    for k in range(100_000):
        m = prefix + str(k).encode()
        if prim.message_scalar(params, m) == target:
            return m
    raise AssertionError("no message found")


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """``acceptance(n, title)`` records one PASS/FAIL line for the terminal summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    @contextmanager
    def criterion(number, title):
        note = {"detail": ""}
        start = time.perf_counter()
        try:
            yield note
        except BaseException as exc:
            first = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
            lines.append(f"FAIL criterion {number}: {title} -- {first}")
            raise
        else:
            took = time.perf_counter() - start
            lines.append(f"PASS criterion {number}: {title} -- {note['detail']} ({took:.1f} s)".replace(" --  (", " ("))
    return criterion


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
