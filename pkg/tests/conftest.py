import re

import numpy as np
import pytest

from dnfcurio import kernels

_CRITERION = re.compile(r"test_criterion_(\d+)_")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=["python", "compiled"])
def backend(request):
    """Run a test once per kernel backend; the compiled one is skipped when not built."""
    if request.param == "compiled" and not kernels.compiled_available():
        pytest.skip("compiled core not built")
    previous = kernels.BACKEND_NAME
    kernels.use_backend(request.param)
    yield request.param
    kernels.use_backend(previous)


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion."""
    results: dict[int, list[str]] = {}
    for outcome in ("passed", "failed", "error", "skipped"):
        for rep in terminalreporter.stats.get(outcome, []):
            if getattr(rep, "when", "call") != "call" and outcome == "passed":
                continue
            m = _CRITERION.search(getattr(rep, "nodeid", ""))
            if m:
                results.setdefault(int(m.group(1)), []).append(outcome)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        outs = results[n]
        if all(o == "passed" for o in outs):
            status = "PASS"
        elif any(o in ("failed", "error") for o in outs):
            status = "FAIL"
        else:
            status = "SKIP"
        terminalreporter.write_line(f"criterion {n:2d}: {status} ({len(outs)} check{'s' if len(outs) > 1 else ''})")
