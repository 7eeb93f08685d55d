import numpy as np
import pytest

from hrvann.ingest import RRSeries


def rr_from_function(fn, duration_s):
    """Beats whose interval equals fn(onset time), until duration_s is reached."""
    out, t = [], 0.0
    while t < duration_s:
        v = fn(t)
        out.append(v)
        t += v / 1000.0
    return RRSeries(np.array(out))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)



def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    props = dict(report.user_properties)
    if "criterion" in props:
        _CRITERIA.append((props["criterion"], report.outcome, props.get("detail", "")))


_CRITERIA = []


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n, outcome, detail in sorted(_CRITERIA):
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {n:2d}: {verdict}  {detail}")
