import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


_ACCEPTANCE = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or rep.when not in ("setup", "call"):
        return
    if rep.when == "setup" and rep.passed:
        return
    n, title = marker.args
    _ACCEPTANCE.setdefault(n, [title, []])[1].append((item.name, rep.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        title, results = _ACCEPTANCE[n]
        failed = [name for name, o in results if o == "failed"]
        skipped = all(o == "skipped" for _, o in results)
        verdict = "SKIP" if skipped else ("FAIL" if failed else "PASS")
        line = f"criterion {n}: {verdict} ({len(results) - len(failed)}/{len(results)} checks) {title}"
        if failed:
            line += " | failed: " + ", ".join(failed)
        terminalreporter.write_line(line)
