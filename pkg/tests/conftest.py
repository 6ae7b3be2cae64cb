import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from nilops.catalog import n_module, random_module, rp2  # noqa: E402
from nilops.gmod import free_unstable  # noqa: E402

WINDOW = 32


def module_set(window: int = WINDOW, randoms: int = 20, seed: int = 2024):
    """F(1), F(2), RP^2, N(2) and a batch of random 6-dimensional modules."""
    mods = [("F(1)", free_unstable(1, window)), ("F(2)", free_unstable(2, window)),
            ("RP2", rp2()), ("N(2)", n_module(2))]
    rng = random.Random(seed)
    for k in range(randoms):
        mods.append((f"random{k}", random_module(rng, 6)))
    return mods


@pytest.fixture(scope="session")
def modules():
    return module_set()


_criteria: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, text): acceptance criterion covered by the test")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    crit = getattr(report, "criterion", None)
    if crit is not None:
        _criteria.setdefault(crit[0], []).append((crit[1], report.outcome))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        rep.criterion = (mark.args[0], mark.args[1] if len(mark.args) > 1 else item.name)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        results = _criteria[n]
        ok = all(o == "passed" for _, o in results)
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {results[0][0]}")
