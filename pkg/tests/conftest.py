import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

CRITERIA = {
    1: "blocks-world plan effects and precondition failure",
    2: "figure goldens: category, LF and condition rows",
    3: "language-mode goldens",
    4: "process goldens: flight trace, dance vs scurry, asynchrony",
    5: "property suites",
    6: "permutation counts, forbidden set, separation tree",
    7: "order encoding: derivability vs separability",
    8: "no lexical LF dropped over the golden corpus",
}

_results: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion the test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _results.setdefault(marker.args[0], []).append((item.name, rep.passed))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n, title in CRITERIA.items():
        got = _results.get(n)
        if not got:
            continue
        failed = [name for name, ok in got if not ok]
        status = "PASS" if not failed else "FAIL"
        line = f"criterion {n} {status}: {title} ({len(got) - len(failed)}/{len(got)} checks)"
        if failed:
            line += " failing: " + ", ".join(failed)
        tr.write_line(line)
