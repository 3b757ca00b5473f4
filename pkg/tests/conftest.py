"""Collects acceptance-criterion outcomes and prints one line per criterion."""

from collections import defaultdict

import pytest

_OUTCOMES: dict[tuple[str, bool], list[bool]] = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id, supplemental=False): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        key = (marker.args[0], bool(marker.kwargs.get("supplemental", False)))
        _OUTCOMES[key].append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    order = sorted(_OUTCOMES, key=lambda k: (int(k[0][1:]), k[1]))
    for cid, supplemental in order:
        results = _OUTCOMES[(cid, supplemental)]
        status = "PASS" if all(results) else "FAIL"
        tag = f"{cid} (supplemental)" if supplemental else cid
        terminalreporter.write_line(f"{tag}: {status} ({sum(results)}/{len(results)} checks)")
