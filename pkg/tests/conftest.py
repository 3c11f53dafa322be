"""Per-criterion summary for the acceptance suite.

Tests carry ``@pytest.mark.acceptance(number, title)``; a criterion passes
when every test carrying its number passed. Tests may attach a one-line
measurement with ``record_property("detail", ...)``.
"""

import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_results: dict[int, dict] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    entry = _results.setdefault(number, {"title": title, "states": [], "details": []})
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        if hasattr(rep, "wasxfail"):
            state = "xfail" if rep.skipped else "xpass"
        elif rep.passed:
            state = "pass"
        elif rep.skipped:
            state = "skip"
        else:
            state = "fail"
        entry["states"].append(state)
        entry["details"] += [v for k, v in rep.user_properties if k == "detail"]


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_results):
        e = _results[number]
        states = set(e["states"])
        if states == {"pass"}:
            verdict = "PASS"
        elif "fail" in states or "xpass" in states:
            verdict = "FAIL"
        elif "xfail" in states:
            verdict = "FAIL (known, marked xfail)"
        else:
            verdict = "NOT RUN"
        detail = "; ".join(e["details"])
        tr.write_line(f"criterion {number:>2}  {verdict:<26} {e['title']}" + (f"  [{detail}]" if detail else ""))
