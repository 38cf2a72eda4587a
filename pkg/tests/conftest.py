"""Shared pytest wiring: print the end-to-end scoreboard after the run."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

import _report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _report.RESULTS:
        return
    terminalreporter.section("end-to-end checks")
    for label in _report.ORDER:
        entries = _report.RESULTS.get(label)
        if not entries:
            continue
        verdict = "PASS" if all(ok for ok, _ in entries) else "FAIL"
        detail = "; ".join(text for _, text in entries)
        terminalreporter.write_line(f"{verdict}  {label:<28} {detail}")
