import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE = []  # (criterion, verdict, detail) appended by test_acceptance


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, verdict, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {num}: {verdict}  {detail}")
