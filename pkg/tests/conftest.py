# filled by test_acceptance: criterion number -> (passed, title, note)
CRITERIA: dict[int, tuple[bool, str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        passed, title, note = CRITERIA[n]
        line = f"{'PASS' if passed else 'FAIL'} criterion {n}: {title}"
        terminalreporter.write_line(line + (f" ({note})" if note else ""))
