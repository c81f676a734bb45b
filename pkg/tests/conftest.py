ACCEPTANCE_LINES = []


def record_criterion(number, title, passed, elapsed, limit, note=""):
    status = "PASS" if passed else "FAIL"
    extra = f"  ({note})" if note else ""
    ACCEPTANCE_LINES.append(
        f"criterion {number:>2}: {status}  {title}  "
        f"[{elapsed:.2f}s / limit {limit:.0f}s]{extra}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
