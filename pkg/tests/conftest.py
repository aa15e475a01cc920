ACCEPTANCE: dict[int, tuple[bool, str, str]] = {}


def record(number: int, title: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE[number] = (passed, title, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        passed, title, detail = ACCEPTANCE[n]
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {n:2d}: {title}"
        terminalreporter.write_line(line + (f" -- {detail}" if detail else ""))
