import sys


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for _, (_, line) in sorted(results.items()):
        terminalreporter.write_line(line)
    n_ok = sum(ok for ok, _ in results.values())
    terminalreporter.write_line(f"{n_ok}/{len(results)} criteria pass")
