import sys


def pytest_terminal_summary(terminalreporter):
    """Repeats the acceptance lines (one per criterion) at the end of the run."""
    module = next((m for name, m in sys.modules.items()
                   if name.endswith("test_acceptance") and hasattr(m, "RESULTS")), None)
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(module.RESULTS):
        terminalreporter.write_line(module.RESULTS[criterion].line())
