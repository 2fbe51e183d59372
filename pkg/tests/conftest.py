import pytest

from twomembranes import _kernels


@pytest.fixture(scope="session", autouse=True)
def compiled_kernels():
    # one-time jit compile (disk-cached afterwards) so test timings stay honest
    _kernels.warmup()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    lines = []
    for outcome, label in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::" in nodeid and getattr(rep, "when", "call") in ("call", "setup"):
                name = nodeid.split("::")[-1]
                if name != "compiled_kernels":
                    lines.append((name, label))
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, label in sorted(set(lines)):
            terminalreporter.write_line(f"{label}  {name}")
