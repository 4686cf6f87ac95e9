from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "numeric", deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("numeric")

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def zeros_path() -> Path:
    return FIXTURES / "zeta_zeros_100.txt"


@pytest.fixture(scope="session")
def zero_table(zeros_path):
    from holoflow.xi_newton import load_zeros

    return load_zeros(zeros_path)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            lines += [v for k, v in getattr(rep, "user_properties", []) if k == "acceptance"]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
