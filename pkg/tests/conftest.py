import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from sepdistill.states import Family, spec_for

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def thm1_sep_specs(d_max=6):
    return [spec_for(Family.THM1_SEP, d, k1) for d in range(2, d_max + 1) for k1 in range(1, d)]


def thm2_specs(d_max=5):
    out = []
    for d in range(2, d_max + 1):
        out += [(Family.THM2_I, spec_for(Family.THM2_I, d, 0, k2)) for k2 in range(1, d)]
        out += [(Family.THM2_II, spec_for(Family.THM2_II, d, k1, k2))
                for k1 in range(1, d) for k2 in range(1, d - k1)]
    return out


def basis(n, i):
    v = np.zeros(n, dtype=complex)
    v[i] = 1
    return v


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::test_criterion_" not in nodeid or rep.when not in ("call", "setup"):
                continue
            if status == "passed" and rep.when != "call":
                continue
            name = nodeid.split("::test_criterion_")[1]
            lines.append((int(name.split("_")[0]), "PASS" if status == "passed" else "FAIL", name))
    if lines:
        terminalreporter.section("acceptance criteria")
        for num, verdict, name in sorted(lines):
            terminalreporter.write_line(f"criterion {num}: {verdict}  ({name})")
