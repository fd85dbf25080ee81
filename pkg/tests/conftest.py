import numpy as np
import pytest

# acceptance-criterion results, printed as one line each in the terminal summary
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance():
    def record(num, ok, detail):
        ACCEPTANCE_LINES.append((num, bool(ok), detail))

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(ACCEPTANCE_LINES):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {num:>2}: {status} - {detail}")


def make_instance(n, p, seed, support=((0, 3.0), (1, 1.5), (4, 2.0)), noise="gauss"):
    """Ad-hoc regression instance, independent of the package's generators."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, p))
    beta = np.zeros(p)
    for j, v in support:
        if j < p:
            beta[j] = v
    y = x @ beta + rng.standard_normal(n)
    if noise == "contaminated":
        gross = rng.random(n) < 0.1
        y = y + gross * rng.standard_normal(n) * 5.0
    return x, y, beta
