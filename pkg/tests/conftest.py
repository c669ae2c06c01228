import numpy as np
import pytest

from aftinfo import DiscreteCovariate, LogLogistic, Weibull

WEIBULL_GAMMAS = [0.5, 1.0, 2.0, 3.0, 5.0, 10.0]
LOGLOGISTIC_GAMMAS = [1.5, 2.0, 3.0, 5.0, 10.0]


def builtin_models():
    return [Weibull(g) for g in WEIBULL_GAMMAS] + [LogLogistic(g) for g in LOGLOGISTIC_GAMMAS]


@pytest.fixture
def bernoulli():
    return DiscreteCovariate([[0.0], [1.0]], [0.5, 0.5])


@pytest.fixture
def exponential():
    return Weibull(1.0)


def mean_se(x):
    x = np.asarray(x, dtype=float)
    return x.mean(), x.std(ddof=1) / np.sqrt(x.size)


_ACCEPTANCE: list[str] = []


@pytest.fixture
def criterion():
    """Record and print one PASS/FAIL line, then fail the test if the check failed."""

    def report(number: int, ok: bool, detail: str):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
