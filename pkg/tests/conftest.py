from fractions import Fraction

import pytest

from crlab.kernels import Poly2, ReinhardtProfile, monomial_norms


def perturbed(delta) -> ReinhardtProfile:
    return ReinhardtProfile(Poly2({(0, 0): 1, (1, 0): -1, (0, 1): -1, (1, 1): -Fraction(delta)}))


@pytest.fixture(scope="session")
def ball_table():
    return monomial_norms(ReinhardtProfile.ball(), 400, 1e-12)


@pytest.fixture(scope="session")
def perturbed_table():
    return monomial_norms(perturbed("0.1"), 300)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
