import numpy as np
import pytest

from bo_rational.data import validate_rational_data
from bo_rational.scattering import MINUS_SOLITON, residual_grid
from bo_rational.solver import evaluate_u_grid


@pytest.fixture(scope="session")
def soliton():
    return validate_rational_data([1j], [-1j], 1.0)


@pytest.fixture(scope="session")
def minus_soliton():
    return validate_rational_data([1j], [1j], 1.0)


@pytest.fixture(scope="session")
def two_generic():
    return validate_rational_data([0.5 + 1j, -1.0 + 0.6j], [0.3 - 0.4j, 0.2 + 0.1j], 1.0)


@pytest.fixture(scope="session")
def residual_samples():
    """Minus-soliton solves on the residual grid, computed once per t for the whole session."""
    cache = {}

    def get(t):
        if t not in cache:
            cache[t] = evaluate_u_grid(MINUS_SOLITON, [t], residual_grid(t))
        return cache[t]

    return get


def random_data(rng, n_max=3, eps_choices=(1.0, 0.5, 0.25)):
    """Random data mixing exceptional, integer-order and generic indices."""
    n = int(rng.integers(1, n_max + 1))
    eps = float(rng.choice(eps_choices))
    poles = []
    while len(poles) < n:
        p = complex(rng.uniform(-2, 2), rng.uniform(0.3, 2))
        if all(abs(p - q) > 0.4 for q in poles):
            poles.append(p)
    coeffs = []
    for _ in range(n):
        kind = rng.integers(0, 3)
        if kind == 0:
            coeffs.append(1j * eps * int(rng.integers(1, 3)))
        elif kind == 1:
            coeffs.append(-1j * eps * int(rng.integers(1, 3)))
        else:
            coeffs.append(complex(rng.normal(), rng.normal()) * 0.5)
    return validate_rational_data(poles, coeffs, eps)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
