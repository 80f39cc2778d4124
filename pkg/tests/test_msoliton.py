import cmath
import math
import warnings

import numpy as np
import pytest
from scipy import integrate

from bo_rational.data import validate_rational_data
from bo_rational.msoliton import (c0_integral, gaussian_integral, loop_row, lowered_integrals, m_soliton_oracle,
                                  one_soliton_reduction, residue_polynomial, soliton_exact)
from bo_rational.solver import solve_point


def circle_loop(M, k, t, x, radius=0.5):
    """Counterclockwise loop integral of W / (z - i)^(k-1) around i, by QUADPACK in the angle."""
    def integrand(theta):
        z = 1j + radius * cmath.exp(1j * theta)
        w = cmath.exp(-1j * M * (z - x) ** 2 / (4 * t)) * (z + 1j) ** M / (z - 1j) ** M
        return w / (z - 1j) ** (k - 1) * 1j * radius * cmath.exp(1j * theta)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(integrand, 0.0, 2 * math.pi, epsabs=0, epsrel=1e-13, limit=400, complex_func=True)
    return val


@pytest.mark.parametrize("M", [1, 2, 3])
@pytest.mark.parametrize("t,x", [(1.0, 0.0), (0.5, -1.3), (2.0, 2.5)])
def test_loop_row_matches_circle_quadrature(M, t, x):
    expected = [circle_loop(M, 1, t, x), circle_loop(M, 2, t, x)]
    np.testing.assert_allclose(loop_row(M, t, x), expected, rtol=1e-8)


def test_one_soliton_grid():
    for t in (0.5, 1.0, 2.0, 4.0):
        for x in np.linspace(-6, 6, 13):
            assert m_soliton_oracle(1, t, x).u == pytest.approx(float(soliton_exact(t, x)), abs=1e-9)
            assert one_soliton_reduction(t, x) == pytest.approx(float(soliton_exact(t, x)), abs=1e-9)


def test_two_soliton_matches_solver():
    data = validate_rational_data([1j], [-1j], 0.5)
    ref = m_soliton_oracle(2, 1.0, 0.0).u
    assert abs(solve_point(data, 1.0, 0.0).u - ref) <= 1e-6 * abs(ref)


@pytest.mark.parametrize("M,t,x", [(3, 0.7, 1.2), (5, 1.5, -0.5)])
def test_higher_orders_match_solver(M, t, x):
    data = validate_rational_data([1j], [-1j], 1.0 / M)
    ref = m_soliton_oracle(M, t, x).u
    assert abs(solve_point(data, t, x).u - ref) <= 1e-6 * abs(ref)


def test_lowered_integrals_against_direct_quadrature():
    t, x = 0.8, 0.3
    vals = lowered_integrals(t, x, 3)
    assert abs(vals[0] - gaussian_integral(t)) <= 1e-15 * abs(vals[0])
    for P in (2, 3):
        # M = 1 with the (z + i) factor removed is the same family as c0_integral at M = 0
        def f(z, P=P):
            return cmath.exp(-1j * (z - x) ** 2 / (4 * t)) / (z - 1j) ** P
        up, down = cmath.exp(0.75j * math.pi), cmath.exp(-0.25j * math.pi)
        c = min(x, 0.0) - 1.0
        opts = dict(epsabs=0, epsrel=1e-13, limit=2000, complex_func=True)
        direct = (-integrate.quad(lambda s: f(c + up * s) * up, 0, 40, **opts)[0]
                  + integrate.quad(lambda s: f(complex(s)), c, x, **opts)[0]
                  + integrate.quad(lambda s: f(x + down * s) * down, 0, 40, **opts)[0])
        assert abs(vals[P] - direct) <= 1e-10 * abs(direct)


def test_c0_integral_x_derivative_identity():
    M, t, x, step = 2, 1.0, 0.4, 1e-4
    P = M + 1
    fd = (c0_integral(M, P, t, x + step) - c0_integral(M, P, t, x - step)) / (2 * step)
    exact = (1j * M / (2 * t)) * (c0_integral(M, P - 1, t, x) + (1j - x) * c0_integral(M, P, t, x))
    assert abs(fd - exact) <= 1e-7 * abs(exact)


def test_residue_polynomial_derivative_identity():
    M, t, x, step = 3, 0.9, -0.2, 1e-5
    for k in (1, 2):
        fd = (residue_polynomial(M, k, t, x + step) - residue_polynomial(M, k, t, x - step)) / (2 * step)
        exact = (1j * M / (2 * t)) * residue_polynomial(M, k - 1, t, x)
        assert abs(fd - exact) <= 1e-7 * max(1.0, abs(exact))


def test_argument_checks():
    with pytest.raises(ValueError):
        m_soliton_oracle(0, 1.0, 0.0)
    with pytest.raises(ValueError):
        m_soliton_oracle(2, 0.0, 0.0)
