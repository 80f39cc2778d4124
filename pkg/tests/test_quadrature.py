import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bo_rational.errors import NonIntegrableEndpoint
from bo_rational.quadrature import (Arc, QuadratureSpec, Segment, SimpleIntegrand, integrate_path,
                                    integrate_with_endpoint_singularity, split_arcs)

UP_LEFT = cmath.exp(0.75j * math.pi)
DOWN_RIGHT = cmath.exp(-0.25j * math.pi)
TIGHT = QuadratureSpec(rel_tol=1e-13)


def value(fn, pieces, spec=TIGHT, singularities=()):
    return complex(integrate_path(SimpleIntegrand(fn, singularities), pieces, spec).value[0])


def test_gaussian_along_descent_rays():
    # int exp(-i z^2 / 4) over the valley-to-valley path is exp(-i pi/4) 2 sqrt(pi)
    pieces = [Segment(30 * UP_LEFT, 0), Segment(0, 30 * DOWN_RIGHT)]
    got = value(lambda z: np.exp(-0.25j * z ** 2), pieces)
    assert abs(got - cmath.exp(-0.25j * math.pi) * 2 * math.sqrt(math.pi)) <= 1e-12


@pytest.mark.parametrize("power,expected", [(1, 2j * math.pi), (2, 0), (3, 0)])
def test_cauchy_on_closed_circle(power, expected):
    circle = [Arc(0.3 + 0.2j, 0.7, 0.0, 2 * math.pi)]
    got = value(lambda z: 1.0 / (z - (0.3 + 0.2j)) ** power, circle, singularities=[0.3 + 0.2j])
    assert abs(got - expected) <= 1e-12


def test_exponential_on_ray_into_pole():
    # e^{-i z} decays straight down, so the ray from -i infinity up to i gives i e
    ray = [Segment(1j - 60j, 1j)]
    got = value(lambda z: np.exp(-1j * z), ray)
    assert abs(got - 1j * math.e) <= 1e-11


def test_endpoint_square_root_singularity():
    # int_0^1 s^(-1/2) ds = 2, walked from 1 down to the singular end
    integrand = SimpleIntegrand(lambda z: 1.0 / np.sqrt(z))
    res = integrate_with_endpoint_singularity(integrand, [Segment(1, 0)], -0.5, QuadratureSpec())
    assert abs(res.value[0] + 2.0) <= 1e-10
    assert not res.tolerance_not_met


def test_endpoint_routine_matches_plain_for_smooth_end():
    fn = lambda z: np.exp(z) * np.cos(3 * z)
    pieces = [Segment(-1, 0.5j), Segment(0.5j, 1 + 1j)]
    plain = value(fn, pieces)
    graded = integrate_with_endpoint_singularity(SimpleIntegrand(fn), pieces, 0.0, TIGHT).value[0]
    assert abs(plain - graded) <= 1e-12 * abs(plain)


def test_nonintegrable_endpoint_rejected():
    with pytest.raises(NonIntegrableEndpoint):
        integrate_with_endpoint_singularity(SimpleIntegrand(lambda z: z), [Segment(0, 1)], -1.2)


def test_split_arcs_preserves_the_integral():
    arc = Arc(0.0, 2.0, 0.0, 1.8 * math.pi)
    parts = split_arcs([arc])
    assert len(parts) == 4
    fn = lambda z: np.exp(0.5j * z) / (z - 0.1)
    assert abs(value(fn, [arc]) - value(fn, parts)) <= 1e-12


def test_huge_weight_kept_in_scale():
    class Big:
        n_components = 1
        singularities = ()

        def log_weight(self, z):
            return np.full(np.shape(z), 800.0 + 0j)

        def dlog_weight(self, z):
            return np.zeros(np.shape(z), dtype=complex)

        def factors(self, z):
            return np.ones((1, np.size(z)), dtype=complex)

    res = integrate_path(Big(), [Segment(0, 2)], TIGHT)
    assert abs(res.mantissa[0] * math.exp(res.scale - 800.0) - 2.0) <= 1e-12


coeff = st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False)


@settings(max_examples=25, deadline=None)
@given(a=coeff, b=coeff, end=coeff)
def test_linearity_and_orientation(a, b, end):
    f = lambda z: np.exp(0.3 * z)
    g = lambda z: 1.0 / (z - 5.0)
    pieces = [Segment(-1 - 1j, 0.2j), Segment(0.2j, end)]
    combo = value(lambda z: a * f(z) + b * g(z), pieces)
    separate = a * value(f, pieces) + b * value(g, pieces)
    assert abs(combo - separate) <= 1e-10 * (1 + abs(a) + abs(b))
    back = [p.reversed() for p in reversed(pieces)]
    assert abs(value(f, back) + value(f, pieces)) <= 1e-10 * (1 + abs(value(f, pieces)))
