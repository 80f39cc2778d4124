"""Closed-form reference for the Lorentzian datum u0 = 2/(x^2 + 1) with eps = 1/M.

For p = i, c = -i and eps = 1/M the weight is single valued,

    W(z) = exp(-i M (z - x)^2 / (4 t)) (z + i)^M / (z - i)^M,

so the loop row of B is a pair of residues at z = i, written with Hermite
polynomials.  With ``P_k = exp(i M (x - i)^2 / (4 t)) B[1, k-1]`` (polynomials
in x) the tau function reduces to

    det B_bar = P_2 I^(M) - P_1 I^(M+1),
    I^(P) = int_{C0} exp(-i M (z - x)^2 / (4 t)) (z + i)^M / (z - i)^P dz,

and u = -(2/M) Im d/dx log det B_bar.  The x-derivative is exact:
``d/dx P_k = (i M / 2t) P_{k-1}`` and
``d/dx I^(P) = (i M / 2t) (I^(P-1) + (i - x) I^(P))``.

The C0 integrals are evaluated with scipy's adaptive quadrature on a path of
straight pieces chosen independently of the solver's contours, so this
module is a second implementation rather than a restatement of the first.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .special import hermite_H

_ROT_UP_LEFT = cmath.exp(0.75j * math.pi)
_ROT_DOWN_RIGHT = cmath.exp(-0.25j * math.pi)


def _check_args(M: int, t: float):
    if int(M) != M or M < 1:
        raise ValueError(f"M must be a positive integer, got {M!r}")
    if not t > 0:
        raise ValueError(f"t must be positive, got {t!r}")


def residue_polynomial(M: int, k: int, t: float, x: float) -> complex:
    """P_k(t, x) = exp(i M (x - i)^2 / (4 t)) times the loop integral of W / (z - i)^(k - 1).

    Valid for any integer k; the sum is empty (value 0) when M + k - 2 < 0.
    """
    _check_args(M, t)
    sigma = math.sqrt(M / (4.0 * t))
    root = cmath.exp(0.25j * math.pi) * sigma
    top = M + k - 2
    total = 0j
    for n in range(max(0, k - 2), top + 1):
        h = hermite_H(n, root * (1j - x), n_max=max(64, top))
        coef = (-root) ** n * (2j) ** (n + 2 - k)
        total += coef * h / (math.factorial(n) * math.factorial(top - n) * math.factorial(n + 2 - k))
    return 2j * math.pi * math.factorial(M) * total


def loop_row(M: int, t: float, x: float) -> tuple[complex, complex]:
    """(B_21, B_22): the loop-row entries of B for the Lorentzian datum, by residues."""
    gauss = cmath.exp(-1j * M * (x - 1j) ** 2 / (4.0 * t))
    return residue_polynomial(M, 1, t, x) * gauss, residue_polynomial(M, 2, t, x) * gauss


def _through_path_integral(f, x: float, reach: float, rel_tol: float) -> complex:
    """Integrate ``f`` along straight pieces from the upper-left valley to the lower-right one.

    The path comes down the ray of angle 3 pi/4 to the real point
    c = min(x, 0) - 1, follows the real axis (where the Gaussian has unit
    modulus) to x, and leaves along the steepest-descent ray of angle -pi/4.
    It passes below z = i.
    """
    c = min(float(x), 0.0) - 1.0
    opts = dict(epsabs=0.0, epsrel=rel_tol, limit=2000, complex_func=True)
    with warnings.catch_warnings():
        # quadpack flags roundoff once the requested tolerance meets double precision
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        a, _ = integrate.quad(lambda s: f(c + _ROT_UP_LEFT * s) * _ROT_UP_LEFT, 0.0, reach, **opts)
        b = integrate.quad(lambda s: f(complex(s, 0.0)), c, x, **opts)[0] if x > c else 0j
        d, _ = integrate.quad(lambda s: f(x + _ROT_DOWN_RIGHT * s) * _ROT_DOWN_RIGHT, 0.0, reach, **opts)
    return -a + b + d


def _reach(M: int, t: float, x: float) -> float:
    # exp(-M s^2 / (4t)) bounds the Gaussian along both rays; e^-110 is far below double precision
    return math.sqrt(4.0 * t * 110.0 / M) + 2.0 * abs(x) + 4.0


def c0_integral(M: int, P: int, t: float, x: float, rel_tol: float = 1e-13) -> complex:
    """I^(P) along an explicit C0 by scipy quadrature (independent of the solver's contours)."""
    _check_args(M, t)

    def f(z):
        return cmath.exp(-1j * M * (z - x) ** 2 / (4.0 * t)) * (z + 1j) ** M / (z - 1j) ** P

    return _through_path_integral(f, x, _reach(M, t, x), rel_tol)


@dataclass(frozen=True)
class MSolitonValue:
    t: float
    x: float
    M: int
    tau: complex
    tau_x: complex
    u: float


def m_soliton_oracle(M: int, t: float, x: float) -> MSolitonValue:
    """u(t, x) for u0 = 2/(x^2+1), eps = 1/M, from the two-integral tau function."""
    _check_args(M, t)
    k = 1j * M / (2.0 * t)
    p0, p1, p2 = (residue_polynomial(M, j, t, x) for j in (0, 1, 2))
    i_lo, i_mid, i_hi = (c0_integral(M, P, t, x) for P in (M - 1, M, M + 1))
    tau = p2 * i_mid - p1 * i_hi
    d_mid = k * (i_lo + (1j - x) * i_mid)
    d_hi = k * (i_mid + (1j - x) * i_hi)
    tau_x = k * p1 * i_mid + p2 * d_mid - k * p0 * i_hi - p1 * d_hi
    u = -(2.0 / M) * (tau_x / tau).imag
    return MSolitonValue(float(t), float(x), int(M), tau, tau_x, float(u))


def gaussian_integral(t: float) -> complex:
    """int_{C0} exp(-i (z - x)^2 / (4t)) dz = exp(-i pi/4) 2 sqrt(pi t), independent of x."""
    return cmath.exp(-0.25j * math.pi) * 2.0 * math.sqrt(math.pi * t)


def lowered_integrals(t: float, x: float, top: int) -> list[complex]:
    """I_0 .. I_top for M = 1, I_P = int_{C0} exp(-i (z-x)^2/(4t)) (z - i)^(-P) dz.

    I_0 is the Gaussian integral, I_1 comes from quadrature and the rest from
    the integration-by-parts recursion
    ``I_P = i (x - i) I_{P-1} / (2 (P-1) t) - i I_{P-2} / (2 (P-1) t)``.
    """
    if not t > 0:
        raise ValueError(f"t must be positive, got {t!r}")

    def f(z):
        return cmath.exp(-1j * (z - x) ** 2 / (4.0 * t)) / (z - 1j)

    i1 = _through_path_integral(f, x, _reach(1, t, x), 1e-13)
    vals = [gaussian_integral(t), i1]
    for P in range(2, top + 1):
        vals.append(1j * (x - 1j) * vals[P - 1] / (2 * (P - 1) * t) - 1j * vals[P - 2] / (2 * (P - 1) * t))
    return vals


def one_soliton_reduction(t: float, x: float) -> float:
    """u for M = 1 from det B_bar = (2 pi i/t)(t - x + i) I_0 + (4 pi/t)(x - i) I_1 + 8 pi i I_2.

    Uses d/dx I_P = -P I_{P+1} and the recursion for I_2 and I_3.
    """
    i0, i1, i2, i3 = lowered_integrals(t, x, 3)
    tau = (2j * math.pi / t) * (t - x + 1j) * i0 + (4.0 * math.pi / t) * (x - 1j) * i1 + 8j * math.pi * i2
    tau_x = (-(2j * math.pi / t) * i0
             + (4.0 * math.pi / t) * i1 - (4.0 * math.pi / t) * (x - 1j) * i2
             - 16j * math.pi * i3)
    return float(-2.0 * (tau_x / tau).imag)


def soliton_exact(t, x):
    """The travelling wave 2 / ((x - t)^2 + 1)."""
    return 2.0 / ((np.asarray(x) - t) ** 2 + 1.0)
