"""Rational initial data and index classification.

The initial condition is

    u0(x) = sum_n  c_n / (x - p_n) + conj(c_n) / (x - conj(p_n))

with every pole p_n strictly in the upper half-plane.  Each pole index is
classified by the value of ``i c_n / eps``: a strictly negative integer makes
the index *exceptional* (its contour ends at the pole), a nonnegative integer
M records an integer order (the integrand is single valued around the pole),
and anything else is generic.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DuplicatePole, NonpositiveEpsilon, PoleHit, PoleInLowerHalfPlane

INTEGER_TOL = 1e-12
DEFAULT_POLE_MARGIN = 1e-8


@dataclass(frozen=True)
class RationalData:
    poles: tuple
    coeffs: tuple
    epsilon: float

    @property
    def n_poles(self) -> int:
        return len(self.poles)

    @property
    def pole_array(self) -> np.ndarray:
        return np.asarray(self.poles, dtype=complex)

    @property
    def coeff_array(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=complex)

    def u0(self, z):
        """Evaluate u0 at real or complex points (vectorized)."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for p, c in zip(self.poles, self.coeffs):
            out = out + c / (z - p) + np.conj(c) / (z - np.conj(p))
        return out

    def u0_real(self, x):
        return self.u0(np.asarray(x, dtype=float)).real


@dataclass(frozen=True)
class IndexClass:
    index: int
    exceptional: bool
    integer_order: Optional[int] = None

    @property
    def generic(self) -> bool:
        return not self.exceptional and self.integer_order is None


def validate_rational_data(poles: Sequence[complex], coeffs: Sequence[complex], epsilon: float,
                           margin: float = DEFAULT_POLE_MARGIN) -> RationalData:
    poles = tuple(complex(p) for p in poles)
    coeffs = tuple(complex(c) for c in coeffs)
    if not poles:
        raise ValueError("at least one pole is required")
    if len(poles) != len(coeffs):
        raise ValueError(f"{len(poles)} poles but {len(coeffs)} coefficients")
    epsilon = float(epsilon)
    if not epsilon > 0:
        raise NonpositiveEpsilon(f"epsilon must be positive, got {epsilon!r}")
    for p in poles:
        if not p.imag > margin:
            raise PoleInLowerHalfPlane(f"pole {p} has Im(p) <= {margin}")
    for i in range(len(poles)):
        for j in range(i + 1, len(poles)):
            if poles[i] == poles[j]:
                raise DuplicatePole(f"pole {poles[i]} appears twice")
    return RationalData(poles, coeffs, epsilon)


def integer_ratio(c: complex, epsilon: float, tol: float = INTEGER_TOL) -> Optional[int]:
    """Return i*c/eps as an int when it is an integer within ``tol``, else None."""
    r = 1j * complex(c) / epsilon
    k = round(r.real)
    if abs(r.imag) <= tol and abs(r.real - k) <= tol:
        return int(k)
    return None


def classify_indices(data: RationalData) -> list[IndexClass]:
    classes = []
    for n, c in enumerate(data.coeffs, start=1):
        k = integer_ratio(c, data.epsilon)
        if k is not None and k < 0:
            classes.append(IndexClass(n, True, None))
        else:
            classes.append(IndexClass(n, False, k))
    return classes


def reflect_for_negative_time(data: RationalData) -> RationalData:
    """Data whose solution at (-t, -x) equals the original solution at (t, x)."""
    poles = tuple(-p.conjugate() for p in data.poles)
    coeffs = tuple(-c.conjugate() for c in data.coeffs)
    return RationalData(poles, coeffs, data.epsilon)


def szego_project_initial(data: RationalData, y):
    """Hardy-space part of u0: the partial fractions with lower half-plane poles."""
    y = np.asarray(y, dtype=complex)
    out = np.zeros_like(y)
    for p, c in zip(data.poles, data.coeffs):
        d = y - np.conj(p)
        if np.any(d == 0):
            raise PoleHit(f"evaluation point coincides with conjugate pole {np.conj(p)}")
        out = out + np.conj(c) / d
    return out if out.ndim else complex(out)
