"""Closed-form special functions for the minus-soliton datum.

Everything here is a pure function of real or complex scalars.  The
exponential integral is the principal-value integral of e^s/s up to k,
evaluated only for k > 0.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, OrderTooLarge

EULER_GAMMA = 0.57721566490153286061
EI_SWITCH = 40.0
HERMITE_MAX_ORDER = 64


def _ei_series_scaled(k: float) -> float:
    # e^{-k} * (gamma + ln k + sum_{j>=1} k^j / (j j!)); all series terms are positive
    term = 1.0
    total = 0.0
    j = 0
    while True:
        j += 1
        term *= k / j
        contrib = term / j
        total += contrib
        if contrib < 1e-17 * total:
            break
    return math.exp(-k) * (EULER_GAMMA + math.log(k) + total)


def _ei_asymptotic_scaled(k: float) -> float:
    # e^{-k} Ei(k) ~ (1/k) sum_j j!/k^j, truncated at the smallest term
    term = 1.0
    total = 1.0
    j = 0
    while True:
        j += 1
        nxt = term * j / k
        if nxt >= term or nxt < 1e-17:
            break
        term = nxt
        total += term
    return total / k


def expint_Ei_scaled(k: float) -> float:
    """Return exp(-k) * Ei(k) for k > 0, safe against overflow."""
    k = float(k)
    if not k > 0:
        raise DomainError(f"Ei is implemented for k > 0 only, got {k!r}")
    if k <= EI_SWITCH:
        return _ei_series_scaled(k)
    return _ei_asymptotic_scaled(k)


def expint_Ei(k: float) -> float:
    """Principal-value exponential integral Ei(k) for k > 0.

    Convergent power series up to k = 40, asymptotic series beyond.
    Returns ``inf`` once the value overflows a double.
    """
    k = float(k)
    if not k > 0:
        raise DomainError(f"Ei is implemented for k > 0 only, got {k!r}")
    if k <= EI_SWITCH:
        term = 1.0
        total = 0.0
        j = 0
        while True:
            j += 1
            term *= k / j
            contrib = term / j
            total += contrib
            if contrib < 1e-17 * abs(total):
                break
        return EULER_GAMMA + math.log(k) + total
    if k > 709.0:
        return math.inf
    return math.exp(k) * _ei_asymptotic_scaled(k)


def profile_F(y: float) -> complex:
    """F(y) = e^y (pi i + Ei(-2y)) for y < 0."""
    y = float(y)
    if not y < 0:
        raise DomainError(f"profile_F needs y < 0, got {y!r}")
    # e^y Ei(-2y) = e^{-y} * (e^{2y} Ei(-2y)), kept finite for large |y|
    return complex(math.exp(-y) * expint_Ei_scaled(-2.0 * y), math.pi * math.exp(y))


def alpha_lambda(lam: float) -> complex:
    """alpha(lam) = 2 pi e^lam / (Ei(2 lam) + i pi), lam > 0.

    This is also the Fourier transform of the outgoing scattering profile.
    """
    lam = float(lam)
    if not lam > 0:
        raise DomainError(f"alpha needs lambda > 0, got {lam!r}")
    s = math.exp(-2.0 * lam)
    return 2.0 * math.pi * math.exp(-lam) / complex(expint_Ei_scaled(2.0 * lam), math.pi * s)


psi_hat = alpha_lambda


def beta_lambda(lam: float) -> complex:
    """beta(lam) = 2 pi i e^lam / (Ei(2 lam) - i pi), lam > 0."""
    lam = float(lam)
    if not lam > 0:
        raise DomainError(f"beta needs lambda > 0, got {lam!r}")
    s = math.exp(-2.0 * lam)
    return 2j * math.pi * math.exp(-lam) / complex(expint_Ei_scaled(2.0 * lam), -math.pi * s)


def alpha_array(lams) -> np.ndarray:
    return np.array([alpha_lambda(v) for v in np.ravel(lams)], dtype=complex).reshape(np.shape(lams))


def hermite_H(n: int, w, n_max: int = HERMITE_MAX_ORDER):
    """Physicists' Hermite polynomial H_n(w) by the three-term recurrence."""
    if n < 0 or int(n) != n:
        raise ValueError(f"Hermite order must be a nonnegative integer, got {n!r}")
    if n > n_max:
        raise OrderTooLarge(f"Hermite order {n} exceeds the limit {n_max}")
    w = np.asarray(w, dtype=complex)
    h_prev = np.ones_like(w)
    if n == 0:
        return h_prev if h_prev.ndim else complex(h_prev)
    h = 2.0 * w
    for m in range(1, n):
        h_prev, h = h, 2.0 * w * h - 2.0 * m * h_prev
    return h if h.ndim else complex(h)
