"""Long-time diagnostics for the minus-soliton datum u0 = -2/(x^2 + 1), eps = 1.

The rescaled Hardy part

    phi(t, y) = exp(-i pi/4) sqrt(4 pi t) exp(i t y^2) Pi u(t, 2 t y),    y < 0,

is compared with alpha(-y), and u(t, .) is compared in L^2 with the free
evolution of the outgoing profile.  The Jost solution m_-(x, lambda), the
spectral transform it defines and a norm identity for that transform are
also evaluated here.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, special as sp

from .data import RationalData, validate_rational_data
from .errors import DomainError
from .quadrature import QuadratureSpec
from .solver import SolutionSample, evaluate_u_grid
from .special import alpha_lambda, expint_Ei

MINUS_SOLITON = validate_rational_data([1j], [1j], 1.0)
SOLITON = validate_rational_data([1j], [-1j], 1.0)
INITIAL_L2_NORM = math.sqrt(2.0 * math.pi)  # || 2/(x^2+1) ||


# ------------------------------------------------------------------ profile

@dataclass(frozen=True)
class ProfileRecord:
    t: float
    y: float
    phi: complex
    target: complex
    deviation: float
    err_flag: bool = False
    message: str = ""


def rescale_hardy_part(t: float, y: float, piu: complex) -> complex:
    return cmath.exp(-0.25j * math.pi) * math.sqrt(4.0 * math.pi * t) * cmath.exp(1j * t * y * y) * piu


def renormalized_profile(t: float, y_list: Sequence[float], spec: QuadratureSpec | None = None,
                         threads: int = 1, data: RationalData = MINUS_SOLITON) -> list[ProfileRecord]:
    """phi(t, y) next to its limit alpha(-y) for each y < 0."""
    t = float(t)
    if not t > 0:
        raise DomainError(f"profile needs t > 0, got {t!r}")
    ys = [float(y) for y in y_list]
    if any(not y < 0 for y in ys):
        raise DomainError("profile samples need y < 0")
    samples = {s.x: s for s in evaluate_u_grid(data, [t], [2.0 * t * y for y in ys], spec, threads)}
    out = []
    for y in ys:
        s = samples[2.0 * t * y]
        phi = rescale_hardy_part(t, y, s.Piu)
        target = alpha_lambda(-y)
        out.append(ProfileRecord(t, y, phi, target, abs(phi - target), s.err_flag, s.message))
    return out


# ------------------------------------------------------------ free evolution

def free_evolution_profile(t: float, x: float, psi_hat_fn: Callable[[float], complex] = alpha_lambda) -> complex:
    """Hardy part of the linear flow applied to the profile with transform ``psi_hat_fn``.

    Exact for every t > 0; the transform lives on positive frequencies so the
    value is 0 for x >= 0.
    """
    t = float(t)
    if not t > 0:
        raise DomainError(f"free evolution needs t > 0, got {t!r}")
    if x >= 0:
        return 0j
    return (cmath.exp(0.25j * math.pi) / math.sqrt(4.0 * math.pi * t)
            * cmath.exp(-1j * x * x / (4.0 * t)) * psi_hat_fn(-x / (2.0 * t)))


def residual_grid(t: float, left: float = 8.0, right: float = 0.25, points_per_wave: float = 12.0,
                  max_step: float = 1.0) -> np.ndarray:
    """x in [-left t, right t] with spacing a fraction of the local wavelength 4 pi t / |x|."""
    xs = [-left * t]
    while xs[-1] < right * t:
        wave = 4.0 * math.pi * t / max(abs(xs[-1]), 1e-12)
        xs.append(xs[-1] + min(wave / points_per_wave, max_step))
    xs[-1] = right * t
    return np.array(xs)


@dataclass(frozen=True)
class ResidualRecord:
    t: float
    residual: float
    n_points: int
    flagged: int


def _residual_from_samples(t, samples: Sequence[SolutionSample], psi_hat_fn) -> ResidualRecord:
    xs = np.array([s.x for s in samples])
    u = np.array([s.u for s in samples])
    free = np.array([2.0 * free_evolution_profile(t, x, psi_hat_fn).real if psi_hat_fn else 0.0 for x in xs])
    diff2 = (u - free) ** 2
    flagged = int(sum(s.err_flag or not math.isfinite(s.u) for s in samples))
    return ResidualRecord(float(t), float(math.sqrt(np.trapezoid(diff2, xs))), len(xs), flagged)


def scattering_residual(t: float, x_grid=None, psi_hat_fn: Callable[[float], complex] | None = alpha_lambda,
                        spec: QuadratureSpec | None = None, threads: int = 1,
                        samples: Sequence[SolutionSample] | None = None) -> ResidualRecord:
    """Trapezoid L^2 norm of u(t, .) - 2 Re(free evolution) over ``x_grid``.

    ``psi_hat_fn=None`` compares against zero.  Precomputed ``samples`` may be
    passed to reuse one solve for several targets.
    """
    if samples is None:
        if x_grid is None:
            x_grid = residual_grid(t)
        samples = evaluate_u_grid(MINUS_SOLITON, [t], x_grid, spec, threads)
    return _residual_from_samples(t, samples, psi_hat_fn)


# --------------------------------------------------------------------- Jost

def _segment_to_i(lam: float, x: float, rel_tol: float = 1e-13) -> complex:
    """int_x^i exp(-i lam z) / (z + i) dz along the straight segment."""
    direction = 1j - x

    def f(s):
        z = x + s * direction
        return cmath.exp(-1j * lam * z) / (z + 1j) * direction

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        pieces = max(1, int(abs(lam * x) / 20.0))
        total = 0j
        edges = np.linspace(0.0, 1.0, pieces + 1)
        for a, b in zip(edges[:-1], edges[1:]):
            total += integrate.quad(f, a, b, epsabs=0.0, epsrel=rel_tol, limit=400, complex_func=True)[0]
    return total


def jost_denominator(lam: float) -> complex:
    """int_{-inf}^i exp(-i lam z) / (z + i) dz = exp(-lam) (Ei(2 lam) - i pi)."""
    return math.exp(-lam) * complex(expint_Ei(2.0 * lam), -math.pi)


def jost_m_minus(x: float, lam: float) -> complex:
    """Jost solution of the minus-soliton Lax operator, normalized to exp(i lam x) at -infinity."""
    lam = float(lam)
    if not lam > 0:
        raise DomainError(f"Jost solution needs lambda > 0, got {lam!r}")
    x = float(x)
    return (x + 1j) / (x - 1j) * cmath.exp(1j * lam * x) * _segment_to_i(lam, x) / jost_denominator(lam)


def jost_ode_residual(x: float, lam: float, step: float = 1e-3) -> float:
    """|m' + 2i m/(1+x^2) - i lam m - c/(x-i)| with c = -1/denominator, m' by a 5-point stencil."""
    m = [jost_m_minus(x + k * step, lam) for k in (-2, -1, 0, 1, 2)]
    dm = (m[0] - 8.0 * m[1] + 8.0 * m[3] - m[4]) / (12.0 * step)
    const = -1.0 / jost_denominator(lam)
    return abs(dm + 2j * m[2] / (1.0 + x * x) - 1j * lam * m[2] - const / (x - 1j))


# ------------------------------------------------------------ norm identity

def alpha_squared_integral(upper: float = 60.0) -> float:
    """(1/2 pi) int_0^inf |alpha|^2 d lambda by adaptive quadrature.

    |alpha(lam)|^2 <= 16 pi^2 lam^2 exp(-2 lam) for large lam, so the tail past
    ``upper`` is below 1e-40.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(lambda s: abs(alpha_lambda(s)) ** 2, 0.0, upper,
                                points=[0.5, 2.0, 8.0], epsabs=0.0, epsrel=1e-12, limit=500)
    return val / (2.0 * math.pi)


def plancherel_norm_check() -> tuple[float, float]:
    """(||Pi u0||^2, (1/2 pi) int |alpha|^2); the first is pi exactly."""
    return math.pi, alpha_squared_integral()


def _panel_rule(order: int = 8):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return 0.5 * (nodes + 1.0), 0.5 * weights


def distorted_transform(lam: float, half_width: float = 400.0, panel: float = 0.25) -> complex:
    """int Pi u0(x) conj(m_-(x, lam)) dx by direct quadrature on the real line.

    m_- is built from a cumulative Gauss-Legendre integral of exp(-i lam z)/(z+i)
    along the real axis, anchored at x = 0 on the segment to i, so it shares no
    code with :func:`jost_m_minus`.  Both tails use the leading asymptotics
    Pi u0 conj(m_-) ~ (-i/x) exp(-i lam x) conj(N_+-/D) with an exponential-integral closed form.
    """
    g = lambda z: np.exp(-1j * lam * z) / (z + 1j)
    nodes, weights = _panel_rule()
    n_side = int(round(half_width / panel))
    edges = np.linspace(-half_width, half_width, 2 * n_side + 1)
    a, b = edges[:-1], edges[1:]
    width = b - a
    # panel integrals of g, and partial integrals from each panel's left edge to its nodes
    x_nodes = a[:, None] + width[:, None] * nodes[None, :]
    panel_int = (g(x_nodes) * weights[None, :]).sum(axis=1) * width
    inner = a[:, None, None] + (x_nodes - a[:, None])[:, :, None] * nodes[None, None, :]
    partial = (g(inner) * weights[None, None, :]).sum(axis=2) * (x_nodes - a[:, None])
    # N(x) = int_x^i; N(edge) from N(0) by cumulative sums
    n_zero = _segment_to_i(lam, 0.0)
    cum = np.concatenate([[0.0], np.cumsum(panel_int)])
    zero_idx = n_side
    n_edges = n_zero - (cum - cum[zero_idx])
    n_nodes = n_edges[:-1, None] - partial
    denom = jost_denominator(lam)
    m = (x_nodes + 1j) / (x_nodes - 1j) * np.exp(1j * lam * x_nodes) * n_nodes / denom
    f = -1j / (x_nodes + 1j)
    body = ((f * np.conj(m)) * weights[None, :]).sum(axis=1) @ width
    # tails: int_{-inf}^{-X} (-i/x) e^{-i lam x} dx = i E1(i lam X) conj-weighted, similarly on the right
    left_amp = np.conj(n_edges[0] / denom)
    right_amp = np.conj(n_edges[-1] / denom)
    tail_left = 1j * sp.exp1(1j * lam * half_width) * left_amp
    tail_right = -1j * sp.exp1(1j * lam * half_width) * right_amp
    return complex(body + tail_left + tail_right)


def plancherel_double_quadrature(lam_max: float = 20.0, n_lam: int = 48, half_width: float = 400.0) -> float:
    """(1/2 pi) int_0^lam_max |f~(lam)|^2 d lambda with f~ from :func:`distorted_transform`."""
    # lambda nodes graded toward 0, where alpha varies like 1 / log(lambda)
    s, w = np.polynomial.legendre.leggauss(n_lam)
    s = 0.5 * (s + 1.0)
    w = 0.5 * w
    lam = lam_max * s ** 2
    jac = 2.0 * lam_max * s
    vals = np.array([abs(distorted_transform(v, half_width)) ** 2 for v in lam])
    return float((vals * jac) @ w / (2.0 * math.pi))


# --------------------------------------------------------------- conservation

@dataclass(frozen=True)
class ConservedRecord:
    t: float
    mass: float
    energy: float
    half_width: float
    tail_ok: bool


def conservation_nodes(half_width: float, t: float = 0.0, core: float = 20.0, core_panel: float = 0.5,
                       growth: float = 1.15, order: int = 8, max_wavenumber: float = 20.0,
                       waves_per_panel: float = 0.75):
    """Gauss-Legendre nodes and weights on [-half_width, half_width].

    Panels are uniform on [-core, core] and grow geometrically outside, where
    u is smooth and decays algebraically.  On the left, where dispersive
    radiation with local wavenumber |x| / (2t) travels, panels are also kept
    below ``waves_per_panel`` wavelengths until that wavenumber exceeds ``max_wavenumber``
    (the outgoing spectrum is exponentially small there).
    """
    def side(limit_wave: bool):
        edges = [0.0]
        width = core_panel
        while edges[-1] < half_width:
            x = edges[-1]
            if x >= core:
                width *= growth
            w = width
            if limit_wave and t > 0 and x / (2.0 * t) < max_wavenumber:
                w = min(w, waves_per_panel * 4.0 * math.pi * t / max(x, 1e-300))
            edges.append(min(x + w, half_width))
        return np.array(edges)

    edges = np.concatenate([-side(True)[::-1], side(False)[1:]])
    nodes, weights = _panel_rule(order)
    a, b = edges[:-1], edges[1:]
    xs = (a[:, None] + (b - a)[:, None] * nodes[None, :]).ravel()
    ws = ((b - a)[:, None] * weights[None, :]).ravel()
    return xs, ws


def _tail_fit(xs, u, side: str, edge: float):
    """Fit u ~ b/x^2 + c/x^3 + d/x^4 on the outer half of one side; return (mass, energy, fit_ok)."""
    far = np.abs(xs) >= 0.5 * edge
    sel = far & ((xs > 0) if side == "right" else (xs < 0))
    x, v = xs[sel], u[sel]
    basis = np.stack([x ** -2.0, x ** -3.0, x ** -4.0], axis=1)
    (b, c, d), *_ = np.linalg.lstsq(basis, v, rcond=None)
    ok = bool(np.max(np.abs(basis @ (b, c, d) - v)) <= 1e-3 * np.max(np.abs(v)) + 1e-15)
    sign = 1.0 if side == "right" else -1.0
    mass = b / edge + sign * c / (2.0 * edge ** 2) + d / (3.0 * edge ** 3)
    energy = b * b / (3.0 * edge ** 3) + sign * b * c / (2.0 * edge ** 4)
    return mass, energy, ok


def conserved_quantities(data: RationalData, t_list: Sequence[float], half_width: float = 300.0,
                         spec: QuadratureSpec | None = None, threads: int = 1) -> list[ConservedRecord]:
    """int u dx and int u^2 dx on [-half_width, half_width] plus fitted algebraic tails.

    ``tail_ok`` is False when the tail fit misses the outer samples by more
    than 1e-3 relative or a sample failed.
    """
    out = []
    for t in t_list:
        xs, ws = conservation_nodes(half_width, t)
        samples = evaluate_u_grid(data, [t], xs, spec, threads)
        u = np.array([s.u for s in samples])
        ok = bool(np.all(np.isfinite(u))) and not any(s.err_flag for s in samples)
        mass = float(u @ ws)
        energy = float((u * u) @ ws)
        for side in ("left", "right"):
            m_tail, e_tail, fit_ok = _tail_fit(xs, u, side, float(half_width))
            ok = ok and fit_ok
            mass += m_tail
            energy += e_tail
        out.append(ConservedRecord(float(t), mass, energy, float(half_width), ok))
    return out
