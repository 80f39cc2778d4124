"""Adaptive Gauss-Kronrod quadrature along piecewise contours.

Integrands are supplied in split form: a complex log-weight ``log_w(z)``
(the exponent of the oscillatory, possibly huge, weight) and a stack of
moderate factors ``g_m(z)``.  Every component m is integrated on the same
nodes, and the weight is divided by ``exp(scale)`` before it is ever
exponentiated, so results are returned as ``mantissa * exp(scale)``.

Panels are refined in batches: after each sweep every panel whose error
exceeds its equal share of the remaining budget is bisected.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import NonFiniteIntegrand, NonIntegrableEndpoint

# 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15)
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

KRONROD_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod nodes
GAUSS_WEIGHTS[[1, 3, 5, 7, 9, 11, 13]] = [_WG[0], _WG[1], _WG[2], _WG[3], _WG[2], _WG[1], _WG[0]]

_EPS = np.finfo(float).eps


class Segment:
    """Straight piece z(s) = a + s (b - a), s in [0, 1]."""

    def __init__(self, a: complex, b: complex):
        self.a = complex(a)
        self.b = complex(b)

    def point(self, s):
        return self.a + s * (self.b - self.a)

    def deriv(self, s):
        return np.full(np.shape(s), self.b - self.a, dtype=complex)

    @property
    def start(self):
        return self.a

    @property
    def end(self):
        return self.b

    def reversed(self):
        return Segment(self.b, self.a)

    def __repr__(self):
        return f"Segment({self.a}, {self.b})"


class Arc:
    """Circular piece z(s) = center + radius * exp(i theta(s))."""

    def __init__(self, center: complex, radius: float, theta0: float, theta1: float):
        self.center = complex(center)
        self.radius = float(radius)
        self.theta0 = float(theta0)
        self.theta1 = float(theta1)

    def point(self, s):
        return self.center + self.radius * np.exp(1j * (self.theta0 + s * (self.theta1 - self.theta0)))

    def deriv(self, s):
        th = self.theta0 + s * (self.theta1 - self.theta0)
        return 1j * self.radius * (self.theta1 - self.theta0) * np.exp(1j * th)

    @property
    def start(self):
        return complex(self.point(0.0))

    @property
    def end(self):
        return complex(self.point(1.0))

    def reversed(self):
        return Arc(self.center, self.radius, self.theta1, self.theta0)

    def __repr__(self):
        return f"Arc({self.center}, {self.radius}, {self.theta0}, {self.theta1})"


def split_arcs(pieces, max_angle: float = 0.5 * math.pi) -> list:
    """Subdivide arcs so no piece turns by more than ``max_angle`` about its centre."""
    out = []
    for piece in pieces:
        if isinstance(piece, Arc):
            sweep = piece.theta1 - piece.theta0
            n = max(1, int(math.ceil(abs(sweep) / max_angle - 1e-12)))
            th = piece.theta0 + sweep * np.arange(n + 1) / n
            out.extend(Arc(piece.center, piece.radius, th[i], th[i + 1]) for i in range(n))
        else:
            out.append(piece)
    return out


@dataclass
class QuadratureSpec:
    rel_tol: float = 1e-10
    abs_floor: float = 0.0
    max_subdivisions: int = 200000
    grading_ratio: float = 0.15

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be at least 1")


@dataclass
class IntegralResult:
    """Integral values ``mantissa * exp(scale)``, one per integrand component."""
    scale: float
    mantissa: np.ndarray
    error_estimate: np.ndarray
    evaluations: int = 0
    tolerance_not_met: bool = False

    @property
    def value(self) -> np.ndarray:
        return self.mantissa * math.exp(self.scale)

    def rescaled(self, scale: float) -> np.ndarray:
        """Mantissas expressed relative to another scale."""
        return self.mantissa * math.exp(self.scale - scale)


@dataclass
class SimpleIntegrand:
    """Wrap a plain vectorized function f(z) as a one-component integrand."""
    fn: Callable
    singularities: Sequence[complex] = ()

    n_components = 1

    def log_weight(self, z):
        return np.zeros(np.shape(z), dtype=complex)

    def dlog_weight(self, z):
        return np.zeros(np.shape(z), dtype=complex)

    def factors(self, z):
        return np.asarray(self.fn(z), dtype=complex)[None, ...]


def _singular_density(z, dz, singularities):
    if not len(singularities):
        return np.zeros(z.shape)
    d = np.min(np.abs(z[:, None] - np.asarray(singularities)[None, :]), axis=1)
    return 0.5 * np.abs(dz) / np.maximum(d, 1e-300)


def _initial_breaks(piece, integrand, n_samples=129, max_panels=4000):
    """Breakpoints equidistributing phase change (<= pi per panel) and pole proximity."""
    s = np.linspace(0.0, 1.0, n_samples)
    z = piece.point(s)
    dz = piece.deriv(s)
    with np.errstate(divide="ignore", invalid="ignore"):
        # a ray's endpoint sample may sit on a pole; non-finite densities are zeroed below
        rho = np.abs(integrand.dlog_weight(z) * dz) / math.pi
        rho = rho + _singular_density(z, dz, getattr(integrand, "singularities", ()))
    rho = np.where(np.isfinite(rho), rho, 0.0)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (rho[1:] + rho[:-1]) * np.diff(s))])
    n = int(min(max_panels, max(1, math.ceil(cum[-1]))))
    if n == 1:
        return np.array([0.0, 1.0])
    targets = np.linspace(0.0, cum[-1], n + 1)
    br = np.interp(targets, cum, s)
    br[0], br[-1] = 0.0, 1.0
    return np.unique(br)


def _graded_breaks(ratio, exponent_real, levels_cap=400, min_offset=0.0):
    """Geometric mesh accumulating at s = 0 for an endpoint power singularity.

    ``min_offset`` is the smallest parameter distance from 0 at which a node
    still differs from the endpoint in floating point.
    """
    levels = int(math.ceil(16.0 * math.log(10.0) / ((exponent_real + 1.0) * -math.log(ratio))))
    if exponent_real >= 0.0:
        # bounded integrand: finer panels would only place nodes that round onto the endpoint
        levels = min(levels, int(12.0 * math.log(10.0) / -math.log(ratio)))
    if min_offset > 0.0:
        # the innermost Kronrod node sits at about 0.0043 of the first panel
        levels = min(levels, int(math.log(0.0043 / min_offset) / -math.log(ratio)))
    levels = min(max(levels, 4), levels_cap)
    return np.concatenate([[0.0], ratio ** np.arange(levels, 0, -1), [1.0]])


class _Flipped:
    """The same piece parametrized from its end, so s near 0 resolves the endpoint."""

    def __init__(self, piece):
        self._rev = piece.reversed()

    def point(self, s):
        return self._rev.point(s)

    def deriv(self, s):
        return -self._rev.deriv(s)


class _PanelSet:
    def __init__(self, integrand):
        self.integrand = integrand
        self.piece_idx = np.zeros(0, dtype=int)
        self.lo = np.zeros(0)
        self.hi = np.zeros(0)
        self.kron = None
        self.err = None
        self.l1 = None
        self.scale = -math.inf
        self.evaluations = 0

    def evaluate(self, pieces, piece_idx, lo, hi):
        """GK15 sums on the given panels, at the current (possibly raised) scale."""
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        s = mid[:, None] + half[:, None] * KRONROD_NODES[None, :]
        z = np.empty(s.shape, dtype=complex)
        dz = np.empty(s.shape, dtype=complex)
        for k in np.unique(piece_idx):
            sel = piece_idx == k
            z[sel] = pieces[k].point(s[sel])
            dz[sel] = pieces[k].deriv(s[sel])
        zf = z.ravel()
        if getattr(self.integrand, "piecewise", False):
            lw = self.integrand.log_weight(zf, np.repeat(piece_idx, s.shape[1]))
        else:
            lw = self.integrand.log_weight(zf)
        g = self.integrand.factors(zf)
        self.evaluations += zf.size
        m = g.shape[0]
        new_scale = float(np.max(lw.real)) if lw.size else -math.inf
        if not np.isfinite(new_scale):
            if np.any(np.isnan(lw)) or new_scale == math.inf:
                raise NonFiniteIntegrand("log-weight is not finite on the contour")
        if new_scale > self.scale:
            if self.kron is not None and np.isfinite(self.scale):
                shrink = math.exp(self.scale - new_scale)
                self.kron *= shrink
                self.err *= shrink
                self.l1 *= shrink
            self.scale = new_scale
        w = np.exp(lw - self.scale)
        vals = (g * w[None, :]).reshape(m, *s.shape) * (dz * half[:, None])[None, :, :]
        if not np.all(np.isfinite(vals)):
            raise NonFiniteIntegrand("integrand produced a non-finite value")
        kron = vals @ KRONROD_WEIGHTS
        gauss = vals @ GAUSS_WEIGHTS
        # rounding of a large phase limits the attainable relative accuracy of each value
        cond = (1.0 + np.abs(lw)).reshape(s.shape)
        l1 = (np.abs(vals) * cond[None, :, :]) @ KRONROD_WEIGHTS
        return kron, np.abs(kron - gauss), l1

    def add(self, pieces, piece_idx, lo, hi):
        kron, err, l1 = self.evaluate(pieces, piece_idx, lo, hi)
        if self.kron is None:
            self.kron, self.err, self.l1 = kron, err, l1
        else:
            self.kron = np.concatenate([self.kron, kron], axis=1)
            self.err = np.concatenate([self.err, err], axis=1)
            self.l1 = np.concatenate([self.l1, l1], axis=1)
        self.piece_idx = np.concatenate([self.piece_idx, piece_idx])
        self.lo = np.concatenate([self.lo, lo])
        self.hi = np.concatenate([self.hi, hi])

    def drop(self, keep):
        self.kron = self.kron[:, keep]
        self.err = self.err[:, keep]
        self.l1 = self.l1[:, keep]
        self.piece_idx = self.piece_idx[keep]
        self.lo = self.lo[keep]
        self.hi = self.hi[keep]


def _splittable(pieces, piece_idx, lo, hi):
    """Panels whose halves would still have distinct nodes in the complex plane."""
    ok = (hi - lo) > 1e-15 * np.maximum(1.0, np.abs(hi))
    mid = 0.5 * (lo + hi)
    for k in np.unique(piece_idx):
        sel = piece_idx == k
        z = pieces[k].point(mid[sel])
        width = np.abs(pieces[k].deriv(mid[sel])) * (hi[sel] - lo[sel])
        ok[sel] &= width > 1e-13 * np.maximum(1.0, np.abs(z))
    return ok


def _adaptive(integrand, pieces, breaks, spec: QuadratureSpec) -> IntegralResult:
    ps = _PanelSet(integrand)
    idx, lo, hi = [], [], []
    for k, br in enumerate(breaks):
        idx.append(np.full(len(br) - 1, k))
        lo.append(br[:-1])
        hi.append(br[1:])
    ps.add(pieces, np.concatenate(idx), np.concatenate(lo), np.concatenate(hi))
    flagged = False
    while True:
        total = ps.kron.sum(axis=1)
        err_tot = ps.err.sum(axis=1)
        l1_tot = ps.l1.sum(axis=1)
        floor = spec.abs_floor * math.exp(min(-ps.scale, 700.0)) if spec.abs_floor > 0 and np.isfinite(ps.scale) else 0.0
        target = np.maximum(spec.rel_tol * np.abs(total), 64 * _EPS * l1_tot) + floor
        if np.all(err_tot <= target):
            break
        n = ps.kron.shape[1]
        if n >= spec.max_subdivisions:
            flagged = True
            break
        bad = np.any((ps.err > (target / n)[:, None]) & (err_tot > target)[:, None], axis=0)
        # panels too narrow to split further are left alone
        bad &= _splittable(pieces, ps.piece_idx, ps.lo, ps.hi)
        if not np.any(bad):
            flagged = True
            break
        b_idx, b_lo, b_hi = ps.piece_idx[bad], ps.lo[bad], ps.hi[bad]
        b_mid = 0.5 * (b_lo + b_hi)
        ps.drop(~bad)
        ps.add(pieces, np.concatenate([b_idx, b_idx]), np.concatenate([b_lo, b_mid]),
               np.concatenate([b_mid, b_hi]))
    total = ps.kron.sum(axis=1)
    err_tot = ps.err.sum(axis=1)
    return IntegralResult(ps.scale, total, err_tot, ps.evaluations, flagged)


def integrate_path(integrand, pieces: Sequence, spec: QuadratureSpec | None = None) -> IntegralResult:
    """Integrate every component of ``integrand`` along the concatenated pieces."""
    spec = spec or QuadratureSpec()
    breaks = [_initial_breaks(p, integrand) for p in pieces]
    return _adaptive(integrand, list(pieces), breaks, spec)


def integrate_with_endpoint_singularity(integrand, pieces: Sequence, exponent: complex,
                                        spec: QuadratureSpec | None = None) -> IntegralResult:
    """Like :func:`integrate_path`, with a geometric mesh toward the final endpoint.

    ``exponent`` is the local power of the integrand at the terminal point.
    """
    spec = spec or QuadratureSpec()
    exponent = complex(exponent)
    if exponent.real <= -1.0:
        raise NonIntegrableEndpoint(f"endpoint power {exponent} is not integrable")
    pieces = list(pieces)
    breaks = [_initial_breaks(p, integrand) for p in pieces[:-1]]
    flipped = _Flipped(pieces[-1])
    coarse = _initial_breaks(flipped, integrand)
    end = pieces[-1].end
    length = float(np.abs(flipped.deriv(np.array([0.0]))[0]))
    graded = _graded_breaks(spec.grading_ratio, exponent.real,
                            min_offset=1e-12 * abs(end) / max(length, 1e-300))
    breaks.append(np.unique(np.concatenate([graded, coarse[coarse > graded[-2]]])))
    return _adaptive(integrand, pieces[:-1] + [flipped], breaks, spec)
