"""The phase function h(z) on the cut plane and its exponential weight.

    h(z) = (z - x)^2 / (4 t) + sum_n [c_n log(z - p_n) + conj(c_n) log(z - conj(p_n))]

The logarithm attached to ``p_n`` has its cut along the upper cut of that pole;
the one attached to ``conj(p_n)`` is the principal branch, whose cut is the
horizontal ray running left.  Both agree with principal logarithms far out on
the negative real axis, where h is real.

Two evaluation routes are provided.  :meth:`PhaseContext.h` uses closed-form
branch selection (a rotated principal logarithm, plus a 2 pi i correction in
the wedge swept by a dog-leg).  :func:`continue_h_along` follows a path from
the real reference point, accumulating the argument of every ``z - p``
incrementally, and is the independent check on the first.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .contours import CutGeometry, build_cut_geometry
from .data import RationalData
from .errors import PathCrossesCut, PoleHit, SingularityTooClose



def _log_along_cut(w, direction_angle):
    """log w with its cut on the ray of angle ``direction_angle``; arg in (angle - 2pi, angle)."""
    shift = direction_angle - math.pi
    return np.log(w * cmath.exp(-1j * shift)) + 1j * shift


def upper_log(z, cut) -> np.ndarray:
    """log(z - p) continued from the negative real axis, cut along ``cut``."""
    z = np.asarray(z, dtype=complex)
    w = z - cut.pole
    if cut.bend is None:
        return _log_along_cut(w, cut.angle)
    phi1 = cut.angle + cut.nudge
    val = _log_along_cut(w, phi1)
    ang = np.angle((z - cut.bend) * cmath.exp(-1j * cut.angle))
    if cut.nudge > 0:
        wedge = (ang > 0) & (ang < cut.nudge)
        return val - 2j * math.pi * wedge
    wedge = (ang < 0) & (ang > cut.nudge)
    return val + 2j * math.pi * wedge


@dataclass
class PhaseContext:
    """Everything needed to evaluate h and exp(-i h / eps) for one (t, x)."""
    data: RationalData
    t: float
    x: complex
    geometry: CutGeometry = None

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError(f"PhaseContext needs t > 0, got {self.t!r}")
        if self.geometry is None:
            self.geometry = build_cut_geometry(self.data)
        self._poles = np.asarray(self.geometry.poles, dtype=complex)
        self._coeffs = np.asarray(self.geometry.coeffs, dtype=complex)

    @property
    def epsilon(self) -> float:
        return self.data.epsilon

    @property
    def reference_point(self) -> float:
        """Real point left of all geometry where h is real."""
        p = self._poles
        return float(np.min(p.real) - 10.0 * (1.0 + np.max(np.abs(p))))

    def log_sum(self, z) -> np.ndarray:
        """sum_n [c_n log(z - p_n) + conj(c_n) log(z - conj(p_n))] on the cut plane."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for cut, c, p in zip(self.geometry.upper_cuts, self._coeffs, self._poles):
            out = out + c * upper_log(z, cut) + np.conj(c) * np.log(z - np.conj(p))
        return out

    def h(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return (z - self.x) ** 2 / (4.0 * self.t) + self.log_sum(z)

    def h_prime(self, z):
        z = np.asarray(z, dtype=complex)
        for p in self._poles:
            if np.any(z == p) or np.any(z == np.conj(p)):
                raise PoleHit(f"h' has a pole at {p}")
        return (z - self.x) / (2.0 * self.t) + self.data.u0(z)

    def log_weight(self, z) -> np.ndarray:
        """log of exp(-i h(z) / eps) on the cut plane."""
        return -1j * self.h(z) / self.epsilon

    def dlog_weight(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return -1j * ((z - self.x) / (2.0 * self.t) + self.data.u0(z)) / self.epsilon

    def exp_phase(self, z):
        """Return (log_magnitude, phase) of exp(-i h(z) / eps)."""
        lw = self.log_weight(z)
        return lw.real, lw.imag


def cut_jump_factor(data: RationalData, n: int) -> complex:
    """Multiplicative jump exp(2 pi i (-i c_n/eps - 1)) = exp(2 pi c_n / eps) across cut n (1-based)."""
    c = complex(data.coeffs[n - 1])
    return cmath.exp(2.0 * math.pi * c / data.epsilon)


# ------------------------------------------------------------ path continuation

@dataclass
class BranchState:
    """Accumulated continuous arguments of z - p_n (upper) and z - conj(p_n) (lower)."""
    upper_args: np.ndarray
    lower_args: np.ndarray
    z: complex

    def copy(self):
        return BranchState(self.upper_args.copy(), self.lower_args.copy(), self.z)


def initial_branch_state(ctx: PhaseContext, z0: complex) -> BranchState:
    """Principal arguments at a starting point on the real axis left of the geometry."""
    p = ctx._poles
    return BranchState(np.angle(z0 - p), np.angle(z0 - np.conj(p)), complex(z0))


def advance(state: BranchState, ctx: PhaseContext, z_new: complex, clearance: float = 0.0) -> BranchState:
    """Move the state along the straight segment to ``z_new`` in steps of at most pi/2 winding."""
    p = ctx._poles
    singular = np.concatenate([p, np.conj(p)])
    z_old = state.z
    a, b = z_old, complex(z_new)
    dist = np.min(np.abs(singular - a))
    n_sub = 1
    while True:
        pts = a + (b - a) * np.linspace(0.0, 1.0, n_sub + 1)
        du = np.abs(np.diff(np.angle(pts[:, None] - singular[None, :]), axis=0))
        du = np.minimum(du, 2 * math.pi - du)
        if np.all(du < 0.5 * math.pi):
            break
        n_sub *= 2
        if n_sub > 1 << 20:
            raise SingularityTooClose("path passes through a singularity")
    dmin = min(np.min(np.abs(pts[:, None] - singular[None, :])), dist)
    if dmin <= clearance:
        raise SingularityTooClose(f"path within {dmin:.3g} of a singularity")
    new = state.copy()
    for k in range(n_sub):
        z0, z1 = pts[k], pts[k + 1]
        new.upper_args = new.upper_args + np.angle((z1 - p) / (z0 - p))
        new.lower_args = new.lower_args + np.angle((z1 - np.conj(p)) / (z0 - np.conj(p)))
    new.z = b
    return new


def _crosses_cuts(ctx: PhaseContext, a: complex, b: complex) -> bool:
    from .contours import _segments_intersect, _FAR
    for cut in ctx.geometry.upper_cuts:
        for c, d in cut.segments():
            if _segments_intersect(a, b, c, d):
                return True
    for p in ctx._poles:
        if _segments_intersect(a, b, np.conj(p), np.conj(p) - _FAR):
            return True
    return False


def continue_h_along(ctx: PhaseContext, path, clearance: float = 0.0) -> complex:
    """h at the end of a polyline that starts at the real reference point.

    The path's first vertex must be real and left of the geometry.  Raises
    PathCrossesCut if a segment crosses a cut and SingularityTooClose if it
    comes within ``clearance`` of a pole.
    """
    path = [complex(v) for v in path]
    z0 = path[0]
    if abs(z0.imag) > 0 or z0.real > ctx.reference_point + 1e-9:
        raise ValueError("path must start on the real axis at or left of the reference point")
    state = initial_branch_state(ctx, z0)
    for a, b in zip(path[:-1], path[1:]):
        if _crosses_cuts(ctx, a, b):
            raise PathCrossesCut(f"segment {a} -> {b} crosses a cut")
        state = advance(state, ctx, b, clearance)
    z = state.z
    p = ctx._poles
    up = np.log(np.abs(z - p)) + 1j * state.upper_args
    lo = np.log(np.abs(z - np.conj(p))) + 1j * state.lower_args
    logs = np.sum(ctx._coeffs * up + np.conj(ctx._coeffs) * lo)
    return complex((z - ctx.x) ** 2 / (4.0 * ctx.t) + logs)


# ------------------------------------------------------- piecewise continuation

class ContinuedPhase:
    """exp(-i h / eps) continued analytically along a chain of pieces.

    The logarithms take their cut-plane values at the start of piece
    ``anchor`` and are carried along the chain in both directions from there,
    so the chain may cross cuts freely.  Each piece must subtend less than pi
    as seen from every singular point, which holds for segments that avoid
    them and for arcs split by :func:`split_arcs`.
    """

    def __init__(self, ctx: PhaseContext, pieces, anchor: int = 0):
        self.ctx = ctx
        self.pieces = list(pieces)
        p = ctx._poles
        self._points = np.concatenate([p, np.conj(p)])
        self._coeffs = np.concatenate([ctx._coeffs, np.conj(ctx._coeffs)])
        starts = np.array([piece.start for piece in self.pieces], dtype=complex)
        z0 = starts[anchor:anchor + 1]
        offsets = np.empty((len(self.pieces), self._points.size), dtype=complex)
        offsets[anchor] = np.concatenate([
            np.array([upper_log(z0, cut)[0] for cut in ctx.geometry.upper_cuts], dtype=complex),
            np.log(z0[0] - np.conj(p)),
        ])
        for j in range(anchor + 1, len(self.pieces)):
            offsets[j] = offsets[j - 1] + np.log((starts[j] - self._points) / (starts[j - 1] - self._points))
        for j in range(anchor - 1, -1, -1):
            offsets[j] = offsets[j + 1] - np.log((starts[j + 1] - self._points) / (starts[j] - self._points))
        self._starts = starts
        self._offsets = offsets

    def log_sum(self, z, piece_ids) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        ids = np.asarray(piece_ids)
        a = self._starts[ids]
        logs = np.log((z[:, None] - self._points[None, :]) / (a[:, None] - self._points[None, :]))
        logs = logs + self._offsets[ids]
        return logs @ self._coeffs

    def log_weight(self, z, piece_ids) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        h = (z - self.ctx.x) ** 2 / (4.0 * self.ctx.t) + self.log_sum(z, piece_ids)
        return -1j * h / self.ctx.epsilon
