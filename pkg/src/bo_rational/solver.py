"""Determinant formulas for the Hardy-space part of the solution.

Rows of the (N+1)x(N+1) matrices are indexed by the contours C0..CN and
columns by the functions 1 (or u0 for A) and 1/(z - p_k):

    A[j, 0] = int_{C_j} u0 W dz,   B[j, 0] = int_{C_j} W dz,
    A[j, k] = B[j, k] = int_{C_j} W / (z - p_k) dz,      W = exp(-i h / eps),

and B_bar multiplies column k >= 1 of B by exp(i (x - p_k)^2 / (4 t eps)).
Then Pi u = det A / det B = i eps d/dx log det B_bar and u = 2 Re(Pi u).

Each row is stored as a mantissa vector with one shared real exponent, so
the row scale cancels exactly in det A / det B.  Poles are used in the
left-to-right order of their cuts; results do not depend on input order.
"""
from __future__ import annotations

import cmath
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .contours import (ContourSet, CutGeometry, GeometryParams, Segment, _entry_and_exit,
                       _tail_length, build_contours, build_cut_geometry)
from .data import RationalData, classify_indices, reflect_for_negative_time, szego_project_initial
from .errors import BORationalError, SingularB
from .phase import ContinuedPhase, PhaseContext
from .quadrature import (IntegralResult, QuadratureSpec, SimpleIntegrand, integrate_path,
                         integrate_with_endpoint_singularity)

COND_LIMIT = 1e12
SINGULAR_FLOOR = 1e-13


# ----------------------------------------------------------- linear algebra

@dataclass(frozen=True)
class ScaledComplex:
    """The complex number ``mantissa * exp(exponent)``."""
    mantissa: complex
    exponent: float

    @property
    def value(self) -> complex:
        return self.mantissa * math.exp(self.exponent) if self.mantissa != 0 else 0j

    def __truediv__(self, other: "ScaledComplex") -> complex:
        return (self.mantissa / other.mantissa) * math.exp(self.exponent - other.exponent)

    def log(self) -> complex:
        return cmath.log(self.mantissa) + self.exponent


def lu_factor(m: np.ndarray):
    """Partial-pivoting LU of a small complex matrix.

    Returns (lu, perm, sign); ``lu`` holds unit-lower L below the diagonal and U on it.
    """
    a = np.array(m, dtype=complex)
    n = a.shape[0]
    perm = np.arange(n)
    sign = 1
    for k in range(n):
        piv = k + int(np.argmax(np.abs(a[k:, k])))
        if piv != k:
            a[[k, piv]] = a[[piv, k]]
            perm[[k, piv]] = perm[[piv, k]]
            sign = -sign
        if a[k, k] == 0:
            continue
        a[k + 1:, k] /= a[k, k]
        a[k + 1:, k + 1:] -= np.outer(a[k + 1:, k], a[k, k + 1:])
    return a, perm, sign


def scaled_det(m: np.ndarray, exponent: float = 0.0):
    """Determinant as ScaledComplex plus the pivot-ratio condition estimate."""
    lu, _, sign = lu_factor(m)
    piv = np.diag(lu)
    mags = np.abs(piv)
    if np.any(mags == 0):
        return ScaledComplex(0j, exponent), math.inf
    logmag = float(np.sum(np.log(mags)))
    phase = np.prod(piv / mags) * sign
    return ScaledComplex(complex(phase), exponent + logmag), float(mags.max() / mags.min())


def lu_solve(m: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    lu, perm, _ = lu_factor(m)
    n = lu.shape[0]
    y = np.array(rhs, dtype=complex)[perm]
    for i in range(n):
        y[i] -= lu[i, :i] @ y[:i]
    for i in range(n - 1, -1, -1):
        y[i] = (y[i] - lu[i, i + 1:] @ y[i + 1:]) / lu[i, i]
    return y


# ---------------------------------------------------------------- integrand

class MatrixIntegrand:
    """Components u0 W, W, W/(z - p_1), ..., W/(z - p_N) sharing one weight W."""

    def __init__(self, ctx: PhaseContext):
        self.ctx = ctx
        self.poles = np.asarray(ctx.geometry.poles, dtype=complex)
        self.singularities = list(self.poles) + list(np.conj(self.poles))

    def log_weight(self, z):
        return self.ctx.log_weight(z)

    def dlog_weight(self, z):
        return self.ctx.dlog_weight(z)

    def factors(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.empty((len(self.poles) + 2, z.size), dtype=complex)
        out[0] = self.ctx.data.u0(z)
        out[1] = 1.0
        out[2:] = 1.0 / (z[None, :] - self.poles[:, None])
        return out


class ContinuedMatrixIntegrand(MatrixIntegrand):
    """MatrixIntegrand whose weight is continued along a fixed chain of pieces."""
    piecewise = True

    def __init__(self, ctx: PhaseContext, pieces, anchor: int = 0):
        super().__init__(ctx)
        self.phase = ContinuedPhase(ctx, pieces, anchor)

    def log_weight(self, z, piece_ids):
        return self.phase.log_weight(z, piece_ids)


class CombinationIntegrand(MatrixIntegrand):
    """Single component (u0 + a + sum_n V_n / (z - p_n)) W."""

    def __init__(self, ctx: PhaseContext, a_frak: complex, v: Sequence[complex]):
        super().__init__(ctx)
        self.weights = np.concatenate([[1.0, a_frak], np.asarray(v, dtype=complex)])

    def factors(self, z):
        return (self.weights @ super().factors(z))[None, :]


# ----------------------------------------------------------------- matrices

@dataclass
class SolutionMatrices:
    t: float
    x: float
    epsilon: float
    poles: tuple
    A: np.ndarray
    B: np.ndarray
    B_bar: np.ndarray
    row_scales: np.ndarray
    bbar_col_scales: np.ndarray
    det_A: ScaledComplex
    det_B: ScaledComplex
    det_B_bar: ScaledComplex
    cond_estimate: float
    det_b_normalized: float
    quadrature_flagged: bool
    contours: Optional[ContourSet] = None

    @property
    def err_flag(self) -> bool:
        return self.quadrature_flagged or not (self.cond_estimate <= COND_LIMIT)


def _sum_results(results: Sequence[IntegralResult]):
    scale = max(r.scale for r in results)
    mant = sum(r.rescaled(scale) for r in results)
    return mant, scale


def _bbar_log_factors(poles, t, x, eps):
    p = np.asarray(poles, dtype=complex)
    return 1j * (x - p) ** 2 / (4.0 * t * eps)


def row_integrals(ctx: PhaseContext, contours: ContourSet, spec: QuadratureSpec):
    """Raw integrals for every row: list of (mantissa vector, scale), plus a flag."""
    integrand = MatrixIntegrand(ctx)
    c0 = integrate_path(integrand, contours.c0.pieces, spec)
    def weight_for(c):
        # deformed contours may cross cuts; their weight is continued from the anchor piece
        return ContinuedMatrixIntegrand(ctx, c.pieces, c.anchor) if c.continued else integrand

    loops = {k: integrate_path(weight_for(c), c.pieces, spec) for k, c in contours.loops.items()}
    rays = {k: integrate_with_endpoint_singularity(weight_for(c), c.pieces, c.endpoint_exponent, spec)
            for k, c in contours.rays.items()}
    flagged = c0.tolerance_not_met or any(r.tolerance_not_met for r in loops.values()) \
        or any(r.tolerance_not_met for r in rays.values())
    # Rows are taken in the elementary basis: row n is C_n minus the row of the
    # previous non-exceptional index, i.e. a single loop, or the bare ray when
    # the exceptional path starts between cuts.  This unimodular row operation
    # leaves every determinant and the resolvent solve unchanged, and keeps a
    # small loop from being swamped by a larger one summed into the same row.
    rows = [(c0.mantissa, c0.scale)]
    for k in range(len(contours.classes)):
        res = rays[k] if contours.classes[k].exceptional else loops[k]
        rows.append((res.mantissa, res.scale))
    return rows, flagged


def matrices_from_rows(rows, t, x, eps, poles, flagged, contours=None) -> SolutionMatrices:
    n1 = len(rows)
    a = np.empty((n1, n1), dtype=complex)
    b = np.empty((n1, n1), dtype=complex)
    scales = np.empty(n1)
    for j, (mant, scale) in enumerate(rows):
        norm = float(np.max(np.abs(mant)))
        if norm == 0 or not np.isfinite(norm):
            norm = 1.0
        a[j, 0] = mant[0] / norm
        b[j, 0] = mant[1] / norm
        a[j, 1:] = b[j, 1:] = mant[2:] / norm
        scales[j] = scale + math.log(norm)
    logf = _bbar_log_factors(poles, t, x, eps)
    col_scales = np.concatenate([[0.0], logf.real])
    bbar = b.copy()
    bbar[:, 1:] = b[:, 1:] * np.exp(1j * logf.imag)[None, :]
    row_total = float(np.sum(scales))
    det_a, _ = scaled_det(a, row_total)
    det_b, cond = scaled_det(b, row_total)
    det_bbar, _ = scaled_det(bbar, row_total + float(np.sum(col_scales)))
    hadamard = float(np.prod(np.linalg.norm(b, axis=1)))
    det_norm = abs(det_b.mantissa) * math.exp(det_b.exponent - row_total) / hadamard if hadamard > 0 else 0.0
    return SolutionMatrices(t, x, eps, tuple(poles), a, b, bbar, scales, col_scales, det_a, det_b, det_bbar,
                            cond, det_norm, flagged, contours)


def assemble_matrices(data: RationalData, t: float, x: float, spec: QuadratureSpec | None = None,
                      geometry: CutGeometry | None = None, params: GeometryParams | None = None) -> SolutionMatrices:
    """Compute A, B and B_bar at (t, x) by quadrature over the contours C0..CN."""
    spec = spec or QuadratureSpec()
    geometry = geometry or build_cut_geometry(data, params)
    sdata = geometry.sorted_data()
    classes = classify_indices(sdata)
    ctx = PhaseContext(sdata, float(t), float(x), geometry)
    contours = build_contours(geometry, classes, ctx, params)
    rows, flagged = row_integrals(ctx, contours, spec)
    return matrices_from_rows(rows, float(t), float(x), sdata.epsilon, geometry.poles, flagged, contours)


def _check_singular(mats: SolutionMatrices):
    if not mats.det_b_normalized > SINGULAR_FLOOR:
        raise SingularB(f"det B is numerically zero (normalized {mats.det_b_normalized:.3g}) "
                        f"at t={mats.t}, x={mats.x}")


def solution_det_ratio(mats: SolutionMatrices) -> complex:
    """Pi u = det A / det B."""
    _check_singular(mats)
    return mats.det_A / mats.det_B


def bbar_x_derivative(mats: SolutionMatrices) -> np.ndarray:
    """d/dx of B_bar (same mantissa scaling), from the exact entry identities.

    eps d/dx B[j,0] = -i A[j,0];
    eps d/dx B[j,k] = (i/2t) B[j,0] + i (p_k - x)/(2t) B[j,k];
    d/dx of the column factor contributes i (x - p_k)/(2 t eps).
    """
    t, x, eps = mats.t, mats.x, mats.epsilon
    p = np.asarray(mats.poles, dtype=complex)
    b, a = mats.B, mats.A
    dbar = np.empty_like(mats.B_bar)
    dbar[:, 0] = -1j * a[:, 0] / eps
    db = ((1j / (2 * t)) * b[:, [0]] + (1j * (p - x) / (2 * t))[None, :] * b[:, 1:]) / eps
    fac = np.exp(1j * _bbar_log_factors(p, t, x, eps).imag)[None, :]
    dbar[:, 1:] = fac * (db + (1j * (x - p) / (2 * t * eps))[None, :] * b[:, 1:])
    return dbar


def solution_tau_form(mats: SolutionMatrices) -> complex:
    """Pi u = i eps d/dx log det B_bar, by column-wise expansion of the derivative."""
    _check_singular(mats)
    bbar = mats.B_bar
    dbar = bbar_x_derivative(mats)
    det0, _ = scaled_det(bbar)
    total = 0j
    for k in range(bbar.shape[1]):
        m = bbar.copy()
        m[:, k] = dbar[:, k]
        dk, _ = scaled_det(m)
        total += dk / det0
    return 1j * mats.epsilon * total


def log_det_bbar(mats: SolutionMatrices) -> complex:
    return mats.det_B_bar.log()


# ---------------------------------------------------------------- resolvent

@dataclass
class ResolventConstants:
    a_frak: complex
    V: np.ndarray
    poles: tuple
    t: float
    x: float


def solve_resolvent_constants(mats: SolutionMatrices) -> ResolventConstants:
    """Solve B (a, V_1..V_N)^T = -(A[0,0], ..., A[N,0])^T."""
    _check_singular(mats)
    v = lu_solve(mats.B, -mats.A[:, 0])
    return ResolventConstants(complex(v[0]), v[1:].copy(), mats.poles, mats.t, mats.x)


def _f_values(ctx: PhaseContext, geometry: CutGeometry, const: ResolventConstants, ys, spec, fd_step):
    """f at each y and at y + k*fd_step for k in (-2,-1,1,2), sharing the base integral to y."""
    integrand = CombinationIntegrand(ctx, const.a_frak, const.V)
    out = []
    for y in ys:
        x_in, _ = _entry_and_exit(geometry, min(float(ctx.x.real if isinstance(ctx.x, complex) else ctx.x), y))
        zin = complex(x_in, 0.0)
        ref = float(np.max(ctx.log_weight(np.linspace(x_in, y, 65).astype(complex)).real))
        length = _tail_length(ctx, zin, geometry.direction, ref, 18.0)
        pieces = [Segment(zin + length * geometry.direction, zin)]
        if y != x_in:
            pieces.append(Segment(zin, complex(y, 0.0)))
        base = integrate_path(integrand, pieces, spec)
        vals = []
        for k in (-2, -1, 0, 1, 2):
            yk = y + k * fd_step
            if k == 0:
                mant = base.mantissa[0]
            else:
                extra = integrate_path(integrand, [Segment(complex(y), complex(yk))], spec)
                mant = base.mantissa[0] + extra.rescaled(base.scale)[0]
            lw = complex(ctx.log_weight(np.array([complex(yk)]))[0])
            pref = -1j / (2.0 * ctx.t * ctx.epsilon)
            vals.append(pref * mant * cmath.exp(base.scale - lw))
        out.append(vals)
    return np.array(out)


def f_function(data: RationalData, const: ResolventConstants, y_samples, spec: QuadratureSpec | None = None):
    """f(y) = -(i/(2 t eps)) e^{i h(y)/eps} int_{inf e^{3 pi i/4}}^y (u0 + a + sum V_n/(z-p_n)) W dz."""
    spec = spec or QuadratureSpec(rel_tol=1e-12)
    geometry = build_cut_geometry(data)
    ctx = PhaseContext(geometry.sorted_data(), const.t, const.x, geometry)
    return _f_values(ctx, geometry, const, list(y_samples), spec, 1e-3)[:, 2]


def resolvent_residual(data: RationalData, const: ResolventConstants, t: float, x: float, y_samples,
                       spec: QuadratureSpec | None = None, fd_step: float = 1e-3) -> float:
    """Max over y of |2 i t eps f' + (y - x + 2 t u0) f - (u0 + a + sum V_n/(y - p_n))|.

    f' is the fourth-order central difference with step ``fd_step``.
    """
    spec = spec or QuadratureSpec(rel_tol=1e-12)
    geometry = build_cut_geometry(data)
    sdata = geometry.sorted_data()
    ctx = PhaseContext(sdata, float(t), float(x), geometry)
    ys = [float(y) for y in y_samples]
    vals = _f_values(ctx, geometry, const, ys, spec, fd_step)
    eps = sdata.epsilon
    p = np.asarray(const.poles, dtype=complex)
    worst = 0.0
    for y, v in zip(ys, vals):
        fprime = (v[0] - 8 * v[1] + 8 * v[3] - v[4]) / (12.0 * fd_step)
        u0 = sdata.u0_real(y)
        rhs = u0 + const.a_frak + np.sum(const.V / (y - p))
        res = 2j * t * eps * fprime + (y - x + 2 * t * u0) * v[2] - rhs
        worst = max(worst, abs(res))
    return worst


# --------------------------------------------------------------------- grid

@dataclass
class SolutionSample:
    t: float
    x: float
    Piu: complex
    u: float
    cond_estimate: float
    err_flag: bool
    det_b_normalized: float = float("nan")
    message: str = ""


def solve_point(data: RationalData, t: float, x: float, spec: QuadratureSpec | None = None,
                geometry: CutGeometry | None = None) -> SolutionSample:
    """Pi u and u at one point; t = 0 returns the initial data, t < 0 uses reflection."""
    t = float(t)
    x = float(x)
    if t == 0.0:
        piu = complex(szego_project_initial(data, x))
        return SolutionSample(t, x, piu, 2.0 * piu.real, 1.0, False, 1.0)
    if t < 0:
        refl = reflect_for_negative_time(data)
        s = solve_point(refl, -t, -x, spec)
        # u(t, x) = u_refl(-t, -x); the Hardy part picks up a complex conjugate
        return SolutionSample(t, x, s.Piu.conjugate(), s.u, s.cond_estimate, s.err_flag,
                              s.det_b_normalized, s.message)
    try:
        mats = assemble_matrices(data, t, x, spec, geometry)
        piu = solution_det_ratio(mats)
    except BORationalError as exc:
        return SolutionSample(t, x, complex(math.nan, math.nan), math.nan, math.inf, True, 0.0,
                              f"{type(exc).__name__}: {exc}")
    return SolutionSample(t, x, piu, 2.0 * piu.real, mats.cond_estimate, mats.err_flag, mats.det_b_normalized)


def _solve_chunk(args):
    data, pts, spec = args
    geometries = {}
    out = []
    for t, x in pts:
        geo = None
        if t > 0:
            geo = geometries.get("pos")
            if geo is None:
                geo = geometries["pos"] = build_cut_geometry(data)
        out.append(solve_point(data, t, x, spec, geo))
    return out


def evaluate_u_grid(data: RationalData, t_list, x_list, spec: QuadratureSpec | None = None,
                    threads: int = 1) -> list[SolutionSample]:
    """Solve on the tensor grid t_list x x_list; samples come back sorted by (t, x)."""
    spec = spec or QuadratureSpec()
    pts = sorted((float(t), float(x)) for t in t_list for x in x_list)
    if threads <= 1 or len(pts) < 2:
        samples = _solve_chunk((data, pts, spec))
    else:
        chunks = [pts[i::threads] for i in range(threads)]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_solve_chunk, [(data, c, spec) for c in chunks]))
        samples = [s for part in parts for s in part]
    return sorted(samples, key=lambda s: (s.t, s.x))


def gaussian_c0_integral(data: RationalData, t: float, x: float, spec: QuadratureSpec | None = None) -> complex:
    """int over the solver's C0 of exp(-i (z - x)^2 / (4 t eps)) dz.

    Exercises the C0 contour and the quadrature engine on an integrand whose
    value, exp(-i pi/4) 2 sqrt(pi t eps), is known in closed form.
    """
    spec = spec or QuadratureSpec(rel_tol=1e-13)
    geometry = build_cut_geometry(data)
    sdata = geometry.sorted_data()
    ctx = PhaseContext(sdata, float(t), float(x), geometry)
    contours = build_contours(geometry, classify_indices(sdata), ctx)
    scale = 4.0 * float(t) * sdata.epsilon
    gauss = SimpleIntegrand(lambda z: np.exp(-1j * (z - x) ** 2 / scale))
    return complex(integrate_path(gauss, contours.c0.pieces, spec).value[0])
