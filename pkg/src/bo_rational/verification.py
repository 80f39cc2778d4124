"""Self-checks behind ``bo-rational verify``.

Each suite returns :class:`Check` records holding the measured value next to
its tolerance.  Suites call only public functions and compare them with
closed forms or with a second, independent route.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .data import szego_project_initial, validate_rational_data
from .msoliton import m_soliton_oracle, one_soliton_reduction, soliton_exact
from .quadrature import QuadratureSpec
from .scattering import (INITIAL_L2_NORM, MINUS_SOLITON, SOLITON, jost_m_minus, jost_ode_residual,
                         plancherel_norm_check, renormalized_profile, residual_grid, scattering_residual)
from .solver import (assemble_matrices, evaluate_u_grid, gaussian_c0_integral, resolvent_residual,
                     solution_det_ratio, solution_tau_form, solve_point, solve_resolvent_constants)


@dataclass(frozen=True)
class Check:
    name: str
    measured: float
    tolerance: float
    passed: bool
    relation: str = "<="

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: measured={self.measured:.6g} {self.relation} {self.tolerance:.6g}"


def _le(name, measured, tol) -> Check:
    return Check(name, float(measured), float(tol), bool(measured <= tol))


def _ge(name, measured, tol) -> Check:
    return Check(name, float(measured), float(tol), bool(measured >= tol), ">=")


def soliton_suite(threads: int = 1, spec: QuadratureSpec | None = None) -> list[Check]:
    ts = [0.5, 1.0, 2.0, 5.0]
    xs = np.arange(-40, 41) * 0.25
    samples = evaluate_u_grid(SOLITON, ts, xs, spec, threads)
    err = max(abs(s.u - float(soliton_exact(s.t, s.x))) for s in samples)
    det_min = min(s.det_b_normalized for s in samples)
    return [_le("soliton max abs error", err, 1e-8), _ge("soliton min normalized |det B|", det_min, 1e-6)]


def msoliton_suite(threads: int = 1, spec: QuadratureSpec | None = None) -> list[Check]:
    data = validate_rational_data([1j], [-1j], 0.5)
    worst = 0.0
    for t in (0.5, 1.0, 2.0):
        for x in (-2.0, 0.5, 3.0):
            ref = m_soliton_oracle(2, t, x).u
            got = solve_point(data, t, x, spec).u
            worst = max(worst, abs(got - ref) / abs(ref))
    red = max(abs(one_soliton_reduction(t, x) - float(soliton_exact(t, x)))
              for t in (0.5, 1.0, 2.0) for x in (-3.0, 0.0, 1.5, 4.0))
    return [_le("M=2 oracle vs solver, max rel error", worst, 1e-6),
            _le("M=1 reduction vs soliton, max abs error", red, 1e-9)]


def formulas_suite(threads: int = 1, spec: QuadratureSpec | None = None, seed: int = 2024) -> list[Check]:
    rng = np.random.default_rng(seed)
    gauss = 0.0
    for _ in range(20):
        t, x = rng.uniform(0.05, 20.0), rng.uniform(-10.0, 10.0)
        ref = cmath.exp(-0.25j * math.pi) * 2.0 * math.sqrt(math.pi * t)
        gauss = max(gauss, abs(gaussian_c0_integral(MINUS_SOLITON, t, x) - ref) / abs(ref))
    data = validate_rational_data([0.5 + 1j, -1 + 0.6j], [0.3 - 0.4j, 0.5j], 0.5)
    ratio_tau = 0.0
    for t, x in ((0.3, -1.0), (1.0, 0.5), (2.5, 2.0)):
        mats = assemble_matrices(data, t, x, spec)
        r = solution_det_ratio(mats)
        ratio_tau = max(ratio_tau, abs(r - solution_tau_form(mats)) / (1.0 + abs(r)))
    xs = np.linspace(-5.0, 5.0, 21)
    devs = []
    for t in (1e-1, 1e-2, 1e-3):
        devs.append(max(abs(solve_point(MINUS_SOLITON, t, x, spec).Piu - szego_project_initial(MINUS_SOLITON, x))
                        for x in xs))
    decreasing = devs[0] > devs[1] > devs[2]
    mats = assemble_matrices(SOLITON, 1.0, 0.3, QuadratureSpec(rel_tol=1e-13))
    const = solve_resolvent_constants(mats)
    piu = solution_det_ratio(mats)
    a_err = abs(const.a_frak + piu) / abs(piu)
    f_res = resolvent_residual(SOLITON, const, 1.0, 0.3, [-2.0, -0.5, 0.7, 2.5])
    return [
        _le("Gaussian C0 integral, max rel error", gauss, 1e-10),
        _le("det ratio vs tau form, max scaled difference", ratio_tau, 1e-8),
        Check("t->0 deviations strictly decreasing", float(decreasing), 1.0, decreasing, "=="),
        _le("t->0 deviation at t=1e-3", devs[-1], 1e-2),
        _le("resolvent constant vs -Pi u, rel error", a_err, 1e-10),
        _le("f equation residual", f_res, 1e-6),
    ]


def spectral_suite(threads: int = 1, spec: QuadratureSpec | None = None) -> list[Check]:
    lhs, rhs = plancherel_norm_check()
    out = [_le("norm identity |lhs - pi|", abs(lhs - math.pi), 1e-15),
           _le("norm identity |rhs - pi|", abs(rhs - math.pi), 1e-6)]
    for lam in (0.5, 1.0, 2.0):
        norm = abs(cmath.exp(-1j * lam * -1e3) * jost_m_minus(-1e3, lam) - 1.0)
        ends = abs(abs(jost_m_minus(1e3, lam)) - abs(jost_m_minus(-1e3, lam)))
        ode = max(jost_ode_residual(x, lam) for x in np.linspace(-10.0, 10.0, 21))
        out += [_le(f"Jost normalization at x=-1e3, lambda={lam:g}", norm, 1e-2),
                _le(f"Jost end moduli difference, lambda={lam:g}", ends, 1e-2),
                _le(f"Jost ODE residual, lambda={lam:g}", ode, 1e-6)]
    return out


def scattering_suite(threads: int = 1, spec: QuadratureSpec | None = None) -> list[Check]:
    ys = np.round(np.arange(-3.0, -0.3 + 1e-9, 0.1), 10)
    sup = []
    residuals, controls = [], []
    for t in (25.0, 100.0, 400.0):
        sup.append(max(r.deviation for r in renormalized_profile(t, ys, spec, threads)))
        samples = evaluate_u_grid(MINUS_SOLITON, [t], residual_grid(t), spec, threads)
        residuals.append(scattering_residual(t, samples=samples).residual / INITIAL_L2_NORM)
        controls.append(scattering_residual(t, samples=samples, psi_hat_fn=None).residual / INITIAL_L2_NORM)
    prof_dec = sup[0] > sup[1] > sup[2]
    res_dec = residuals[0] >= residuals[1] >= residuals[2]
    return [
        Check("profile sup deviation decreasing in t", float(prof_dec), 1.0, prof_dec, "=="),
        _le("profile sup deviation at t=400", sup[-1], 0.05),
        Check("scattering residual nonincreasing in t", float(res_dec), 1.0, res_dec, "=="),
        _le("scattering residual / ||u0|| at t=400", residuals[-1], 0.15),
        _ge("zero-target control / ||u0||, minimum over t", min(controls), 0.9),
    ]


SUITES: dict[str, Callable[..., list[Check]]] = {
    "soliton": soliton_suite,
    "msoliton": msoliton_suite,
    "formulas": formulas_suite,
    "spectral": spectral_suite,
    "scattering": scattering_suite,
}


def run_suite(name: str, threads: int = 1, spec: QuadratureSpec | None = None) -> list[Check]:
    if name == "all":
        return [c for n in SUITES for c in SUITES[n](threads, spec)]
    return SUITES[name](threads, spec)

