"""Closed-form Benjamin-Ono solutions for rational initial data, evaluated by contour quadrature."""
from .data import RationalData, classify_indices, szego_project_initial, validate_rational_data
from .errors import BORationalError, ConfigError, DomainError, GeometryInfeasible, SingularB
from .msoliton import loop_row, m_soliton_oracle, one_soliton_reduction, soliton_exact
from .quadrature import QuadratureSpec
from .scattering import (MINUS_SOLITON, SOLITON, ProfileRecord, conserved_quantities, free_evolution_profile,
                         jost_m_minus, plancherel_norm_check, renormalized_profile, scattering_residual)
from .solver import (SolutionSample, assemble_matrices, evaluate_u_grid, solution_det_ratio, solution_tau_form,
                     solve_point)
from .special import alpha_lambda, beta_lambda, expint_Ei, psi_hat

__version__ = "0.1.0"
