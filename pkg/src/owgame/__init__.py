"""Nash equilibrium of the n-trader discrete execution game with exponential
transient impact, and its high-frequency limits."""

from .asymptotics import (
    cluster_points,
    cost_sweep,
    halfgrid_convergence,
    inventory_path,
    oscillation_scan,
    quadform_limit_check,
    quadform_limits,
    rate_diagnostic,
    theta_zero_cost_limits,
)
from .continuous import continuous_cost, continuous_limit, eval_f, eval_g
from .costs import cost_equilibrium_quadform, cost_of_profile, cost_split
from .matrices import build_halfgrid, build_kernel, kernel_operator, positivity_check
from .model import GridSpec, ModelParams, NumericalError, ParameterError, derived_scalars
from .solver import (
    EquilibriumVectors,
    StrategyProfile,
    assemble_profile,
    closed_form_equilibrium,
    dense_equilibrium,
    solve_equilibrium,
    solve_halfgrid,
)
from .verification import AuditReport, best_response_probe, full_audit, kkt_audit

__version__ = "0.1.0"
