"""Continuous-stage Runge-Kutta(-Nystrom) integrators discretised as HBVM(k, s)."""
from .integrator import IntegrationPlan, Trajectory, energy_drift, integrate, order_study
from .legendre import LegendreBasis, SpectralMatrices, build_spectral, eval_basis, eval_integrals, xi
from .problems import (
    FirstOrderProblem,
    InitialData,
    KthOrderProblem,
    SecondOrderGeneralProblem,
    SecondOrderSpecialProblem,
    builtin,
    registry_names,
)
from .quadrature import QuadratureRule, gauss_rule, integrate_fn
from .solver import (
    ConvergenceError,
    DenseOutput,
    NonFiniteError,
    SolverConfig,
    StepResult,
    dense_eval,
    kth_update_coeffs,
    step,
    step_1st,
    step_2nd_general,
    step_2nd_special,
    step_kth,
)
from .tableau import build_operators, eval_a_s, eval_abar_s, operator_residuals, rk_tableau, rkn_tableau

__version__ = "0.1.0"

__all__ = [
    "IntegrationPlan",
    "Trajectory",
    "energy_drift",
    "integrate",
    "order_study",
    "LegendreBasis",
    "SpectralMatrices",
    "build_spectral",
    "eval_basis",
    "eval_integrals",
    "xi",
    "FirstOrderProblem",
    "InitialData",
    "KthOrderProblem",
    "SecondOrderGeneralProblem",
    "SecondOrderSpecialProblem",
    "builtin",
    "registry_names",
    "QuadratureRule",
    "gauss_rule",
    "integrate_fn",
    "ConvergenceError",
    "DenseOutput",
    "NonFiniteError",
    "SolverConfig",
    "StepResult",
    "dense_eval",
    "kth_update_coeffs",
    "step",
    "step_1st",
    "step_2nd_general",
    "step_2nd_special",
    "step_kth",
    "build_operators",
    "eval_a_s",
    "eval_abar_s",
    "operator_residuals",
    "rk_tableau",
    "rkn_tableau",
]
