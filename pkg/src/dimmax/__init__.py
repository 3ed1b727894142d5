"""dimmax: maximizing the dimension of digit-Bernoulli measures for the Gauss map.

The continued-fraction digits of a point in (0,1) form an i.i.d. sequence
under a digit-Bernoulli measure mu_p; its dimension h(p)/lambda(p) is
maximized here over finite-alphabet weight simplices, with analytic
gradients, rigorous cylinder brackets, transfer-operator evaluation, tail
power-law analysis, and operator diagnostics.
"""

__version__ = "0.1.0"

from .cfrac import (CylinderGeometry, DigitWord, capped_log_deriv, cf_value,
                    cylinder_geometry, cylinder_interval, digits_of, log_deriv)
from .gradients import GradReport, grad_dimension, grad_entropy, grad_lyapunov
from .measures import (BudgetExceededError, EvalReport, NumericalError, ProbVec,
                       TailFamily, custom_table, digit_integral, dimension, entropy,
                       gauss_kuzmin, lyapunov_by_cylinders, lyapunov_by_operator,
                       power_law, truncate)
from .optimize import (MaximizeResult, OptState, SweepEntry, SweepResult,
                       maximize_on_simplex, sweep_n)
from .tails import (PowerLawFit, RatioAudit, check_ratio_bounds, fit_tail_exponent,
                    tail_table)
from .transfer import (CenteredIndicator, ContractionReport, CorrelationReport,
                       Indicator, NonConvergenceError, OperatorDiscretization,
                       PressureProbe, apply_operator, branch_expansion_means,
                       branch_response_terms, contraction_check, correlation_decay,
                       invariant_functional, measure_mean, pressure_probe,
                       transfer_matrix)

__all__ = [
    "__version__",
    # cfrac
    "DigitWord", "CylinderGeometry", "cf_value", "cylinder_interval",
    "cylinder_geometry", "log_deriv", "capped_log_deriv", "digits_of",
    # measures
    "ProbVec", "TailFamily", "EvalReport", "entropy", "truncate",
    "lyapunov_by_cylinders", "lyapunov_by_operator", "digit_integral", "dimension",
    "power_law", "gauss_kuzmin", "custom_table",
    "BudgetExceededError", "NumericalError",
    # gradients
    "GradReport", "grad_entropy", "grad_lyapunov", "grad_dimension",
    # optimize
    "OptState", "MaximizeResult", "SweepEntry", "SweepResult",
    "maximize_on_simplex", "sweep_n",
    # tails
    "PowerLawFit", "RatioAudit", "fit_tail_exponent", "check_ratio_bounds", "tail_table",
    # transfer
    "OperatorDiscretization", "Indicator", "CenteredIndicator", "PressureProbe",
    "ContractionReport", "CorrelationReport", "NonConvergenceError",
    "apply_operator", "transfer_matrix", "invariant_functional", "measure_mean",
    "branch_expansion_means", "branch_response_terms", "pressure_probe",
    "contraction_check", "correlation_decay",
]
