"""Exact coverage and expected length of the model-averaged confidence interval
centred on a GIC-weighted average of two nested linear-regression estimates."""

__version__ = "0.1.0"

from .asymptotic import (
    AsymptoticConfig,
    c_min_star,
    cp_star,
    hc_figure_curves,
    rho_bar_to_rho_hc,
    rho_hc_to_rho_bar,
    sel_star,
    sweep_curve_star,
)
from .errors import DegenerateError, DomainError, ProblemFileError, QuadratureError, SingularDesignError
from .exact import (
    CurveRow,
    CurveTable,
    MinCoverageResult,
    ParamPoint,
    coverage_probability,
    ell,
    min_coverage,
    scaled_expected_length,
    sweep_curve,
    u,
)
from .montecarlo import (
    McSettings,
    RegressionTemplate,
    engineered_template,
    mc_coverage,
    mc_regression_end_to_end,
    mc_sel,
    sample_joint,
)
from .numeric import QuadratureSpec
from .testbed import (
    DerivedScalars,
    IntervalResult,
    RegressionProblem,
    bba_interval,
    derived_scalars,
    fit,
    read_problem,
    rss1_identity_check,
    theta_hat_1,
)
from .weights import TestbedConfig, k, k_star, r, r_star, w1, w1_star
