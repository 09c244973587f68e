"""Generalized (G-)metric spaces and common fixed points of mapping families."""
from .contractions import (
    CoefficientSchedule,
    MappingFamily,
    PhiFunction,
    affine_family,
    check_condition_abbas,
    check_condition_vetro,
    constant_family,
    identity_phi,
    phi_membership_check,
    power_family,
    r_abbas,
    r_abbas_phi,
    r_vetro,
    root_phi,
    scale_phi,
    schedule_from_points,
    table_family,
)
from .errors import (
    BudgetError,
    DomainError,
    HypothesisError,
    ModeError,
    NonConvergenceError,
    ParameterError,
    SingularityError,
    StaleHypothesesError,
)
from .gmetric_core import (
    ContinuousGSpace,
    FiniteGSpace,
    GSpace,
    Interval,
    check_axioms,
    check_symmetric,
    discrete_g,
    from_metric_max,
    from_metric_sum,
    real_max_space,
    real_sum_space,
)
from .sequences import (
    LambdaCertificate,
    amgm_tail_bound,
    beta_from_orbit,
    check_alpha_series,
    check_lambda_sequence,
    find_alpha_certificate,
    find_lambda_certificate,
    lambda_to_alpha,
)
from .solver import (
    apriori_vs_observed,
    cauchy_diagnostic,
    check_hypotheses,
    fixed_point_transfer,
    picard_orbit,
    solve_common_fixed_point,
    uniqueness_probe,
)
