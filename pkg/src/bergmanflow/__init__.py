"""Iterated weighted Bergman kernels on bounded domains and their KE limits."""

from .domains import (
    Domain,
    QuadratureGrid,
    SublevelDomain,
    build_radial_grid,
    build_tensor_grid,
    domain_from_json,
    grid_to_csv,
    levi_check,
    make_annulus,
    make_ball,
    make_disc,
    make_hartogs_fiber,
    sublevel,
)
from .engine import (
    GramConditionError,
    GramSystem,
    LogDensityField,
    SectionBasis,
    assemble_gram,
    extremal_check,
    field_to_csv,
    kernel_diagonal,
    laurent_basis,
    monomial_basis,
    weighted_disc_kernel_closed_form,
)
from .flow import (
    ConvergenceReport,
    IterationState,
    NormalizedKernel,
    default_degree_schedule,
    evaluate_log_kappa,
    init_state,
    normalized,
    run,
    sandwich_diagnostic,
    step,
)
from .ke import (
    ModelMetricField,
    VolumeFormField,
    einstein_residual,
    exhaustion_limit,
    ke_annulus,
    ke_ball,
    ke_disc,
    ke_reference_for,
    model_metric_volume,
    quasi_isometry_ratio,
    yau_schwarz_check,
)
from .boundary import (
    FeffermanFit,
    boundary_coefficient,
    fit_boundary_coefficient,
    j_functional,
    lambda_to_lebesgue_log,
)
from .family import (
    FiberedDomain,
    RelativeLogDensity,
    fiber_ke_log_density,
    fiber_kernels,
    hartogs_family,
    named_profile,
    psh_test,
)
from .fd import complex_hessian, min_hessian_eigenvalue

__version__ = "0.1.0"
