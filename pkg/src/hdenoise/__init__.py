"""Identification of bounded analytic functions from noisy samples in the unit disk."""
from .disk_geometry import (
    Arc,
    BoundaryPoint,
    DiskPoint,
    ZeroSequence,
    blaschke_product,
    boundary_arc,
    poisson_kernel,
    rho_sigma,
    stolz_contains,
    v_function,
)
from .function_models import (
    BoundaryFunction,
    FiniteBlaschke,
    QuadratureSpec,
    RationalFunction,
    TaylorPolynomial,
    besov_norm,
    dirichlet_energy,
    evaluate,
    maximal_function,
    poisson_extend,
    stock_family,
)
from .geometric_measure import (
    ArcUnion,
    CantorSet,
    ConvergenceError,
    GaugeFunction,
    alpha_capacity,
    certify_theorem1_set,
    equilibrium_measure,
    hausdorff_content,
)
from .identification import (
    FitConfig,
    ObservationSeries,
    RankDeficientError,
    consistency_experiment,
    discrimination_report,
    fit_model,
    simulate_observations,
)
from .measure_equivalence import (
    Gaussian2D,
    GridDensity,
    NoNoise,
    UniformDisk,
    hellinger_affinity,
    kakutani_product,
)
from .sampling_design import (
    SamplingPlan,
    blaschke_sum,
    generate_dyadic,
    generate_radial_ray,
    separation_sum,
    validate_coverage,
)

__version__ = "0.1.0"
