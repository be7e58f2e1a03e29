"""Classical and non-elastic billiards on strictly convex tables."""
from .analysis import (
    BasinGrid,
    ClassifierParams,
    Fate,
    FateKind,
    MapConfig,
    OrbitRecord,
    basin_grid,
    classify_fate,
    iterate,
    rotation_number,
)
from .classical import (
    PhaseState,
    billiard_derivative,
    billiard_inverse,
    billiard_step,
    measure_density,
)
from .curves import (
    ConstantLine,
    EllipseLevel,
    caustic_residual,
    ellipse_first_integral,
    g_slope,
    g_value,
    lower_bound_l,
    solve_beta0,
    transition_quantities,
)
from .geometry import Circle, CosineRadius, Ellipse, chord_length, point_at, radius_of_curvature
from .nonelastic import (
    ConeBasis,
    LinearLaw,
    TanhLaw,
    certify_strip,
    cone_basis_matrix,
    contraction_threshold,
    h_apply,
    h_slope,
    perturbed_derivative,
    perturbed_step,
    positivity_check,
)

__version__ = "0.1.0"
