"""Reach control on simplices.

Analysis of when an affine system can be steered out of a simplex through
a designated exit facet, synthesis of a piecewise affine feedback with a
discrete supervisor for the cases continuous feedback cannot handle, and
closed-loop verification by simulation.
"""

from .analysis import (
    AffineSystem,
    EquilibriumSet,
    ProblemInstance,
    ReachControlIndices,
    affine_system,
    analyze,
    check_necessary,
    classify_route,
    compute_G,
    compute_O,
    max_independent_selection,
    reach_control_indices,
)
from .errors import (
    AssumptionViolated,
    ConstructionFailed,
    DegenerateSimplex,
    DimensionTooLarge,
    EmptyIndexSet,
    InfeasibleInvariance,
    NumericalFailure,
    ParseError,
    PointOutsideDomain,
    PointOutsideSimplex,
    ReachControlError,
    SynthesisFailed,
    UnsupportedDimension,
)
from .estimator import ReachControlSynthesizer
from .geometry import (
    Cone,
    Face,
    Simplex,
    barycentric,
    build_simplex,
    cone_at,
    face_of,
    in_cone,
    vertex_cone,
)
from .polylin import (
    IneqSystem,
    Ray,
    SubspaceBasis,
    extreme_rays,
    feasible_point,
    image_basis,
    is_nonsingular_m_matrix,
    nonzero_cone_point,
    null_basis,
    rank,
)
from .problemfile import Problem, load_problem, parse_problem, save_problem, serialize_problem
from .simulation import SimulationTrace, VerificationReport, simulate, verify_rcp
from .synthesis import (
    AffinePiece,
    PwaController,
    SubdivisionRecord,
    affine_from_vertex_controls,
    gamma_coefficients,
    parse_controller,
    select_lambda,
    serialize_controller,
    subdivide,
    supervisor_select,
    synthesize,
    vertex_controls_for_piece,
)

__version__ = "0.1.0"
