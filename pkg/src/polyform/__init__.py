"""Minimal-energy point configurations, their polyhedra, symmetries and bounds."""

from .errors import (
    CoincidentPoints,
    ConstraintMismatch,
    DegenerateHull,
    DuplicatePoints,
    InfiniteGroup,
    PolyformError,
    UnsupportedGradient,
)
from .geometry import (
    Configuration,
    Constraint,
    Polyhedron,
    ShellDecomposition,
    check_euler,
    combinatorial_signature,
    convex_hull,
    dual,
    mackay_icosahedron,
    platonic,
    shell_decomposition,
    truncated_icosahedron,
)
from .energies import (
    AtiyahDet,
    AtiyahDeterminant,
    CentralCoulomb,
    LennardJones,
    MaximinDistance,
    MonopoleLinear,
    RieszSphere,
    SumSeparation,
    TriangleApprox,
    atiyah_determinant,
    energy,
    gradient,
    min_pair_distance,
    three_point_energy,
)
from .optimize import (
    CensusEntry,
    MinimizationRun,
    OptimizerSettings,
    local_minimize,
    minima_census,
    multi_start,
    tammes_solve,
)
from .symmetry import (
    SchoenfliesLabel,
    SymmetryElement,
    SymmetryReport,
    align_principal,
    detect_point_group,
    group_order,
)
from .analysis import (
    BoundReport,
    FullereneReport,
    alignment_discrepancy,
    bound_report,
    central_lower_bound,
    compare_combinatorics,
    deltahedron_census,
    geom_energy_fit,
    monopole_estimates,
    toth_lower_bound,
    validate_fullerene,
)

__version__ = "0.1.0"
