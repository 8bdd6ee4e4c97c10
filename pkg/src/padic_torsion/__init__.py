"""Z_p-module structure of Gal(M/K) for the maximal abelian p-extension M of
a quadratic field K unramified outside p: ray class stabilization, Leopoldt
certification, torsion extraction, and Cohen-Lenstra survey tooling."""

from .linalg import (
    AbelianPresentation,
    InfiniteGroup,
    IntMatrix,
    InvariantFactors,
    invariant_factors,
    p_part,
    quotient_presentation,
    smith_normal_form,
)
from .quadfield import (
    BoundExceeded,
    ClassGroupData,
    DegenerateD,
    NotRealField,
    NotSquarefree,
    QuadField,
    QuadIdeal,
    RingElement,
    class_group,
    class_number,
    fundamental_unit_mod,
    fundamental_unit_norm,
    make_field,
    prime_splitting,
    torsion_units,
)
from .resunits import (
    LocalFactor,
    NotAUnit,
    ResidueUnitGroup,
    discrete_log,
    exponentiate,
    residue_unit_group,
    theoretical_order,
)
from .rayclass import (
    InvariantViolation,
    NonDivisible,
    NoStabilization,
    RayClassLevel,
    TorsionReport,
    kernel_order,
    match_stabilization_pattern,
    ray_class_p_part,
    start_level,
    torsion_structure,
)
from .heuristics import (
    PGroupShape,
    SplittingProfile,
    adjusted_average_p3,
    aut_order_abelian_p_group,
    cl_average,
    w_ideal,
)
from .harness import (
    FrequencyRow,
    SurveyConfig,
    emit_table,
    load_table,
    run_survey,
    squarefree_stream,
    survey_field,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
