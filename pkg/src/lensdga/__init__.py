"""DGA invariants of Legendrian knots in the sphere and in lens spaces."""

from .algebra import (
    DGA,
    CyclicAction,
    EquivariantDGA,
    Generator,
    TameMap,
    apply_tame_map,
    d_squared_check,
    dga_from_json,
    dga_to_json,
    gamma_commute_check,
    grading_consistency_check,
    leibniz_apply,
    orbit_sum,
    quotient_dga,
    stabilize,
    word_degree,
    zp_stabilize,
)
from .diagram import (
    Crossing,
    LabeledDiagram,
    LiftedDiagram,
    Manifold,
    deck_check,
    diagram_from_json,
    diagram_to_json,
    faces,
    lift,
    make_diagram,
    region_word,
    validate,
)
from .discs import AdmissibleDisc, Caps, disc_defect, enumerate_admissible, pole_winding, x_defect
from .dga import (
    boundary_lens_direct,
    boundary_lens_via_lift,
    boundary_s3,
    build_equivariant,
    capping_paths,
    dga_equal,
    grade,
    rotation_number,
)
from .invariants import augmentation_count, compare, find_augmentations, linearized_poincare

__version__ = "0.1.0"
