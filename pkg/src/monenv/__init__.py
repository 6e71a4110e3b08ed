"""Convex and concave envelopes of monomials restricted to a linear wedge."""
from .branching import (
    BranchKind,
    BranchResult,
    ConvergenceError,
    balanced_point,
    children_volumes_ratio,
    children_volumes_value,
    min_volume_branch,
    min_volume_family,
)
from .core import (
    DEFAULT_TOLERANCES,
    ConeParams,
    InvalidInstanceError,
    MonomialInstance,
    Tolerances,
    WedgeParams,
    cone_params,
    eval_f,
    identities_ok,
    identity_residuals,
    make_instance,
    validate,
    wedge_params,
    wedge_transport,
)
from .envelopes import (
    EnvelopeKind,
    MembershipVerdict,
    in_conv_orthant,
    in_hull_2d,
    in_lower_env_2d,
    in_upper_env_wedge,
    in_Y,
    lower_env_value,
    membership,
    sample_feasible,
    upper_env_value,
)
from .geometry2d import (
    CrossSection,
    VolumeReport,
    area,
    bounding_box,
    cross_section,
    volume,
    volume_closed_form,
    volume_quadrature,
)
from .oracle import (
    McCormickBox,
    McEstimate,
    graph_combination_sampler,
    mc_volume,
    mccormick_bounds,
    planar_section_area,
    tightness_comparison,
)

__version__ = "0.1.0"
