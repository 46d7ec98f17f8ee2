"""Composition operators with linear fractional symbols on H^2(B_N) and A^2_s(B_N)."""

from .boundary import (
    ContactSet,
    JCData,
    angular_derivative,
    contact_points,
    is_compact_single,
    same_data,
    sup_norm,
)
from .decide import (
    Decision,
    Verdict,
    audit_necessary_conditions,
    decide_adjoint_commutation,
    decide_difference,
)
from .errors import *  # noqa: F403
from .galerkin import (
    TruncationBasis,
    TruncationMatrix,
    ball_quadrature,
    kernel_coefficients,
    monomial_norms,
    singular_values,
    tail_norm_probe,
    truncation_matrix,
)
from .kernel import (
    BoundReport,
    CurvePoint,
    combo_necessary_condition,
    curve_gamma,
    curve_gamma_k,
    curve_gamma_kr,
    curve_gamma_M,
    essnorm_lower_bound_combo,
    essnorm_lower_bound_diff,
    kernel_eval,
    kernel_quotient,
    limit_along_curve,
    mixed_kernel_curve_limit,
    mw_quotient_lower_bound,
    pseudo_distance,
)
from .lfm import (
    LinearFractionalMap,
    TForm,
    adjoint_map,
    compose,
    evaluate,
    make_lfm,
    normalize_t_form,
    projectively_equal,
    shift_automorphism,
    taylor_expand_at_e1,
    unitary_conjugate,
)
from .space import SpaceSpec

__version__ = "0.1.0"
