"""Exact finite-precision arithmetic for Lubin-Tate groups, multivariable coefficient rings,
etale phi-modules, monoid presentations and Hahn series."""

from .coinduction import TensorAlgebra, coind_finite_field
from .errors import (
    Inconclusive,
    InsufficientPrecision,
    NotAUnit,
    NotComposable,
    NotEtale,
    NotIntegral,
    PlecticaError,
    PreconditionFailed,
    PrecisionOverflow,
    SpecMismatch,
    TruncationLoss,
    Unsupported,
)
from .hahn import HahnSeries, completion_classify, hahn_arith, hahn_norm, hahn_valuation
from .laurent import (
    MultivarLaurent,
    RingSpecDelta,
    act_gamma,
    act_glectic_substitution,
    act_permutation,
    act_phi,
    oe_arith,
    oe_inv,
    reduce_mod_pi,
    weak_membership,
)
from .lubin_tate import LubinTatePoly, lt_add_law, lt_check_axioms, lt_inverse, lt_scalar
from .monoids import (
    GlecticSigma,
    NSubmonoid,
    PlecticElement,
    SemidirectPresentation,
    glectic_act,
    minimal_cosets,
    minimal_relations,
    plectic_act,
    sd_normal_form,
)
from .padic import PadicElement, PadicRingSpec, padic_arith, padic_inv, padic_valuation
from .phigamma import (
    PhiGammaModule,
    base_change,
    build_SD,
    fixed_points,
    module_direct_sum,
    module_dual,
    module_tensor,
    module_validate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
