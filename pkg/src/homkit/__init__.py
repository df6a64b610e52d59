"""Toolkit for finite relational structures: homomorphisms, cores, duals,
forbidden-pattern languages, and reductions between them."""

from .errors import (
    GirthTooSmallError,
    GuardExceededError,
    HomkitError,
    InvalidStructureError,
    NotATreeError,
    ParseError,
    SignatureMismatchError,
)
from .structures import (
    FULL,
    INJECTIVE,
    PLAIN,
    HomMode,
    Homomorphism,
    Lift,
    Signature,
    Structure,
    canonical_form,
    disjoint_union,
    induced,
    is_isomorphic,
    make_signature,
    product,
    pullback_lift,
    quotient,
    shadow,
)
from .homs import (
    all_homs,
    check_homomorphism,
    core_of,
    hom_equivalent,
    hom_exists,
    hom_images,
    is_core,
)
from .shape import (
    biconnected_components,
    connected_components,
    girth,
    is_forest,
    shortest_cycle,
)
from .duality import forest_family_duals, tree_dual, verify_duality
from .patterns import (
    DecisionOutcome,
    PatternFamily,
    decide_finite_union_csp,
    expand_partial_constraints,
    fp_membership,
    normalize_family,
    union_families,
    verify_shadow_duality,
)
from .snp import (
    SNPFormula,
    eval_snp,
    parse_snp,
    primitivize,
    restriction_report,
    saturate_inequalities,
    serialize_snp,
    to_lifts_full,
    to_lifts_general,
    to_lifts_injective,
    uniformize_arity,
)
from .fv import (
    BasisSignature,
    build_basis,
    build_gprime,
    girth_threshold,
    psi,
    reduce_backward,
    reduce_forward,
    theta,
)
from .sparse import SparseParams, sparse_replace, verify_sparse
from .textio import (
    parse_document,
    parse_family,
    parse_structure,
    serialize_family,
    serialize_structure,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
