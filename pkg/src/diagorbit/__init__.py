"""Top-level package for diagorbit."""

from __future__ import annotations

from importlib.metadata import PackageNotFoundError, version

from . import exceptions
from .diagorbit import AnalysisRequest, Config, Tolerances, read_config, run, write_config
from .families import (
    FAMILIES,
    Rank1Term,
    certificate_holds,
    gen_Kn,
    gen_Kn_eps,
    gen_Kn_eps_symbolic,
    gen_Kn_prime,
    gen_L,
    gen_L_eps,
    gen_W,
    generate,
    kn_lower_bound_certificate,
    kn_prime_decomposition,
    l_rank4_decomposition,
    reconstruct,
)
from .invariants import (
    CovariantValue,
    cayley_delta,
    covariant_coefficients,
    f,
    f_eval,
    h,
    h_eval,
    hessian_eval,
    r_eval,
    tangle,
    tangle3,
    tangle4,
    tangle_covariant,
)
from .latent_class import (
    ModelParams,
    ModelReport,
    check_membership,
    counts_to_frequencies,
    marginals,
    minors,
    parameterize,
    recover_params,
)
from .membership import (
    CommutationReport,
    Decomposition,
    MembershipReport,
    SemiCanonicalForm,
    classify,
    commutation_residuals,
    decompose,
    orbit_verdict,
    semi_canonical,
    slice_nonsingular,
)
from .print_versions import show_versions
from .real_classification import (
    SignatureReport,
    component_baseline,
    component_descriptor,
    component_representatives,
    factorizes_over_reals,
    gen_Jk,
    signature,
)
from .scalar_poly import GaussianRational, MultiPoly, PolyMatrix, hessian, poly_det
from .tensor_core import (
    GroupElement,
    Tensor3,
    act,
    contract,
    diag_tensor,
    flatten,
    multilinear_rank,
    random_group_element,
    rank1_tensor,
    unit_tensor,
)

try:
    __version__ = version("diagorbit")
except PackageNotFoundError:
    __version__ = "999"

__all__ = [
    "FAMILIES",
    "AnalysisRequest",
    "CommutationReport",
    "Config",
    "CovariantValue",
    "Decomposition",
    "GaussianRational",
    "GroupElement",
    "MembershipReport",
    "ModelParams",
    "ModelReport",
    "MultiPoly",
    "PolyMatrix",
    "Rank1Term",
    "SemiCanonicalForm",
    "SignatureReport",
    "Tensor3",
    "Tolerances",
    "act",
    "cayley_delta",
    "certificate_holds",
    "check_membership",
    "classify",
    "commutation_residuals",
    "component_baseline",
    "component_descriptor",
    "component_representatives",
    "contract",
    "counts_to_frequencies",
    "covariant_coefficients",
    "decompose",
    "diag_tensor",
    "exceptions",
    "f",
    "f_eval",
    "factorizes_over_reals",
    "flatten",
    "gen_Jk",
    "gen_Kn",
    "gen_Kn_eps",
    "gen_Kn_eps_symbolic",
    "gen_Kn_prime",
    "gen_L",
    "gen_L_eps",
    "gen_W",
    "generate",
    "h",
    "h_eval",
    "hessian",
    "hessian_eval",
    "kn_lower_bound_certificate",
    "kn_prime_decomposition",
    "l_rank4_decomposition",
    "marginals",
    "minors",
    "multilinear_rank",
    "orbit_verdict",
    "parameterize",
    "poly_det",
    "r_eval",
    "random_group_element",
    "rank1_tensor",
    "read_config",
    "recover_params",
    "reconstruct",
    "run",
    "semi_canonical",
    "show_versions",
    "signature",
    "slice_nonsingular",
    "tangle",
    "tangle3",
    "tangle4",
    "tangle_covariant",
    "unit_tensor",
    "write_config",
    "__version__",
]
