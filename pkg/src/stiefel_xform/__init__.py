"""Numerical Funk, cosine, and sine transforms on Stiefel manifolds.

A library and CLI for evaluating the orthogonal-fiber (Funk) transform, the
determinant-kernel cosine and sine transforms and their duals, the
vector-exponent kernel transform, and the partial fiber average on Stiefel
manifolds by seeded Monte Carlo, together with the matrix-cone special
functions behind their closed-form constants and a catalog of
machine-checkable identities with statistical tolerance control.
"""

from .errors import (
    AdmissibilityError,
    DegenerateFit,
    DimensionError,
    DomainError,
    NonFiniteSample,
    NotPositiveDefinite,
    OutOfRegion,
    PoleError,
    RankDeficient,
    StiefelXformError,
    UnknownIdentity,
)
from .fields import ScalarField, canonical_frame, field_registry, make_field
from .identities import IdentityReport, fit_constant, list_identities, verify
from .linalg import (
    Frame,
    SpdMatrix,
    cholesky_upper,
    frame_completion,
    gram,
    orth_complement_frame,
    polar_decompose,
    principal_minors,
)
from .manifold import (
    MCConfig,
    MCEstimate,
    RandomSource,
    bistiefel_compose,
    bistiefel_weight,
    derived_seed,
    estimate,
    polar_weight,
    sample_fiber,
    sample_orthogonal,
    sample_stiefel,
)
from .special import (
    ConstantKind,
    ConstantSpec,
    composite_gamma,
    composite_mass_ratio,
    composite_power,
    constant_registry,
    log_siegel_gamma,
    paper_constant,
    reverse_exponent,
    reverse_matrix,
    scalar_mass_ratio,
    siegel_gamma,
)
from .transforms import (
    TransformKind,
    comp_radon,
    composite_cosine,
    cosine,
    dual_cosine,
    dual_funk,
    dual_sine,
    evaluate,
    funk,
    m_transform,
    normalized,
    q_transform,
    sine,
)

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityError", "DegenerateFit", "DimensionError", "DomainError",
    "NonFiniteSample", "NotPositiveDefinite", "OutOfRegion", "PoleError",
    "RankDeficient", "StiefelXformError", "UnknownIdentity",
    "ScalarField", "canonical_frame", "field_registry", "make_field",
    "IdentityReport", "fit_constant", "list_identities", "verify",
    "Frame", "SpdMatrix", "cholesky_upper", "frame_completion", "gram",
    "orth_complement_frame", "polar_decompose", "principal_minors",
    "MCConfig", "MCEstimate", "RandomSource", "bistiefel_compose",
    "bistiefel_weight", "derived_seed", "estimate", "polar_weight",
    "sample_fiber", "sample_orthogonal", "sample_stiefel",
    "ConstantKind", "ConstantSpec", "composite_gamma", "composite_mass_ratio",
    "composite_power", "constant_registry", "log_siegel_gamma",
    "paper_constant", "reverse_exponent", "reverse_matrix",
    "scalar_mass_ratio", "siegel_gamma",
    "TransformKind", "comp_radon", "composite_cosine", "cosine",
    "dual_cosine", "dual_funk", "dual_sine", "evaluate", "funk",
    "m_transform", "normalized", "q_transform", "sine",
    "__version__",
]
