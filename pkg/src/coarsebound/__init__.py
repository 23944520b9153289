"""Bounded coarse structures attached to families of pseudometrics."""

__version__ = "0.1.0"

from .coarse import (
    BoundCertificate,
    Envelope,
    cert_compose,
    cert_diagonal,
    cert_inverse,
    cert_union,
    certificate_pairs,
    certify_ball,
    certify_box,
    certify_paper_e,
    envelope,
    envelope_soundness_check,
    properness_check,
    strongly_generates_check,
    verify_certificate,
)
from .counterexamples import DefeatReport, Witness, defeat_lattice, defeat_product
from .entourages import (
    BoundProfile,
    Compose,
    Diagonal,
    Entourage,
    Explicit,
    Inverse,
    MetricBall,
    PaperE,
    ProductBox,
    SectionResult,
    SubsetResult,
    Union,
    compose,
    contains,
    invert,
    pairs_in,
    section,
    subset_on_window,
    unite,
)
from .errors import (
    BudgetExceededError,
    CertificateError,
    CoarseError,
    KindMismatchError,
    SpecError,
    WindowRequiredError,
)
from .model import (
    Atom,
    Budget,
    CoordinateAbs,
    Discrete,
    ExplicitSet,
    FunctionPseudometric,
    LatticeBox,
    LatticeF0,
    LatticeFn,
    LatticePoint,
    Pseudometric,
    PseudometricFamily,
    SumWithDiscrete,
    VectorGrid,
    VectorPoint,
    as_rational,
    check_pseudometric_axioms,
    evaluate,
    lattice_family_for,
    metrize,
    nat_ceil,
)
from .reports import CheckReport, Evidence
