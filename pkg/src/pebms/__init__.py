"""Partial extended b-metric spaces as executable objects.

Matrix-backed and closed-form generalized metric spaces, brute-force
axiom verification with violation witnesses, Picard fixed-point iteration
under three contraction families with certified error bounds, a gallery
of worked examples checked against their claims, and a seeded fuzzer that
uses the axiom checker as an oracle.
"""

__version__ = "0.1.0"

from .axioms import (
    A1,
    A2,
    A3,
    A4,
    AxiomReport,
    Violation,
    check_axioms,
    check_axioms_sampled,
    minimal_theta,
    recheck_violation,
    verify_reductions,
)
from .errors import (
    ConfigurationError,
    DomainError,
    ExpressionError,
    InfeasibleThetaError,
    MutationImpossibleError,
    UnknownExampleError,
)
from .fixed_point import (
    BANACH,
    KANNAN,
    MODIFIED_KANNAN,
    ContractionSpec,
    ConvergenceCertificate,
    IterationTrace,
    PicardResult,
    banach_tail_bound,
    build_trace,
    kannan_step_bound,
    modkannan_bounds,
    picard_solve,
    uniqueness_probe,
    verify_contraction,
    verify_theta_condition,
)
from .fuzz import CounterexampleReport, FuzzConfig, fuzz_campaign, gen_space, mutate_theta, shrink_space
from .gallery import GALLERY_IDS, GalleryEntry, build_example, run_gallery
from .grammar import Expr
from .sequences import PointSequence, SelfMap, cauchy_tail, converges_to, orbit, zero_cauchy_tail
from .spaces import (
    AnalyticSpace,
    AxiomProfile,
    FiniteSpace,
    eval_p,
    eval_theta,
    induced_ebm,
    sample_grid,
)

__all__ = [
    "__version__",
    "A1",
    "A2",
    "A3",
    "A4",
    "AnalyticSpace",
    "AxiomProfile",
    "AxiomReport",
    "BANACH",
    "ConfigurationError",
    "ContractionSpec",
    "ConvergenceCertificate",
    "CounterexampleReport",
    "DomainError",
    "Expr",
    "ExpressionError",
    "FiniteSpace",
    "FuzzConfig",
    "GALLERY_IDS",
    "GalleryEntry",
    "InfeasibleThetaError",
    "IterationTrace",
    "KANNAN",
    "MODIFIED_KANNAN",
    "MutationImpossibleError",
    "PicardResult",
    "PointSequence",
    "SelfMap",
    "UnknownExampleError",
    "Violation",
    "banach_tail_bound",
    "build_example",
    "build_trace",
    "cauchy_tail",
    "check_axioms",
    "check_axioms_sampled",
    "converges_to",
    "eval_p",
    "eval_theta",
    "fuzz_campaign",
    "gen_space",
    "induced_ebm",
    "kannan_step_bound",
    "minimal_theta",
    "modkannan_bounds",
    "mutate_theta",
    "orbit",
    "picard_solve",
    "recheck_violation",
    "run_gallery",
    "sample_grid",
    "shrink_space",
    "uniqueness_probe",
    "verify_contraction",
    "verify_reductions",
    "verify_theta_condition",
    "zero_cauchy_tail",
]
