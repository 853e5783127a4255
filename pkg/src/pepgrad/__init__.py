"""Exact worst-case rates of fixed-step gradient descent on L-smooth functions."""
from .bounds import (
    BoundReport,
    ConjecturalBound,
    bound_b3,
    bound_conjecture,
    bound_drori,
    bound_main,
    bound_nesterov,
    bound_report,
    bound_taylor,
    optimal_step,
    per_step_weight,
)
from .certify import Certificate, CertificateReport, aggregate_identity, build_certificate, verify_certificate
from .core import (
    TOL_EQ,
    DimensionMismatch,
    IterateTriple,
    NotInterpolable,
    NotPsd,
    OracleError,
    PepError,
    RegimeClass,
    RegimeError,
    SmoothProblemSpec,
    StepSchedule,
    classify_regime,
)
from .interp import TripleSet, check_interpolation, descent_lemma_check, extension_minimum, interp_residual
from .pep import PepProgram, QuadraticConstraint, assemble_pep, build_pair_constraint
from .sdp import SdpSolution, SolveOptions, SolverError, SolveStatus, extract_gram_vectors, solve
from .tight import (
    PiecewiseQuadratic,
    TightInstance,
    attainment_check,
    build_tight_instance,
    export_triples,
    run_gd,
)

__version__ = "0.1.0"
