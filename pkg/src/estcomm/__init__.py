"""Two-party communication protocols for distributed expectation estimation.

Alice holds a distribution p, Bob holds q, and together they estimate
E[f(x, y)] for independent x ~ p, y ~ q to additive accuracy epsilon,
exchanging as few bits as possible.  Every protocol returns its estimate
together with a bit-exact transcript ledger.
"""

from .comm import ALICE, BOB, CostLedger, Message, index_bits, quantize, real_bits
from .config import AccessMode, EstimateReport, ProtocolConfig, amplification_reps
from .diagnostics import (DiscrepancyReport, PathInverseReport, SpectralSummary,
                          brute_force_discrepancy, lambda_bound_check,
                          path_distance_inverse_check, svd_summary)
from .dist import ProbVec, SignedVec
from .errors import (DiagnosticFailure, DimensionMismatchError,
                     EnumerationCapError, EstcommError, InputValidationError,
                     RankApproximationError)
from .functions import FAMILIES, TargetFn, build_family
from .harness import (ExperimentSpec, ScalingFit, TrialRecord, export_csv,
                      fit_scaling, make_instance, read_csv, run_experiment,
                      wilson_upper)
from .oracle import exact_expectation
from .protocols import PROTOCOLS, run_protocol

__version__ = "0.1.0"

__all__ = [
    "ALICE", "BOB", "CostLedger", "Message", "index_bits", "quantize",
    "real_bits",
    "AccessMode", "EstimateReport", "ProtocolConfig", "amplification_reps",
    "DiscrepancyReport", "PathInverseReport", "SpectralSummary",
    "brute_force_discrepancy", "lambda_bound_check",
    "path_distance_inverse_check", "svd_summary",
    "ProbVec", "SignedVec",
    "DiagnosticFailure", "DimensionMismatchError", "EnumerationCapError",
    "EstcommError", "InputValidationError", "RankApproximationError",
    "FAMILIES", "TargetFn", "build_family",
    "ExperimentSpec", "ScalingFit", "TrialRecord", "export_csv",
    "fit_scaling", "make_instance", "read_csv", "run_experiment",
    "wilson_upper",
    "exact_expectation",
    "PROTOCOLS", "run_protocol",
    "__version__",
]
