"""HTTP service wrapping the estimation library."""

from .app import create_app
from .schemas import (DiagRequest, DiagResponse, FitModel, RunRequest,
                      RunResponse, RunSummary, SweepResponse,
                      TrialRecordModel)

__all__ = [
    "create_app",
    "DiagRequest",
    "DiagResponse",
    "FitModel",
    "RunRequest",
    "RunResponse",
    "RunSummary",
    "SweepResponse",
    "TrialRecordModel",
]
