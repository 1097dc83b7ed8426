"""HTTP front end over the experiment harness and diagnostics.

All endpoints are stateless POSTs; the CLI drives them in-process by
default, so this layer stays a thin translation between JSON bodies and
library calls.  Validation problems map to 422, internal consistency
failures to 500.
"""

from __future__ import annotations

from dataclasses import asdict

from fastapi import FastAPI, HTTPException

from ..dist import ProbVec
from ..diagnostics import (brute_force_discrepancy, lambda_bound_check,
                           path_distance_inverse_check, svd_summary)
from ..errors import EstcommError, InputValidationError
from ..functions import build_family
from ..harness import (ExperimentSpec, fit_scaling, run_experiment,
                       summarize_records)
from .schemas import (DiagRequest, DiagResponse, FitModel, RunRequest,
                      RunResponse, SweepResponse, TrialRecordModel)

DIAG_TARGETS = ("svd", "lambda", "distance-inverse", "discrepancy")


def _http_error(exc: EstcommError) -> HTTPException:
    code = 422 if isinstance(exc, InputValidationError) else 500
    return HTTPException(status_code=code, detail=str(exc))


def _records_for(req: RunRequest):
    spec = ExperimentSpec(
        protocol=req.protocol, family=req.family, params=dict(req.params),
        generator=req.generator, epsilons=tuple(req.epsilons),
        trials=req.trials, seed=req.seed, delta=req.delta,
        access=req.access, constants=dict(req.constants))
    records = run_experiment(spec)
    return records, [TrialRecordModel(**asdict(r)) for r in records]


def _diag_payload(req: DiagRequest) -> dict:
    if req.target == "distance-inverse":
        if req.k is None:
            raise InputValidationError("distance-inverse needs k")
        return asdict(path_distance_inverse_check(req.k))
    if req.family is None:
        raise InputValidationError(f"target {req.target!r} needs a family")
    f = build_family(req.family, **req.params)
    if req.target == "svd":
        s = svd_summary(f)
        return {"rank": s.rank, "spectral_norm": s.spectral_norm,
                "frobenius": s.frobenius,
                "singular_values": s.singular_values.tolist(),
                "lam": s.lam.tolist()}
    if req.target == "lambda":
        if f.rows != f.cols:
            raise InputValidationError("lambda floor needs a square matrix")
        s = svd_summary(f)
        margins = lambda_bound_check(s, f.rows)
        return {"k": f.rows, "lam": s.lam.tolist(),
                "margins": margins.tolist(), "rank": s.rank}
    if req.target == "discrepancy":
        report = brute_force_discrepancy(
            f, ProbVec.uniform(f.rows), ProbVec.uniform(f.cols))
        return {"value": report.value,
                "witness_rows": list(report.witness_rows),
                "witness_cols": list(report.witness_cols)}
    raise InputValidationError(
        f"unknown diag target {req.target!r}; known: {list(DIAG_TARGETS)}")


def create_app() -> FastAPI:
    app = FastAPI(title="estcomm", version="0.1.0")

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/run", response_model=RunResponse)
    def run(req: RunRequest) -> RunResponse:
        try:
            records, models = _records_for(req)
        except EstcommError as exc:
            raise _http_error(exc) from exc
        return RunResponse(records=models,
                           summary=summarize_records(records))

    @app.post("/sweep", response_model=SweepResponse)
    def sweep(req: RunRequest) -> SweepResponse:
        try:
            records, models = _records_for(req)
            fit = fit_scaling(records)
        except EstcommError as exc:
            raise _http_error(exc) from exc
        return SweepResponse(
            records=models,
            fit=FitModel(slope=fit.slope, intercept=fit.intercept,
                         r_squared=fit.r_squared, points=list(fit.points)))

    @app.post("/diag", response_model=DiagResponse)
    def diag(req: DiagRequest) -> DiagResponse:
        try:
            payload = _diag_payload(req)
        except EstcommError as exc:
            raise _http_error(exc) from exc
        return DiagResponse(target=req.target, payload=payload)

    return app
