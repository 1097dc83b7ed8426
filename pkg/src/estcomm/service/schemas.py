"""Request and response bodies for the HTTP service."""

from __future__ import annotations

from typing import Any

from pydantic import BaseModel, Field


class RunRequest(BaseModel):
    protocol: str
    family: str
    params: dict[str, Any] = Field(default_factory=dict)
    generator: str = "random-dense"
    epsilons: list[float] = Field(min_length=1)
    trials: int = 1
    seed: int = 0
    delta: float = 1.0 / 3.0
    access: str = "full"
    constants: dict[str, float] = Field(default_factory=dict)


class TrialRecordModel(BaseModel):
    protocol: str
    family: str
    n: int
    epsilon: float
    trial: int
    estimate: float
    truth: float
    abs_error: float
    bits_alice: int
    bits_bob: int
    rounds: int
    seed: int


class RunSummary(BaseModel):
    count: int
    failure_rate: float
    median_bits: float
    max_rounds: int


class RunResponse(BaseModel):
    records: list[TrialRecordModel]
    summary: RunSummary


class FitModel(BaseModel):
    slope: float
    intercept: float
    r_squared: float
    points: list[tuple[float, float]]


class SweepResponse(BaseModel):
    records: list[TrialRecordModel]
    fit: FitModel


class DiagRequest(BaseModel):
    target: str
    family: str | None = None
    params: dict[str, Any] = Field(default_factory=dict)
    k: int | None = None


class DiagResponse(BaseModel):
    target: str
    payload: dict[str, Any]
