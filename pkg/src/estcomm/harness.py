"""Experiment orchestration: trial batches, scaling fits, CSV export.

A batch fixes one protocol and one target family, draws fresh random
(p, q) instances per trial from a named generator, and records bit-exact
communication totals.  Fits regress log(bits) on log(1/epsilon) to expose
the empirical cost exponent.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import ProtocolConfig
from .dist import ProbVec
from .errors import InputValidationError
from .functions import build_family
from .oracle import exact_expectation
from .protocols import run_protocol
from .rng import derive_seed, stream

__all__ = [
    "ExperimentSpec",
    "TrialRecord",
    "ScalingFit",
    "GENERATORS",
    "make_instance",
    "run_experiment",
    "fit_scaling",
    "export_csv",
    "read_csv",
    "wilson_upper",
    "summarize_records",
    "CSV_HEADER",
]


def _gen_point_mass(rows: int, cols: int, rng: np.random.Generator):
    return (ProbVec.delta(rows, int(rng.integers(rows))),
            ProbVec.delta(cols, int(rng.integers(cols))))


def _gen_uniform(rows: int, cols: int, rng: np.random.Generator):
    return ProbVec.uniform(rows), ProbVec.uniform(cols)


def _sparse_one(n: int, rng: np.random.Generator) -> ProbVec:
    s = int(rng.integers(1, min(16, n) + 1))
    support = np.sort(rng.choice(n, size=s, replace=False))
    return ProbVec.from_mapping(n, dict(zip(support.tolist(), rng.dirichlet(np.ones(s)))))


def _gen_random_sparse(rows: int, cols: int, rng: np.random.Generator):
    return _sparse_one(rows, rng), _sparse_one(cols, rng)


def _dense_one(n: int, rng: np.random.Generator) -> ProbVec:
    return ProbVec.from_dense(rng.dirichlet(np.ones(n)))


def _gen_random_dense(rows: int, cols: int, rng: np.random.Generator):
    return _dense_one(rows, rng), _dense_one(cols, rng)


def _atom_one(n: int, rng: np.random.Generator) -> ProbVec:
    base = rng.dirichlet(np.ones(n))
    n_atoms = int(rng.integers(1, min(3, n) + 1))
    spots = rng.choice(n, size=n_atoms, replace=False)
    # heavy point masses that any mass-threshold partition must isolate
    atom_mass = rng.uniform(0.15, 0.5, size=n_atoms)
    atom_mass *= min(1.0, 0.9 / atom_mass.sum())
    dense = base * (1.0 - atom_mass.sum())
    dense[spots] += atom_mass
    return ProbVec.from_dense(dense)


def _gen_adversarial_atom(rows: int, cols: int, rng: np.random.Generator):
    return _atom_one(rows, rng), _atom_one(cols, rng)


GENERATORS = {
    "point-mass": _gen_point_mass,
    "uniform": _gen_uniform,
    "random-sparse": _gen_random_sparse,
    "random-dense": _gen_random_dense,
    "adversarial-atom": _gen_adversarial_atom,
}


def make_instance(generator: str, rows: int, cols: int,
                  rng: np.random.Generator) -> tuple[ProbVec, ProbVec]:
    if generator not in GENERATORS:
        raise InputValidationError(
            f"unknown generator {generator!r}; known: {sorted(GENERATORS)}")
    return GENERATORS[generator](rows, cols, rng)


@dataclass(frozen=True)
class ExperimentSpec:
    """One protocol, one family, a grid of epsilons, trials per epsilon."""

    protocol: str
    family: str
    params: dict = field(default_factory=dict)
    generator: str = "random-dense"
    epsilons: tuple[float, ...] = (0.1,)
    trials: int = 1
    seed: int = 0
    delta: float = 1.0 / 3.0
    access: str = "full"
    constants: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.trials < 1:
            raise InputValidationError("trials must be >= 1")
        eps = tuple(float(e) for e in self.epsilons)
        object.__setattr__(self, "epsilons", eps)
        if not eps:
            raise InputValidationError("need at least one epsilon")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise InputValidationError("epsilons must be strictly decreasing")
        if self.generator not in GENERATORS:
            raise InputValidationError(
                f"unknown generator {self.generator!r}; known: {sorted(GENERATORS)}")


@dataclass(frozen=True)
class TrialRecord:
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


CSV_HEADER = ("protocol,family,n,epsilon,trial,estimate,truth,"
              "abs_error,bits_alice,bits_bob,rounds,seed")


def _worker_count() -> int:
    raw = os.environ.get("ESTCOMM_THREADS")
    if raw is None:
        return min(8, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise InputValidationError(f"ESTCOMM_THREADS must be an integer, got {raw!r}")
    return max(1, n)


def run_experiment(spec: ExperimentSpec) -> list[TrialRecord]:
    """Run every (epsilon, trial) cell; deterministic given spec.seed.

    Trials fan out across threads but results are folded in trial order,
    so records are bitwise identical regardless of scheduling.  The truth
    column is always a fresh exact recomputation, independent of anything
    the protocol reports.
    """
    f = build_family(spec.family, **spec.params)
    if spec.protocol in ("svd", "spectral", "hybrid"):
        f.svd()  # warm the cached factorization before threads race for it

    def one(cell: tuple[int, int]) -> TrialRecord:
        eps_i, trial = cell
        eps = spec.epsilons[eps_i]
        cell_seed = derive_seed(spec.seed, eps_i, trial)
        p, q = make_instance(spec.generator, f.rows, f.cols, stream(cell_seed, 0))
        cfg = ProtocolConfig(epsilon=eps, delta=spec.delta,
                             seed=derive_seed(cell_seed, 1), access=spec.access,
                             constants=dict(spec.constants))
        report = run_protocol(spec.protocol, p, q, f, cfg)
        truth = exact_expectation(p, q, f)
        return TrialRecord(
            protocol=spec.protocol, family=spec.family, n=f.rows,
            epsilon=eps, trial=trial, estimate=report.estimate, truth=truth,
            abs_error=abs(report.estimate - truth),
            bits_alice=report.ledger.bits_alice, bits_bob=report.ledger.bits_bob,
            rounds=report.ledger.rounds, seed=cell_seed)

    cells = [(i, t) for i in range(len(spec.epsilons)) for t in range(spec.trials)]
    workers = _worker_count()
    if workers == 1 or len(cells) == 1:
        return [one(c) for c in cells]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, cells))


@dataclass(frozen=True)
class ScalingFit:
    """OLS fit of log(aggregate bits) against log(1/epsilon)."""

    slope: float
    intercept: float
    r_squared: float
    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        xs = np.array([p[0] for p in self.points])
        ys = np.array([p[1] for p in self.points])
        slope, _ = np.polyfit(xs, ys, 1)
        if abs(slope - self.slope) > 1e-9:
            raise InputValidationError("stored slope does not match its points")


def fit_scaling(records: list[TrialRecord], aggregate=np.median) -> ScalingFit:
    """Per-epsilon aggregate of total bits, then least squares in log-log."""
    by_eps: dict[float, list[int]] = {}
    for r in records:
        by_eps.setdefault(r.epsilon, []).append(r.bits_alice + r.bits_bob)
    if len(by_eps) < 3:
        raise InputValidationError(
            f"need at least 3 distinct epsilons to fit, got {len(by_eps)}")
    points = tuple(sorted(
        (math.log(1.0 / eps), math.log(float(aggregate(bits))))
        for eps, bits in by_eps.items()))
    xs = np.array([p[0] for p in points])
    ys = np.array([p[1] for p in points])
    slope, intercept = np.polyfit(xs, ys, 1)
    pred = slope * xs + intercept
    ss_res = float(np.sum((ys - pred) ** 2))
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return ScalingFit(slope=float(slope), intercept=float(intercept),
                      r_squared=r2, points=points)


def _fmt(x: float) -> str:
    return format(x, ".17g")


def export_csv(payload, path) -> None:
    """Write records (or a fit's points) to path; rows end in newline."""
    if isinstance(payload, ScalingFit):
        lines = ["log_inv_epsilon,log_bits"]
        lines += [f"{_fmt(x)},{_fmt(y)}" for x, y in payload.points]
    else:
        lines = [CSV_HEADER]
        for r in payload:
            lines.append(",".join([
                r.protocol, r.family, str(r.n), _fmt(r.epsilon), str(r.trial),
                _fmt(r.estimate), _fmt(r.truth), _fmt(r.abs_error),
                str(r.bits_alice), str(r.bits_bob), str(r.rounds), str(r.seed)]))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path) -> list[TrialRecord]:
    """Inverse of export_csv for trial records; round-trips exactly."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().split("\n") if ln]
    if not lines or lines[0] != CSV_HEADER:
        raise InputValidationError(f"{path}: missing or wrong CSV header")
    out = []
    for ln in lines[1:]:
        c = ln.split(",")
        if len(c) != 12:
            raise InputValidationError(f"{path}: expected 12 fields, got {len(c)}")
        out.append(TrialRecord(
            protocol=c[0], family=c[1], n=int(c[2]), epsilon=float(c[3]),
            trial=int(c[4]), estimate=float(c[5]), truth=float(c[6]),
            abs_error=float(c[7]), bits_alice=int(c[8]), bits_bob=int(c[9]),
            rounds=int(c[10]), seed=int(c[11])))
    return out


def wilson_upper(failures: int, trials: int,
                 z: float = 2.5758293035489004) -> float:
    """Upper end of the Wilson score interval (default 99% two-sided)."""
    if trials <= 0:
        raise InputValidationError("trials must be positive")
    if not 0 <= failures <= trials:
        raise InputValidationError("failures must lie in [0, trials]")
    phat = failures / trials
    z2 = z * z
    center = phat + z2 / (2 * trials)
    radius = z * math.sqrt(phat * (1 - phat) / trials + z2 / (4 * trials * trials))
    return (center + radius) / (1 + z2 / trials)


def summarize_records(records: list[TrialRecord]) -> dict:
    """Failure fraction (abs_error > epsilon) and bit statistics."""
    if not records:
        return {"count": 0, "failure_rate": 0.0, "median_bits": 0.0,
                "max_rounds": 0}
    failures = sum(1 for r in records if r.abs_error > r.epsilon)
    bits = [r.bits_alice + r.bits_bob for r in records]
    return {
        "count": len(records),
        "failure_rate": failures / len(records),
        "median_bits": float(np.median(bits)),
        "max_rounds": max(r.rounds for r in records),
    }
