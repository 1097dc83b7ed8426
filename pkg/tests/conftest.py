"""Shared test helpers: independent oracles and instance generators.

Oracles here are deliberately written in the plainest possible style
(explicit Python loops, no shared code with the library) so they can
serve as ground truth for the vectorized implementations.
"""

from __future__ import annotations

import numpy as np
import pytest

from estcomm import ProbVec, TargetFn


def triple_loop_expectation(p: ProbVec, q: ProbVec, f: TargetFn) -> float:
    """E f(x, y) by looping over every support pair."""
    total = 0.0
    for xi, px in zip(p.support.tolist(), p.probs.tolist()):
        for yi, qy in zip(q.support.tolist(), q.probs.tolist()):
            total += px * qy * f.entry(int(xi), int(yi))
    return total


def random_dense(rng: np.random.Generator, n: int) -> ProbVec:
    return ProbVec.from_dense(rng.dirichlet(np.ones(n)))


def random_sparse(rng: np.random.Generator, n: int, s: int | None = None) -> ProbVec:
    s = s or int(rng.integers(1, min(12, n) + 1))
    support = np.sort(rng.choice(n, size=s, replace=False))
    masses = rng.dirichlet(np.ones(s))
    return ProbVec.from_mapping(n, dict(zip(support.tolist(), masses)))


def random_with_atoms(rng: np.random.Generator, n: int) -> ProbVec:
    base = rng.dirichlet(np.ones(n))
    spots = rng.choice(n, size=min(2, n), replace=False)
    atom = rng.uniform(0.2, 0.45, size=spots.size)
    atom *= min(1.0, 0.9 / atom.sum())
    dense = base * (1.0 - atom.sum())
    dense[spots] += atom
    return ProbVec.from_dense(dense)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260823)
