"""Diagonal step functions split into shifted threshold calls."""

import math

import numpy as np
import pytest

from estcomm import ProbVec, ProtocolConfig, build_family, exact_expectation
from estcomm.errors import InputValidationError
from estcomm.protocols.ordered import threshold_probability
from estcomm.protocols.toeplitz import shifted_pair, toeplitz_protocol

from conftest import random_dense, random_sparse


def loop_shift_threshold(p: ProbVec, q: ProbVec, d: int) -> float:
    total = 0.0
    for x, px in zip(p.support.tolist(), p.probs.tolist()):
        for y, qy in zip(q.support.tolist(), q.probs.tolist()):
            if x - y >= d:
                total += px * qy
    return total


class TestShiftedPair:
    @pytest.mark.parametrize("d", [-4, -1, 0, 1, 4])
    def test_embedding_preserves_the_event(self, rng, d):
        for _ in range(20):
            n = int(rng.integers(2, 50))
            p = random_sparse(rng, n)
            q = random_dense(rng, n)
            ps, qs = shifted_pair(p, q, d)
            assert ps.domain_size == qs.domain_size == n + abs(d)
            assert threshold_probability(ps, qs) == pytest.approx(
                loop_shift_threshold(p, q, d), abs=1e-12)

    def test_masses_survive_the_shift(self, rng):
        p, q = random_dense(rng, 10), random_dense(rng, 10)
        ps, qs = shifted_pair(p, q, 3)
        np.testing.assert_array_equal(ps.probs, p.probs)
        np.testing.assert_array_equal(qs.support, q.support + 3)


class TestToeplitzProtocol:
    def test_truth_matches_dense_oracle(self, rng):
        f = build_family("toeplitz", size=48, base=0.2,
                         changes=((3, 0.4), (-5, -0.5)))
        p, q = random_sparse(rng, 48), random_dense(rng, 48)
        rep = toeplitz_protocol(p, q, f, ProtocolConfig(epsilon=0.3, seed=0))
        assert rep.truth == pytest.approx(exact_expectation(p, q, f), abs=1e-12)

    def test_recombination_failure_rate(self):
        eps = 0.3
        f = build_family("toeplitz", size=64, base=0.1,
                         changes=((2, 0.5), (-7, -0.4)))
        failures = 0
        trials = 40
        for t in range(trials):
            inst = np.random.default_rng(97_000 + t)
            p = random_dense(inst, 64)
            q = random_sparse(inst, 64)
            rep = toeplitz_protocol(p, q, f, ProtocolConfig(epsilon=eps, seed=t))
            failures += abs(rep.estimate - rep.truth) > eps
        sigma = math.sqrt((1.0 / 3.0) * (2.0 / 3.0) / trials)
        assert failures / trials <= 1.0 / 3.0 + 3.0 * sigma

    def test_flat_profile_is_free(self, rng):
        f = build_family("toeplitz", size=16, base=0.25, changes=())
        rep = toeplitz_protocol(random_dense(rng, 16), random_dense(rng, 16),
                                f, ProtocolConfig(epsilon=0.1, seed=0))
        assert rep.estimate == 0.25
        assert rep.truth == 0.25
        assert rep.ledger.total_bits == 0

    def test_per_term_details(self, rng):
        f = build_family("toeplitz", size=32, base=0.0,
                         changes=((1, 0.5), (-3, 0.25)))
        rep = toeplitz_protocol(random_dense(rng, 32), random_dense(rng, 32),
                                f, ProtocolConfig(epsilon=0.4, seed=3))
        # the family normalizes changes into shift-sorted order
        assert [t["shift"] for t in rep.details["terms"]] == [-3, 1]
        assert [t["weight"] for t in rep.details["terms"]] == [0.25, 0.5]

    def test_wrong_family_rejected(self, rng):
        f = build_family("eq", n=8)
        with pytest.raises(InputValidationError, match="toeplitz"):
            toeplitz_protocol(random_dense(rng, 8), random_dense(rng, 8), f,
                              ProtocolConfig(epsilon=0.1, seed=0))

    def test_seed_determinism(self, rng):
        f = build_family("toeplitz", size=24, base=0.0, changes=((2, 0.5),))
        p, q = random_sparse(rng, 24), random_sparse(rng, 24)
        cfg = ProtocolConfig(epsilon=0.2, seed=9)
        assert (toeplitz_protocol(p, q, f, cfg).estimate
                == toeplitz_protocol(p, q, f, cfg).estimate)
