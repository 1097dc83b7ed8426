"""Baseline joint-sampling protocol."""

import numpy as np
import pytest

from estcomm import ProbVec, ProtocolConfig, build_family, exact_expectation, index_bits
from estcomm.comm import real_bits
from estcomm.config import AccessMode, amplification_reps
from estcomm.protocols.sampling import random_sampling_protocol

from conftest import random_dense, random_sparse


class TestRandomSampling:
    def test_accuracy_over_random_instances(self, rng):
        f = build_family("random_boolean", n=5, seed=11)
        fails = 0
        for t in range(40):
            p = random_dense(rng, 32)
            q = random_sparse(rng, 32)
            rep = random_sampling_protocol(p, q, f, ProtocolConfig(epsilon=0.1, seed=t))
            fails += abs(rep.estimate - exact_expectation(p, q, f)) > 0.1
        assert fails <= 4  # nominal failure prob 1/3; observed is far lower

    def test_ledger_accounting_exact(self):
        f = build_family("random_boolean", n=4, seed=0)
        p = q = ProbVec.uniform(16)
        cfg = ProtocolConfig(epsilon=0.2, delta=0.1, seed=3)
        rep = random_sampling_protocol(p, q, f, cfg)
        k = rep.details["k"]
        reps = rep.details["reps"]
        assert k == int(np.ceil(4.0 / 0.2 ** 2))
        assert reps == amplification_reps(0.1)
        assert rep.ledger.bits_alice == reps * k * index_bits(16)
        assert rep.ledger.bits_bob == reps * k * real_bits(0.2)
        assert rep.ledger.rounds == 2 * reps

    def test_point_mass_is_exact_up_to_rounding(self):
        f = build_family("gt", k=8)
        rep = random_sampling_protocol(ProbVec.delta(8, 6), ProbVec.delta(8, 2), f,
                                       ProtocolConfig(epsilon=0.05, seed=1))
        assert abs(rep.estimate - 1.0) <= 0.05

    def test_sample_count_override(self):
        f = build_family("eq", k=4)
        cfg = ProtocolConfig(epsilon=0.1, seed=0, constants={"sampling_k": 7})
        rep = random_sampling_protocol(ProbVec.uniform(4), ProbVec.uniform(4), f, cfg)
        assert rep.details["k"] == 7

    def test_deterministic_given_seed(self, rng):
        f = build_family("random_boolean", n=4, seed=2)
        p = random_dense(rng, 16)
        q = random_dense(rng, 16)
        a = random_sampling_protocol(p, q, f, ProtocolConfig(epsilon=0.1, seed=9))
        b = random_sampling_protocol(p, q, f, ProtocolConfig(epsilon=0.1, seed=9))
        assert a.estimate == b.estimate
        assert a.ledger.total_bits == b.ledger.total_bits


class TestDoubleIndexRound:
    def test_constant_bits_per_pair(self):
        f = build_family("double_index", k=2)  # L = 4
        p = ProbVec.uniform(f.rows)
        q = ProbVec.uniform(f.cols)
        cfg = ProtocolConfig(epsilon=0.2, seed=4, access=AccessMode.SAMPLE_ONLY)
        rep = random_sampling_protocol(p, q, f, cfg)
        k = rep.details["k"]
        reps = rep.details["reps"]
        per_pair = rep.ledger.total_bits / (k * reps)
        # index halves both ways plus one referenced bit each
        assert per_pair == 2 * index_bits(4) + 2
        assert abs(rep.estimate - exact_expectation(p, q, f)) <= 0.2 + 1e-9

    def test_pairs_evaluated_exactly(self, rng):
        """The exchanged bits reconstruct f with no quantization error."""
        f = build_family("double_index", k=1)
        p = random_dense(rng, f.rows)
        q = random_dense(rng, f.cols)
        cfg = ProtocolConfig(epsilon=0.15, seed=0,
                             constants={"sampling_k": 4000})
        rep = random_sampling_protocol(p, q, f, cfg)
        truth = exact_expectation(p, q, f)
        assert abs(rep.estimate - truth) <= 0.15
