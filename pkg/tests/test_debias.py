"""Debiased surrogate g and the low-variance sampling protocol."""

import numpy as np
import pytest

from estcomm import ProbVec, ProtocolConfig, build_family, exact_expectation, index_bits
from estcomm.comm import real_bits
from estcomm.config import AccessMode
from estcomm.protocols.debias import (DebiasPlan, debias_core_statistic,
                                      debiasing_protocol, estimate_g_two_round,
                                      g_value)

from conftest import random_dense, random_sparse, triple_loop_expectation


class TestGValue:
    def test_unbiased_conditioned_on_either_coordinate(self, rng):
        """E_x[g(x, y)] and E_y[g(x, y)] both equal E[f], for every fixed point."""
        f = build_family("random_boolean", n=4, seed=7)
        p = random_dense(rng, 16)
        q = random_sparse(rng, 16)
        full = exact_expectation(p, q, f)
        for y in range(16):
            row_avg = sum(p.p(x) * g_value(p, q, f, x, y) for x in range(16))
            assert row_avg == pytest.approx(full, abs=1e-10)
        for x in range(16):
            col_avg = sum(q.p(y) * g_value(p, q, f, x, y) for y in range(16))
            assert col_avg == pytest.approx(full, abs=1e-10)

    def test_matches_hand_expansion(self, rng):
        f = build_family("random_boolean", n=3, seed=1)
        p = random_dense(rng, 8)
        q = random_dense(rng, 8)
        x, y = 3, 6
        want = (sum(p.p(a) * f.entry(a, y) for a in range(8))
                + sum(q.p(b) * f.entry(x, b) for b in range(8))
                - f.entry(x, y))
        assert g_value(p, q, f, x, y) == pytest.approx(want, abs=1e-12)

    def test_g_bounded_by_three(self, rng):
        f = build_family("ip", n=3)
        p = random_dense(rng, 8)
        q = random_dense(rng, 8)
        for x in range(8):
            for y in range(8):
                assert abs(g_value(p, q, f, x, y)) <= 3.0 + 1e-12


class TestEstimateGTwoRound:
    def test_full_access_error_is_rounding_only(self, rng):
        f = build_family("random_boolean", n=4, seed=3)
        p = random_dense(rng, 16)
        q = random_dense(rng, 16)
        for budget in (0.2, 0.05):
            for x, y in ((0, 1), (7, 13), (15, 0)):
                got, ledger = estimate_g_two_round(
                    p, q, f, x, y, budget, ProtocolConfig(epsilon=0.1, seed=0))
                assert abs(got - g_value(p, q, f, x, y)) <= budget / 2.0
                assert ledger.total_bits == (index_bits(16) + index_bits(16)
                                             + real_bits(budget))

    def test_sample_access_concentrates(self, rng):
        f = build_family("random_boolean", n=3, seed=5)
        p = random_dense(rng, 8)
        q = random_dense(rng, 8)
        cfg = ProtocolConfig(epsilon=0.1, seed=0, access=AccessMode.SAMPLE_ONLY)
        x, y = 2, 5
        errs = []
        for t in range(30):
            got, _ = estimate_g_two_round(p, q, f, x, y, 0.2, cfg,
                                          rng=np.random.default_rng(t))
            errs.append(abs(got - g_value(p, q, f, x, y)))
        # budget 0.2: rounding 0.1 plus sampling noise ~2*sqrt(1/(64/0.04))
        assert np.mean(errs) <= 0.2
        assert np.max(errs) <= 0.5


class TestCoreStatisticVariance:
    @pytest.mark.parametrize("k", [5, 10])
    def test_variance_bound(self, k):
        """Var of the k-pair surrogate average stays below 16 / k^2."""
        f = build_family("random_boolean", n=4, seed=9)
        g = np.random.default_rng(123)
        p = ProbVec.from_dense(g.dirichlet(np.ones(16)))
        q = ProbVec.from_dense(g.dirichlet(np.ones(16)))
        zs = [debias_core_statistic(p, q, f, k, np.random.default_rng(t))
              for t in range(3000)]
        var = float(np.var(zs))
        bound = 16.0 / k ** 2
        ci = 3.0 * var * np.sqrt(2.0 / 2999)  # 3 sigma for a sample variance
        assert var <= bound + ci

    def test_mean_is_the_expectation(self, rng):
        f = build_family("random_boolean", n=4, seed=2)
        p = random_dense(rng, 16)
        q = random_dense(rng, 16)
        zs = [debias_core_statistic(p, q, f, 8, np.random.default_rng(t))
              for t in range(4000)]
        truth = exact_expectation(p, q, f)
        se = np.std(zs) / np.sqrt(len(zs))
        assert abs(np.mean(zs) - truth) <= 4 * se + 1e-6


class TestDebiasingProtocol:
    def test_accuracy_over_random_instances(self, rng):
        f = build_family("random_boolean", n=6, seed=4)
        fails = 0
        for t in range(40):
            p = random_dense(rng, 64)
            q = random_dense(rng, 64)
            rep = debiasing_protocol(p, q, f, ProtocolConfig(epsilon=0.08, seed=t))
            fails += abs(rep.estimate - exact_expectation(p, q, f)) > 0.08
        assert fails <= 4

    def test_linear_sample_count(self):
        plan = DebiasPlan.from_config(ProtocolConfig(epsilon=0.05))
        assert plan.k_outer == int(np.ceil(40.0 / 0.05))
        assert plan.g_precision == pytest.approx(0.005)

    def test_sample_only_mode(self, rng):
        f = build_family("random_boolean", n=4, seed=8)
        p = random_dense(rng, 16)
        q = random_dense(rng, 16)
        cfg = ProtocolConfig(epsilon=0.15, seed=2, access=AccessMode.SAMPLE_ONLY)
        rep = debiasing_protocol(p, q, f, cfg)
        assert abs(rep.estimate - exact_expectation(p, q, f)) <= 0.15

    def test_two_rounds_per_repetition(self, rng):
        f = build_family("random_boolean", n=4, seed=1)
        p = random_dense(rng, 16)
        q = random_dense(rng, 16)
        rep = debiasing_protocol(p, q, f, ProtocolConfig(epsilon=0.2, seed=0))
        assert rep.ledger.rounds == 2 * rep.details["reps"]
