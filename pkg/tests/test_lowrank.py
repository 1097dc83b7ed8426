"""Deterministic low-rank protocol: exactness, billing, and refusal."""

import numpy as np
import pytest

from estcomm.comm import index_bits, real_bits
from estcomm.config import ProtocolConfig
from estcomm.errors import InputValidationError, RankApproximationError
from estcomm.functions import build_family
from estcomm.protocols.lowrank import svd_protocol

from conftest import random_dense


def exact_rank_target(rng, n, r):
    a = rng.standard_normal((n, r)) @ rng.standard_normal((r, n))
    a /= np.abs(a).max()
    return build_family("dense_custom", matrix=a)


class TestAccuracy:
    def test_error_within_epsilon_on_exact_rank_inputs(self, rng):
        eps = 0.1
        cfg = ProtocolConfig(epsilon=eps, seed=3)
        for _ in range(100):
            n = int(rng.integers(4, 33))
            r = int(rng.integers(1, min(n, 5)))
            f = exact_rank_target(rng, n, r)
            rep = svd_protocol(random_dense(rng, n), random_dense(rng, n), f,
                               cfg, r=r)
            assert abs(rep.estimate - rep.truth) <= eps

    def test_deterministic_across_seeds(self, rng):
        f = exact_rank_target(rng, 16, 2)
        p, q = random_dense(rng, 16), random_dense(rng, 16)
        runs = [svd_protocol(p, q, f, ProtocolConfig(epsilon=0.05, seed=s), r=2)
                for s in (0, 1, 99)]
        assert len({r.estimate for r in runs}) == 1
        assert len({r.ledger.total_bits for r in runs}) == 1


class TestBilling:
    @pytest.mark.parametrize("n,r,eps", [(16, 1, 0.1), (16, 3, 0.05),
                                         (40, 2, 0.01), (7, 4, 0.3)])
    def test_bits_match_per_projection_formula(self, rng, n, r, eps):
        f = exact_rank_target(rng, n, r)
        rep = svd_protocol(random_dense(rng, n), random_dense(rng, n), f,
                           ProtocolConfig(epsilon=eps, seed=0), r=r)
        nb = index_bits(n)
        per = real_bits(eps / 2.0 ** (nb + 1))
        # the quantizer's formula collapses to nb + ceil(log2(2/eps)) + 2
        assert per == nb + real_bits(eps) + 1
        assert rep.ledger.total_bits == r * per
        assert rep.ledger.bits_bob == 0
        assert rep.details["bits_per_projection"] == per

    def test_single_round(self, rng):
        f = exact_rank_target(rng, 12, 3)
        rep = svd_protocol(random_dense(rng, 12), random_dense(rng, 12), f,
                           ProtocolConfig(epsilon=0.1, seed=0), r=3)
        assert rep.ledger.rounds == 1


class TestRefusal:
    def test_rank_too_small_for_full_rank_target(self, rng):
        a = rng.uniform(-1.0, 1.0, size=(8, 8))
        f = build_family("dense_custom", matrix=a)
        with pytest.raises(RankApproximationError):
            svd_protocol(random_dense(rng, 8), random_dense(rng, 8), f,
                         ProtocolConfig(epsilon=1e-6, seed=0), r=1)

    def test_near_rank_inputs_accepted_when_residual_fits(self, rng):
        base = rng.standard_normal((10, 1)) @ rng.standard_normal((1, 10))
        base *= 0.9 / np.abs(base).max()
        eps = 0.2
        # noise of Frobenius norm <= eps/5 keeps the rank-1 residual inside
        # the protocol's eps/2 admission gate
        noise = rng.uniform(-eps / 50.0, eps / 50.0, size=(10, 10))
        f = build_family("dense_custom", matrix=base + noise)
        rep = svd_protocol(random_dense(rng, 10), random_dense(rng, 10), f,
                           ProtocolConfig(epsilon=eps, seed=1), r=1)
        assert rep.details["inf_norm_residual"] <= eps / 2.0
        assert abs(rep.estimate - rep.truth) <= eps

    @pytest.mark.parametrize("r", [0, -1, 9])
    def test_rank_out_of_range(self, rng, r):
        f = exact_rank_target(rng, 8, 2)
        with pytest.raises(InputValidationError):
            svd_protocol(random_dense(rng, 8), random_dense(rng, 8), f,
                         ProtocolConfig(epsilon=0.1, seed=0), r=r)
