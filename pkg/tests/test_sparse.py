"""Row-sparse protocol: layer split, dyadic rebuild, end-to-end accuracy."""

import math

import numpy as np
import pytest

from estcomm import ProtocolConfig, build_family, exact_expectation
from estcomm.protocols.sparse import (dyadic_terms, one_sparse_layers,
                                      sparse_protocol)

from conftest import random_dense, random_sparse


def sparse_target(rng, n, s):
    """Random matrix with exactly s non-zeros per row."""
    a = np.zeros((n, n))
    for x in range(n):
        cols = rng.choice(n, size=s, replace=False)
        a[x, cols] = rng.uniform(-1.0, 1.0, size=s)
    return build_family("dense_custom", matrix=a)


class TestOneSparseLayers:
    def test_layers_partition_the_rows(self, rng):
        f = sparse_target(rng, 12, 3)
        layers = one_sparse_layers(f)
        assert len(layers) == 3
        rebuilt = np.zeros((12, 12))
        for layer in layers:
            for x, (y, c) in layer.items():
                assert rebuilt[x, y] == 0.0
                rebuilt[x, y] = c
        np.testing.assert_array_equal(rebuilt, f.dense())

    def test_ragged_rows(self):
        a = np.array([[0.5, 0.0, -0.25], [0.0, 0.0, 0.0], [1.0, 0.5, 0.25]])
        layers = one_sparse_layers(build_family("dense_custom", matrix=a))
        assert [len(l) for l in layers] == [2, 2, 1]


class TestDyadicTerms:
    def test_exact_dyadic_coefficients_rebuild_exactly(self):
        layer = {0: (3, 0.75), 1: (2, -0.5), 5: (0, 1.0)}
        terms, worst = dyadic_terms(layer, depth=6)
        assert worst == 0.0
        rebuilt = {x: 0.0 for x in layer}
        for w, mapping in terms:
            for x, y in mapping.items():
                assert y == layer[x][0]
                rebuilt[x] += w * (1.0 if layer[x][1] > 0 else -1.0) * \
                    (1.0 if w > 0 else -1.0)
        for x, (_, c) in layer.items():
            assert rebuilt[x] == pytest.approx(c, abs=1e-15)

    def test_drop_bounded_by_last_power(self, rng):
        for _ in range(50):
            layer = {i: (int(rng.integers(0, 8)), float(rng.uniform(-1, 1)))
                     for i in range(int(rng.integers(1, 10)))}
            depth = int(rng.integers(2, 12))
            terms, worst = dyadic_terms(layer, depth)
            assert 0.0 <= worst <= 2.0 ** -depth + 1e-12
            rebuilt = {x: 0.0 for x in layer}
            for w, mapping in terms:
                for x, y in mapping.items():
                    rebuilt[x] += w
            for x, (_, c) in layer.items():
                assert abs(abs(c) - abs(rebuilt[x])) <= 2.0 ** -depth + 1e-12
                if rebuilt[x] != 0.0:
                    assert math.copysign(1.0, rebuilt[x]) == math.copysign(1.0, c)


class TestSparseProtocol:
    def test_failure_rate_within_default_delta(self, rng):
        eps = 0.25
        failures = 0
        trials = 30
        for t in range(trials):
            inst = np.random.default_rng(41000 + t)
            f = sparse_target(inst, 64, 2)
            rep = sparse_protocol(random_sparse(inst, 64), random_sparse(inst, 64),
                                  f, ProtocolConfig(epsilon=eps, seed=t))
            failures += abs(rep.estimate - rep.truth) > eps
        sigma = math.sqrt((1.0 / 3.0) * (2.0 / 3.0) / trials)
        assert failures / trials <= 1.0 / 3.0 + 3.0 * sigma

    def test_truth_and_details(self, rng):
        f = sparse_target(rng, 32, 2)
        p, q = random_dense(rng, 32), random_dense(rng, 32)
        rep = sparse_protocol(p, q, f, ProtocolConfig(epsilon=0.3, seed=5))
        assert rep.truth == exact_expectation(p, q, f)
        assert rep.details["s"] == 2
        assert rep.details["depth"] == math.ceil(math.log2(4 * 2 / 0.3))
        assert rep.details["dropped"] <= 2.0 ** -rep.details["depth"] + 1e-12

    def test_seed_determinism(self, rng):
        f = sparse_target(rng, 24, 2)
        p, q = random_sparse(rng, 24), random_sparse(rng, 24)
        cfg = ProtocolConfig(epsilon=0.3, seed=8)
        assert (sparse_protocol(p, q, f, cfg).estimate
                == sparse_protocol(p, q, f, cfg).estimate)

    def test_zero_matrix(self, rng):
        f = build_family("dense_custom", matrix=np.zeros((8, 8)))
        rep = sparse_protocol(random_dense(rng, 8), random_dense(rng, 8), f,
                              ProtocolConfig(epsilon=0.2, seed=0))
        assert rep.truth == 0.0
        assert abs(rep.estimate) <= 0.2
