"""Convex-slice reduction: measure extraction and the protocol on top."""

import numpy as np
import pytest

from estcomm import ProbVec, ProtocolConfig, build_family, exact_expectation
from estcomm.errors import InputValidationError
from estcomm.protocols.convex import (ConvexMeasure, convex_lipschitz_protocol,
                                      convex_to_measure)

from conftest import random_dense, random_sparse


def random_pl_convex(inst, m):
    """Grid samples of a convex 1-Lipschitz piecewise-linear function.

    Kink positions land anywhere in (0, 1), deliberately off the grid.
    """
    k = int(inst.integers(1, 7))
    kinks = np.sort(inst.uniform(0.0, 1.0, size=k))
    slopes = np.sort(inst.uniform(-1.0, 1.0, size=k + 1))
    g0 = float(inst.uniform(-0.5, 0.5))
    edges = np.concatenate(([0.0], kinks, [1.0]))

    def g(x):
        total = g0
        for i in range(len(slopes)):
            lo, hi = edges[i], edges[i + 1]
            total += slopes[i] * max(0.0, min(x, hi) - lo)
        return total

    return np.array([g(j / m) for j in range(m + 1)]), g


class TestConvexToMeasure:
    def test_hinge_gives_point_mass(self):
        m, t = 50, 15
        v = np.abs(np.arange(m + 1) / m - t / m)
        meas = convex_to_measure(v)
        w = meas.masses()
        assert w[t] == pytest.approx(1.0, abs=1e-12)
        assert meas.shift == pytest.approx(0.0, abs=1e-12)

    def test_identity_gives_mass_at_zero(self):
        m = 20
        v = np.arange(m + 1) / m
        meas = convex_to_measure(v)
        assert meas.masses()[0] == pytest.approx(1.0, abs=1e-12)
        assert meas.shift == pytest.approx(0.0, abs=1e-12)
        np.testing.assert_allclose(meas.reconstruct(), v, atol=1e-12)

    def test_square_gives_uniform_and_quarter_shift(self):
        m = 100
        v = (np.arange(m + 1) / m - 0.5) ** 2
        meas = convex_to_measure(v)
        # interior masses are exactly 1/m, the slope-midpoint trick makes
        # the mean exactly 1/2 and the shift exactly -1/4
        np.testing.assert_allclose(meas.masses()[1:-1], 1.0 / m, atol=1e-12)
        assert meas.shift == pytest.approx(-0.25, abs=1e-12)
        np.testing.assert_allclose(meas.reconstruct(), v, atol=1e-9)

    def test_reconstruction_on_random_pl_functions(self):
        m = 64
        for t in range(100):
            inst = np.random.default_rng(90_000 + t)
            v, _ = random_pl_convex(inst, m)
            recon = convex_to_measure(v).reconstruct()
            assert np.max(np.abs(recon - v)) <= 2.0 / m

    def test_off_grid_evaluation_within_lipschitz_slack(self):
        m = 32
        inst = np.random.default_rng(7)
        v, g = random_pl_convex(inst, m)
        recon = convex_to_measure(v).reconstruct()
        # between grid points both functions move at most 1/m, so comparing
        # the left grid value against the true midpoint stays within 2/m
        mids = (np.arange(m) + 0.5) / m
        for j, x in enumerate(mids.tolist()):
            assert abs(recon[j] - g(x)) <= 2.0 / m

    def test_rejects_concave_cells(self):
        v = np.array([0.0, 0.5, 0.6, 0.5])
        with pytest.raises(InputValidationError, match="convexity"):
            convex_to_measure(v)

    def test_rejects_steep_slopes(self):
        v = np.array([0.0, 0.9, 1.8])
        with pytest.raises(InputValidationError, match="slope"):
            convex_to_measure(v)

    def test_rejects_short_input(self):
        with pytest.raises(InputValidationError):
            convex_to_measure(np.array([1.0]))


class TestConvexMeasure:
    def test_validation(self):
        with pytest.raises(InputValidationError):
            ConvexMeasure(cdf=np.array([0.5, 0.2, 1.0]), shift=0.0)
        with pytest.raises(InputValidationError):
            ConvexMeasure(cdf=np.array([0.0, 0.9]), shift=0.0)
        with pytest.raises(InputValidationError):
            ConvexMeasure(cdf=np.array([0.0, 1.0]), shift=3.0)

    def test_expectation_and_prob(self):
        meas = ConvexMeasure(cdf=np.array([0.25, 0.5, 0.75, 1.0]), shift=0.1)
        assert meas.grid_m == 3
        w = meas.masses()
        assert meas.expectation() == pytest.approx(
            float(np.dot(w, np.arange(4) / 3)))
        assert meas.to_prob().dense() == pytest.approx(w / w.sum())


class TestConvexProtocol:
    @pytest.mark.parametrize("kind", ["hinge", "absdiff", "square"])
    def test_accuracy_on_builtin_kinds(self, kind):
        eps = 0.15
        f = build_family("convex_grid", m=64, kind=kind)
        failures = 0
        trials = 30
        for t in range(trials):
            inst = np.random.default_rng(91_000 + t)
            p = random_dense(inst, 65)
            q = random_sparse(inst, 65)
            rep = convex_lipschitz_protocol(p, q, f,
                                            ProtocolConfig(epsilon=eps, seed=t))
            failures += abs(rep.estimate - rep.truth) > eps
        assert failures / trials <= 1.0 / 3.0

    def test_truth_is_exact_expectation(self, rng):
        f = build_family("convex_grid", m=32, kind="absdiff")
        p, q = random_dense(rng, 33), random_dense(rng, 33)
        rep = convex_lipschitz_protocol(p, q, f, ProtocolConfig(epsilon=0.2, seed=0))
        assert rep.truth == exact_expectation(p, q, f)

    def test_residual_gate_and_details(self, rng):
        f = build_family("convex_grid", m=64, kind="square")
        p, q = random_dense(rng, 65), random_dense(rng, 65)
        rep = convex_lipschitz_protocol(p, q, f, ProtocolConfig(epsilon=0.2, seed=1))
        assert rep.details["reconstruction_residual"] <= 0.02
        assert "abs" in rep.details

    def test_shift_rides_along_without_extra_round(self, rng):
        f = build_family("convex_grid", m=64, kind="hinge")
        p, q = random_dense(rng, 65), random_dense(rng, 65)
        rep = convex_lipschitz_protocol(p, q, f, ProtocolConfig(epsilon=0.2, seed=2))
        # inner abs run contributes 2 rounds per rep; the trailing shift
        # message is Alice again, so it merges into her block
        assert rep.ledger.rounds == 2 * rep.details["abs"]["reps"]

    def test_non_convex_slice_rejected(self, rng):
        mat = np.zeros((4, 4))
        mat[1] = [0.0, 0.4, 0.5, 0.4]
        f = build_family("dense_custom", matrix=mat)
        with pytest.raises(InputValidationError):
            convex_lipschitz_protocol(random_dense(rng, 4), random_dense(rng, 4),
                                      f, ProtocolConfig(epsilon=0.4, seed=0))
