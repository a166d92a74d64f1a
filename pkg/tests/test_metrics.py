import math

import numpy as np
import pytest

from otdistill.core import DimensionMismatchError, uniform_distribution, validate_distribution
from otdistill.metrics import (DisjointSupportError, GridMismatchError, KernelSpec,
                               kl_divergence_grid, median_heuristic_gamma, mmd_linear_mean_gap,
                               mmd_squared, sliced_wasserstein, sliced_wasserstein_terms,
                               wasserstein_1d)
from otdistill.ot import wasserstein_distance

from conftest import random_distribution

RBF1 = KernelSpec("gaussian_rbf", 1.0)
LINEAR = KernelSpec("linear")


def equal_mean_pair(rng, n=8, d=2, spread=2.0):
    P = random_distribution(rng, n, d)
    Q = validate_distribution(P.mean() + spread * (P.points - P.mean()), P.weights)
    return P, Q


class TestMMD:
    def test_identical(self, rng):
        P = random_distribution(rng, 7, 3)
        assert mmd_squared(P, P, RBF1) == pytest.approx(0.0, abs=1e-14)

    def test_linear_equal_means(self):
        P = uniform_distribution([[0.0], [2.0]])
        Q = uniform_distribution([[1.0]])
        assert mmd_squared(P, Q, LINEAR) == pytest.approx(0.0, abs=1e-15)

    def test_rbf_hand_evaluated(self):
        # P = {0, 2} with mass 1/2 each, Q = {1}; k(x, y) = exp(-(x - y)^2).
        xs, s = [0.0, 2.0], 1.0
        pp = sum(0.25 * math.exp(-(x - y) ** 2) for x in xs for y in xs)
        qq = math.exp(0.0)
        pq = sum(0.5 * math.exp(-(x - s) ** 2) for x in xs)
        expected = pp + qq - 2 * pq
        assert expected == pytest.approx(0.7733989371, abs=1e-9)
        P = uniform_distribution([[0.0], [2.0]])
        Q = uniform_distribution([[1.0]])
        assert mmd_squared(P, Q, RBF1) == pytest.approx(expected, abs=1e-12)

    def test_symmetry(self, rng):
        for _ in range(30):
            P, Q = random_distribution(rng, 6, 2), random_distribution(rng, 9, 2)
            for k in (LINEAR, RBF1, KernelSpec()):
                assert abs(mmd_squared(P, Q, k) - mmd_squared(Q, P, k)) <= 1e-12

    def test_mean_gap(self, rng):
        P = validate_distribution([[0.0, 0.0], [2.0, 0.0]])
        Q = validate_distribution([[0.0, 1.0], [0.0, -1.0]])
        assert mmd_linear_mean_gap(P, Q) == pytest.approx(1.0)
        assert mmd_linear_mean_gap(P, P) == 0.0
        for _ in range(50):
            P, Q = random_distribution(rng, 5, 3), random_distribution(rng, 8, 3)
            assert abs(mmd_linear_mean_gap(P, Q) - mmd_squared(P, Q, LINEAR)) <= 1e-10

    def test_rbf_positive_on_distinct(self, rng):
        for _ in range(100):
            P, Q = random_distribution(rng, 4, 2), random_distribution(rng, 4, 2)
            assert mmd_squared(P, Q, RBF1) > 0

    def test_linear_degeneracy(self, rng):
        for _ in range(100):
            P, Q = equal_mean_pair(rng)
            assert mmd_squared(P, Q, LINEAR) <= 1e-10
            assert mmd_squared(P, Q, RBF1) > 1e-6
            assert wasserstein_distance(P, Q, 2) > 1e-3

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            mmd_squared(uniform_distribution([[0.0]]), uniform_distribution([[0.0, 1.0]]))

    def test_median_heuristic(self):
        pts = np.array([[0.0], [1.0], [3.0]])
        # Pairwise distances 1, 2, 3 -> median 2.
        assert median_heuristic_gamma(pts) == pytest.approx(1 / 8)


class TestSliced:
    def test_1d_closed_form_matches_lp(self, rng):
        for _ in range(50):
            p = float(rng.choice([1.0, 2.0]))
            P = random_distribution(rng, int(rng.integers(1, 15)), 1)
            Q = random_distribution(rng, int(rng.integers(1, 15)), 1)
            lp = wasserstein_distance(P, Q, p) ** p
            closed = wasserstein_1d(P.points, P.weights, Q.points, Q.weights, p)
            assert closed == pytest.approx(lp, abs=1e-8)

    def test_d1_equals_wasserstein(self, rng):
        P, Q = random_distribution(rng, 7, 1), random_distribution(rng, 5, 1)
        for L in (1, 7):
            assert sliced_wasserstein(P, Q, 2.0, L, seed=3) == pytest.approx(wasserstein_distance(P, Q, 2), abs=1e-8)

    def test_identical(self, rng):
        P = random_distribution(rng, 6, 3)
        assert sliced_wasserstein(P, P, 1.0, 20) == 0.0

    def test_below_w1(self, rng):
        P, Q = random_distribution(rng, 10, 2), random_distribution(rng, 12, 2)
        terms = sliced_wasserstein_terms(P, Q, 1.0, 5000, seed=11)
        se = terms.std(ddof=1) / np.sqrt(terms.size)
        assert terms.mean() <= wasserstein_distance(P, Q, 1) + 3 * se
        assert np.all(terms <= wasserstein_distance(P, Q, 1) + 1e-9)

    def test_seeded(self, rng):
        P, Q = random_distribution(rng, 6, 3), random_distribution(rng, 6, 3)
        assert sliced_wasserstein(P, Q, 2, 30, seed=5) == sliced_wasserstein(P, Q, 2, 30, seed=5)


class TestKLGrid:
    def test_identical(self):
        p = np.full((2, 2), 0.25)
        assert kl_divergence_grid(p, p) == 0.0

    def test_one_hot_vs_uniform(self):
        p = np.array([1.0, 0.0, 0.0, 0.0])
        assert kl_divergence_grid(p, np.full(4, 0.25)) == pytest.approx(math.log(4))

    def test_disjoint(self):
        with pytest.raises(DisjointSupportError):
            kl_divergence_grid([1.0, 0.0], [0.0, 1.0])

    def test_mismatch(self):
        with pytest.raises(GridMismatchError):
            kl_divergence_grid(np.full(4, 0.25), np.full(2, 0.5))
