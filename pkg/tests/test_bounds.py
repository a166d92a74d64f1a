import numpy as np
import pytest

from otdistill.bounds import (BOUND_COLUMNS, LipschitzFunction, RkhsFunction,
                              bound_comparison_sweep, check_mmd_bound, check_wasserstein_bound,
                              expected_gap, random_lipschitz, random_pair, random_rkhs)
from otdistill.core import uniform_distribution
from otdistill.metrics import KernelSpec

from conftest import random_distribution


def test_expected_gap_examples(rng):
    P = random_distribution(rng, 5, 2)
    g = LipschitzFunction(np.zeros((1, 2)), 1.5)
    assert expected_gap(g, P, P) == 0.0
    assert expected_gap(lambda x: np.full(len(x), 3.0), P, random_distribution(rng, 4, 2)) <= 1e-14
    assert expected_gap(lambda x: x[:, 0], uniform_distribution([[0.0]]), uniform_distribution([[1.0]])) == 1.0


class TestWassersteinBound:
    def test_tight(self):
        g = LipschitzFunction(np.array([[-1000.0]]), 2.0)
        rep = check_wasserstein_bound(g, uniform_distribution([[0.0]]), uniform_distribution([[1.0]]))
        assert rep.gap == pytest.approx(2.0, abs=1e-9)
        assert rep.bound == 2.0 and rep.satisfied
        assert abs(rep.slack) < 1e-9

    def test_constant(self, rng):
        g = LipschitzFunction(np.zeros((1, 2)), 0.0, 4.0)
        P, Q = random_distribution(rng, 5, 2), random_distribution(rng, 3, 2)
        rep = check_wasserstein_bound(g, P, Q)
        assert rep.gap <= 1e-14 and rep.satisfied

    def test_sweep(self, rng):
        for _ in range(100):
            P, Q = random_pair(rng)
            assert check_wasserstein_bound(random_lipschitz(rng, P.d), P, Q).satisfied

    def test_lipschitz_self_test(self, rng):
        g = LipschitzFunction(rng.normal(size=(4, 3)), -2.5, 1.0)
        x, y = rng.normal(scale=3, size=(10_000, 3)), rng.normal(scale=3, size=(10_000, 3))
        assert np.all(np.abs(g(x) - g(y)) <= g.lipschitz_constant * np.linalg.norm(x - y, axis=1) + 1e-12)


class TestMMDBound:
    def test_single_center(self, rng):
        k = KernelSpec("gaussian_rbf", 0.7)
        g = RkhsFunction(rng.normal(size=(1, 2)), np.array([1.0]), k)
        assert g.rkhs_norm == pytest.approx(1.0)
        P, Q = random_distribution(rng, 5, 2), random_distribution(rng, 6, 2)
        assert check_mmd_bound(g, P, Q).satisfied

    def test_identical(self, rng):
        k = KernelSpec("gaussian_rbf", 1.0)
        P = random_distribution(rng, 5, 2)
        rep = check_mmd_bound(random_rkhs(rng, 2, k), P, P)
        assert rep.gap == 0.0 and rep.bound == pytest.approx(0.0, abs=1e-6) and rep.satisfied

    def test_sweep(self, rng):
        for _ in range(100):
            P, Q = random_pair(rng)
            g = random_rkhs(rng, P.d, KernelSpec("gaussian_rbf", float(rng.uniform(0.1, 3.0))))
            assert check_mmd_bound(g, P, Q).satisfied

    def test_norm_double_loop(self, rng):
        k = KernelSpec("gaussian_rbf", 0.5)
        g = random_rkhs(rng, 3, k)
        z, c = g.centers, g.coefficients
        quad = sum(c[s] * c[t] * np.exp(-0.5 * np.sum((z[s] - z[t]) ** 2))
                   for s in range(len(c)) for t in range(len(c)))
        assert g.rkhs_norm ** 2 == pytest.approx(quad, abs=1e-10)
        assert np.linalg.eigvalsh(g.gram()).min() >= -1e-10

    def test_rbf_lipschitz_bound(self, rng):
        g = random_rkhs(rng, 2, KernelSpec("gaussian_rbf", 1.3))
        x, y = rng.normal(size=(5000, 2)), rng.normal(size=(5000, 2))
        assert np.all(np.abs(g(x) - g(y)) <= g.lipschitz_upper_bound() * np.linalg.norm(x - y, axis=1) + 1e-12)


class TestSweep:
    def test_identical_zero(self):
        (row,) = bound_comparison_sweep(1, 1, identical=True)
        assert row["L_bound"] == 0.0 and row["rkhs_bound"] == pytest.approx(0.0, abs=1e-6)

    def test_rows(self):
        rows = bound_comparison_sweep(3, 25)
        assert len(rows) == 25
        for r in rows:
            assert set(r) == set(BOUND_COLUMNS)
            assert r["gap"] <= r["L_bound"] + 1e-9
            assert r["gap"] <= r["rkhs_bound"] + 1e-9
