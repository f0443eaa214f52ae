import math

import numpy as np
import pytest

from dickefcs.errors import AffinityDivergenceError, InsufficientStatisticsError
from dickefcs.fluctuation import (
    eigenvalue_symmetry_violation,
    fluctuation_theorem_check,
    occupation_affinity,
    symmetry_check,
    thermal_affinity,
)
from dickefcs.model import SystemParams, thermal_occupation


def thermal_pair(n_atoms, beta_s, beta_d, gamma=1.0, omega=1.0):
    return SystemParams.source_drain(
        n_atoms,
        gamma,
        thermal_occupation(beta_s, omega),
        gamma,
        thermal_occupation(beta_d, omega),
        omega=omega,
    )


class TestAffinity:
    def test_thermal_identity(self):
        # drain-counting affinity equals omega*(beta_S - beta_D) for Bose occupations
        for beta_s, beta_d, omega in [(0.5, 1.0, 1.0), (0.2, 1.7, 2.0), (3.0, 0.4, 0.7)]:
            params = thermal_pair(2, beta_s, beta_d, omega=omega)
            expected = omega * (beta_s - beta_d)
            assert occupation_affinity(params) == pytest.approx(expected, abs=1e-12)
            assert thermal_affinity(params) == pytest.approx(expected, abs=1e-12)

    def test_source_counting_flips_sign(self):
        params = thermal_pair(2, 0.5, 1.0)
        assert occupation_affinity(params, counted="source") == pytest.approx(
            -occupation_affinity(params, counted="drain"), abs=0
        )

    def test_divergence_at_vacuum(self):
        params = SystemParams.source_drain(2, 1.0, 1.0, 1.0, 0.0)
        with pytest.raises(AffinityDivergenceError):
            occupation_affinity(params)


class TestPolynomialSymmetry:
    def test_zero_affinity_at_zero_bias(self):
        params = SystemParams.source_drain(3, 1.0, 0.8, 1.3, 0.8)
        report = symmetry_check(params)
        assert report.affinity == pytest.approx(0.0, abs=1e-15)
        assert report.max_violation <= 1e-12

    def test_single_atom_thermal(self):
        report = symmetry_check(thermal_pair(1, 1.0, 0.5))
        assert report.max_violation <= 1e-10

    def test_moderate_size_random_thermal(self):
        rng = np.random.default_rng(17)
        for _ in range(5):
            beta_s, beta_d = rng.uniform(0.2, 2.0, 2)
            params = thermal_pair(6, beta_s, beta_d, gamma=float(rng.uniform(0.5, 2.0)))
            assert symmetry_check(params).max_violation <= 1e-8

    def test_report_carries_thermal_affinity(self):
        report = symmetry_check(thermal_pair(2, 0.5, 1.0))
        assert report.affinity == pytest.approx(report.thermal_affinity, abs=1e-12)
        assert report.affinity == pytest.approx(-0.5, abs=1e-12)


class TestEigenvalueSymmetry:
    @pytest.mark.parametrize("n_atoms", [1, 4, 16, 64])
    def test_dominant_branch_inherits_symmetry(self, n_atoms):
        params = thermal_pair(n_atoms, 0.5, 1.0)
        assert eigenvalue_symmetry_violation(params, 1.0) <= 1e-8

    def test_asymmetric_couplings(self):
        params = SystemParams.source_drain(8, 1.4, 2.0, 0.6, 0.5)
        assert eigenvalue_symmetry_violation(params, 0.7) <= 1e-8


class TestFluctuationTheorem:
    def test_equilibrium_ratio_is_flat(self):
        params = thermal_pair(2, 0.8, 0.8)
        report = fluctuation_theorem_check(params, 20.0, 3)
        assert report.slope_theory == pytest.approx(0.0, abs=1e-14)
        assert report.max_abs_deviation <= 1e-9

    def test_thermal_slope_source_counting(self):
        # beta_S = 0.5, beta_D = 1.0: ln[P_n/P_-n] -> omega (beta_S - beta_D) n = -0.5 n
        params = thermal_pair(2, 0.5, 1.0)
        report = fluctuation_theorem_check(params, 50.0, 5, counted="source")
        assert report.slope_theory == pytest.approx(-0.5, abs=1e-12)
        assert report.max_abs_deviation <= 0.02

    def test_thermal_slope_drain_counting(self):
        # counting at the drain the same scenario gives +0.5 n
        params = thermal_pair(2, 0.5, 1.0)
        report = fluctuation_theorem_check(params, 50.0, 5, counted="drain")
        assert report.slope_theory == pytest.approx(0.5, abs=1e-12)
        assert report.max_abs_deviation <= 0.02

    def test_deviation_shrinks_with_time(self):
        params = thermal_pair(2, 0.5, 1.0)
        devs = [
            fluctuation_theorem_check(params, t, 3).max_abs_deviation for t in (10.0, 30.0, 100.0)
        ]
        assert devs[0] > devs[1] > devs[2]

    def test_insufficient_statistics(self):
        params = thermal_pair(1, 0.5, 1.0)
        with pytest.raises(InsufficientStatisticsError):
            fluctuation_theorem_check(params, 0.01, 250)
