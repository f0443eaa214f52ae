import numpy as np
import pytest

from dickefcs.errors import UnknownReservoirError
from dickefcs.liouvillian import (
    CountingAssignment,
    build_generator,
    characteristic_polynomial,
    counting_derivative,
    dominant_eigenvalue,
    dress_with_counting,
    ladder_weights,
)
from dickefcs.model import SystemParams, stationary_distribution


def sd(n_atoms, g_s, n_s, g_d, n_d):
    return SystemParams.source_drain(n_atoms, g_s, n_s, g_d, n_d)


class TestLadderWeights:
    def test_single_atom(self):
        absorption, emission = ladder_weights(1)
        assert np.allclose(absorption, [1.0, 0.0])
        assert np.allclose(emission, [0.0, 1.0])

    def test_two_atoms(self):
        # j = 1: A(-1) = 2, A(0) = 2, E(1) = 2, E(0) = 2
        absorption, emission = ladder_weights(2)
        assert np.allclose(absorption, [2.0, 2.0, 0.0])
        assert np.allclose(emission, [0.0, 2.0, 2.0])

    @pytest.mark.parametrize("n_atoms", [1, 2, 3, 7, 64])
    def test_no_ladder_leakage(self, n_atoms):
        absorption, emission = ladder_weights(n_atoms)
        assert absorption[-1] == 0.0  # top state absorbs nothing
        assert emission[0] == 0.0     # ground state emits nothing
        assert np.all(absorption[:-1] > 0) and np.all(emission[1:] > 0)


class TestBuildGenerator:
    def test_single_atom_rates(self):
        gen = build_generator(sd(1, 1.3, 1.7, 0.7, 0.4))
        up = 1.3 * 1.7 + 0.7 * 0.4
        down = 1.3 * 2.7 + 0.7 * 1.4
        assert np.allclose(gen.matrix(), [[-up, down], [up, -down]])

    @pytest.mark.parametrize("n_atoms", [1, 2, 8, 64, 256])
    def test_column_sums_vanish(self, n_atoms):
        # trace preservation at machine precision; the absolute residual is a
        # few ulps of the largest rate (~N^2/4 here), so the bound is scale-aware
        gen = build_generator(sd(n_atoms, 1.2, 2.5, 0.8, 0.7))
        assert np.abs(gen.matrix().sum(axis=0)).max() <= 1e-13 * max(1.0, gen.max_rate())

    @pytest.mark.parametrize("n_atoms", [1, 2, 8, 16])
    def test_column_sums_vanish_absolute_small_systems(self, n_atoms):
        gen = build_generator(sd(n_atoms, 1.2, 2.5, 0.8, 0.7))
        assert np.abs(gen.matrix().sum(axis=0)).max() <= 1e-13

    @pytest.mark.parametrize("n_atoms", [1, 2, 5, 33, 256])
    def test_annihilates_stationary_distribution(self, n_atoms):
        params = sd(n_atoms, 1.0, 4.0, 0.6, 0.5)
        gen = build_generator(params)
        residual = gen.matrix() @ stationary_distribution(params)
        assert np.abs(residual).max() <= 1e-12

    def test_partial_rates_nonnegative(self):
        gen = build_generator(sd(5, 0.9, 1.1, 1.4, 0.0))
        for label in gen.labels:
            assert np.all(gen.up_parts[label] >= 0)
            assert np.all(gen.down_parts[label] >= 0)


class TestCountingDressing:
    def test_zero_phase_is_identity(self):
        gen = build_generator(sd(3, 1.0, 1.5, 0.5, 0.2))
        counted = dress_with_counting(gen, CountingAssignment.drain(0.0))
        assert np.allclose(counted.matrix, gen.matrix())

    def test_pi_phase_negates_drain_emission(self):
        params = sd(1, 1.0, 1.0, 0.5, 0.0)  # vacuum drain: no drain absorption
        gen = build_generator(params)
        plain = gen.matrix()
        counted = dress_with_counting(gen, CountingAssignment.drain(np.pi)).matrix
        # emission entry (0, 1): source part unchanged, drain part negated
        assert counted[0, 1] == pytest.approx(1.0 * 2.0 - 0.5 * 1.0, rel=1e-12)
        assert counted[1, 0] == pytest.approx(plain[1, 0], rel=1e-12)  # no drain absorption
        assert np.allclose(np.diag(counted), np.diag(plain))

    def test_half_pi_phase_gives_imaginary_entry(self):
        gen = build_generator(sd(1, 1.0, 1.0, 1.0, 0.0))
        counted = dress_with_counting(gen, CountingAssignment.drain(np.pi / 2)).matrix
        # drain emission contributes i * Gamma_D (1 + 0) * E = 1j on top of the source part
        assert counted[0, 1] == pytest.approx(1.0 * 2.0 + 1j * 1.0, rel=1e-12)

    def test_unknown_reservoir(self):
        gen = build_generator(sd(1, 1.0, 1.0, 1.0, 0.0))
        with pytest.raises(UnknownReservoirError):
            dress_with_counting(gen, CountingAssignment.single(0.3))

    def test_counting_derivative_structure(self):
        gen = build_generator(sd(2, 1.0, 1.0, 0.7, 0.4))
        l1 = counting_derivative(gen, "drain", 1)
        l2 = counting_derivative(gen, "drain", 2)
        assert np.allclose(np.diag(l1), 0.0)
        assert np.allclose(l1[0, 1], 1j * gen.down_parts["drain"][1])    # (+i) on emission
        assert np.allclose(l2[0, 1], -gen.down_parts["drain"][1])        # (+i)^2 = -1
        assert np.allclose(l1[1, 0], -1j * gen.up_parts["drain"][0])     # (-i) on absorption


class TestDominantEigenvalue:
    def test_zero_at_zero_field(self):
        gen = build_generator(sd(4, 1.1, 2.0, 0.9, 0.3))
        counted = dress_with_counting(gen, CountingAssignment.drain(0.0))
        assert abs(dominant_eigenvalue(counted)) <= 1e-12 * gen.max_rate()

    def test_two_state_closed_form(self):
        # quadratic formula on the 2x2 dressed generator
        g_s, g_d, n_s, n_d, chi = 1.3, 0.7, 1.7, 0.4, 0.23
        params = sd(1, g_s, n_s, g_d, n_d)
        counted = dress_with_counting(build_generator(params), CountingAssignment.drain(chi))
        up = g_s * n_s + g_d * n_d
        down = g_s * (1 + n_s) + g_d * (1 + n_d)
        gain = (g_s * n_s + g_d * n_d * np.exp(-1j * chi)) * (
            g_s * (1 + n_s) + g_d * (1 + n_d) * np.exp(1j * chi)
        )
        expected = -(up + down) / 2 + np.sqrt((up + down) ** 2 / 4 - up * down + gain)
        assert dominant_eigenvalue(counted) == pytest.approx(expected, rel=1e-10)

    def test_poisson_regime_eigenvalue(self):
        # lambda ~ gamma_cl N n_S (e^{i chi} - 1) for a weakly pumped medium
        n_s, chi = 1e-4, 0.2
        params = sd(1, 1.0, n_s, 1.0, 0.0)
        counted = dress_with_counting(build_generator(params), CountingAssignment.drain(chi))
        expected = 0.5 * 1 * n_s * (np.exp(1j * chi) - 1.0)
        assert dominant_eigenvalue(counted) == pytest.approx(expected, rel=2e-4)

    @pytest.mark.parametrize("chi", [0.1, 0.8, 2.4, 3.1])
    def test_negative_real_part_on_real_axis(self, chi):
        gen = build_generator(sd(6, 1.0, 1.8, 0.8, 0.6))
        counted = dress_with_counting(gen, CountingAssignment.drain(chi))
        assert dominant_eigenvalue(counted).real <= 1e-12 * gen.max_rate()

    @pytest.mark.parametrize("chi", [0.3, 1.2, 2.5])
    def test_two_pi_periodicity(self, chi):
        gen = build_generator(sd(3, 0.9, 1.1, 1.2, 0.4))
        lam_a = dominant_eigenvalue(dress_with_counting(gen, CountingAssignment.drain(chi)))
        lam_b = dominant_eigenvalue(
            dress_with_counting(gen, CountingAssignment.drain(chi + 2 * np.pi))
        )
        assert lam_a == pytest.approx(lam_b, abs=1e-10 * gen.max_rate())


class TestCharacteristicPolynomial:
    def test_constant_coefficient_vanishes_at_zero_field(self):
        gen = build_generator(sd(5, 1.0, 1.3, 0.6, 0.2))
        counted = dress_with_counting(gen, CountingAssignment.drain(0.0))
        coeffs = characteristic_polynomial(counted)
        assert abs(coeffs[0]) <= 1e-12 * np.abs(coeffs).max()

    def test_two_state_hand_expansion(self):
        g_s, g_d, n_s, n_d, chi = 0.8, 1.1, 0.9, 0.2, 0.37
        counted = dress_with_counting(
            build_generator(sd(1, g_s, n_s, g_d, n_d)), CountingAssignment.drain(chi)
        )
        mat = counted.matrix
        coeffs = characteristic_polynomial(counted)
        # det(L - lambda) = lambda^2 - tr lambda + det
        assert coeffs[2] == pytest.approx(1.0, rel=1e-14)
        assert coeffs[1] == pytest.approx(-(mat[0, 0] + mat[1, 1]), rel=1e-14)
        assert coeffs[0] == pytest.approx(
            mat[0, 0] * mat[1, 1] - mat[0, 1] * mat[1, 0], rel=1e-14
        )

    def test_roots_match_eigenvalues(self):
        gen = build_generator(sd(4, 1.0, 0.8, 0.7, 0.3))
        counted = dress_with_counting(gen, CountingAssignment.drain(0.6))
        coeffs = characteristic_polynomial(counted)
        roots = np.sort_complex(np.polynomial.polynomial.polyroots(coeffs))
        eigs = np.sort_complex(np.linalg.eigvals(counted.matrix))
        assert np.abs(roots - eigs).max() <= 1e-8 * gen.max_rate()
