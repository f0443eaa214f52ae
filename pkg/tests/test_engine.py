import numpy as np
import pytest

from dickefcs.analytics import current_closed_form, limit_cumulants
from dickefcs.engine import (
    cross_validate,
    cumulants_eigenvalue,
    cumulants_resolvent,
    current_numeric,
    stationary_state_numeric,
)
from dickefcs.errors import ValidationFailure
from dickefcs.liouvillian import build_generator
from dickefcs.model import SystemParams, stationary_distribution

# N = 1 reference cumulants for (Gamma_S, Gamma_D, n_S, n_D) = (1.3, 0.7, 1.7, 0.4),
# frozen from symbolic differentiation of the closed-form 2x2 eigenvalue
SINGLE_ATOM_PARAMS = SystemParams.source_drain(1, 1.3, 1.7, 0.7, 0.4)
SINGLE_ATOM_CUMULANTS = {
    1: 0.16948424068767908,
    2: 0.44285819259556472,
    3: 0.10496491303348662,
    4: 0.26211182504746536,
}

# documented cross-validation grid: couplings 0.3..3, occupations 0.05..5, seed 7
METHOD_GRID_SEED = 7
METHOD_GRID_SIZES = (1, 2, 4, 8, 16)


def sd(n_atoms, g_s, n_s, g_d, n_d):
    return SystemParams.source_drain(n_atoms, g_s, n_s, g_d, n_d)


def method_grid(draws_per_size=4):
    rng = np.random.default_rng(METHOD_GRID_SEED)
    for n_atoms in METHOD_GRID_SIZES:
        for _ in range(draws_per_size):
            g_s, g_d = rng.uniform(0.3, 3, 2)
            n_s, n_d = rng.uniform(0.05, 5, 2)
            yield sd(n_atoms, g_s, n_s, g_d, n_d)


class TestStationaryStateNumeric:
    @pytest.mark.parametrize(
        "params",
        [
            sd(2, 1.0, 2.0, 1.0, 0.0),
            sd(8, 0.4, 5.0, 2.2, 1.3),
            sd(64, 1.0, 1e6, 1.0, 0.0),
            sd(16, 1.0, 0.0, 1.0, 0.0),
        ],
    )
    def test_matches_analytic_distribution(self, params):
        numeric = stationary_state_numeric(build_generator(params))
        assert np.abs(numeric - stationary_distribution(params)).max() <= 1e-12

    def test_reference_point(self):
        numeric = stationary_state_numeric(build_generator(sd(2, 1.0, 2.0, 1.0, 0.0)))
        assert numeric == pytest.approx([4 / 7, 2 / 7, 1 / 7], abs=1e-13)

    def test_null_residual(self):
        gen = build_generator(sd(12, 0.9, 3.0, 1.4, 0.7))
        rho = stationary_state_numeric(gen)
        assert np.abs(gen.matrix() @ rho).max() <= 1e-12 * gen.max_rate()

    def test_nonnegative_and_normalized(self):
        rho = stationary_state_numeric(build_generator(sd(40, 1.0, 0.01, 1.0, 0.0)))
        assert np.all(rho >= 0)
        assert rho.sum() == pytest.approx(1.0, abs=1e-13)


class TestCurrentNumeric:
    def test_reference_point(self):
        assert current_numeric(sd(2, 1.0, 2.0, 1.0, 0.0)) == pytest.approx(6 / 7, rel=1e-12)

    def test_zero_bias(self):
        assert abs(current_numeric(sd(4, 1.0, 0.9, 1.0, 0.9))) <= 1e-12

    def test_source_counting_flips_sign(self):
        params = sd(3, 1.2, 2.5, 0.8, 0.4)
        assert current_numeric(params, counted="source") == pytest.approx(
            -current_numeric(params, counted="drain"), rel=1e-12
        )

    def test_matches_closed_form_on_random_grid(self):
        rng = np.random.default_rng(21)
        for _ in range(40):
            n_atoms = int(rng.integers(1, 65))
            params = sd(n_atoms, *rng.uniform(0.1, 4, 2), *10.0 ** rng.uniform(-3, 3, 2))
            closed = current_closed_form(params)
            assert current_numeric(params) == pytest.approx(closed, rel=1e-10)


class TestEigenvalueCumulants:
    def test_single_atom_reference(self):
        cums = cumulants_eigenvalue(SINGLE_ATOM_PARAMS)
        for k, expected in SINGLE_ATOM_CUMULANTS.items():
            assert cums[k] == pytest.approx(expected, rel=1e-6)
        assert cums[1] == pytest.approx(SINGLE_ATOM_CUMULANTS[1], rel=1e-12)
        assert cums[2] == pytest.approx(SINGLE_ATOM_CUMULANTS[2], rel=1e-8)

    def test_error_estimates_positive(self):
        cums = cumulants_eigenvalue(sd(3, 1.0, 1.0, 1.0, 0.2))
        assert all(err > 0 for err in cums.errors.values())

    def test_odd_cumulants_vanish_at_zero_bias(self):
        cums = cumulants_eigenvalue(sd(4, 1.0, 2.0, 1.0, 2.0))
        assert abs(cums[1]) <= 1e-9 * cums[2]
        assert abs(cums[3]) <= 1e-9 * cums[2]
        assert abs(cums[1]) <= max(cums.errors[1], 1e-12 * cums[2])

    def test_order_cap(self):
        with pytest.raises(ValueError):
            cumulants_eigenvalue(SINGLE_ATOM_PARAMS, orders=(5,))


class TestResolventCumulants:
    def test_single_atom_reference(self):
        cums = cumulants_resolvent(SINGLE_ATOM_PARAMS)
        for k, expected in SINGLE_ATOM_CUMULANTS.items():
            assert cums[k] == pytest.approx(expected, rel=1e-12)

    def test_current_matches_closed_form(self):
        rng = np.random.default_rng(31)
        for _ in range(15):
            n_atoms = int(rng.integers(1, 17))
            params = sd(n_atoms, *rng.uniform(0.2, 3, 2), *rng.uniform(0.0, 8, 2))
            cums = cumulants_resolvent(params, orders=(1,))
            assert cums[1] == pytest.approx(current_closed_form(params), rel=1e-10, abs=1e-13)

    def test_third_cumulant_moment_relation_large_bias(self):
        # the moment-to-cumulant reduction must reproduce the collective value
        params = sd(4, 1.0, 1e6, 1.0, 0.0)
        cums = cumulants_resolvent(params)
        assert cums[3] == pytest.approx(4.0, rel=1e-4)  # Gamma_D N(N+2)/6 = 4

    def test_shift_vanishes_for_first_cumulant(self):
        # starting from the stationary state, <n(t)> = C1 t exactly
        cums = cumulants_resolvent(sd(3, 1.1, 2.2, 0.9, 0.4))
        assert cums.shifts[1] == pytest.approx(0.0, abs=1e-12)

    def test_variance_rate_nonnegative(self):
        for params in method_grid(2):
            assert cumulants_resolvent(params, orders=(2,))[2] >= 0.0

    def test_bias_antisymmetry_with_counted_swap(self):
        params = sd(5, 1.3, 2.0, 0.7, 0.5)
        swapped = sd(5, 0.7, 0.5, 1.3, 2.0)
        # the counted reservoir swaps along with the parameters
        fwd = cumulants_resolvent(params, counted="drain")
        rev = cumulants_resolvent(swapped, counted="drain")
        scale = max(abs(v) for v in fwd.cumulants.values())
        for k in (1, 3):
            assert fwd[k] == pytest.approx(-rev[k], rel=1e-9, abs=1e-12 * scale)
        for k in (2, 4):
            assert fwd[k] == pytest.approx(rev[k], rel=1e-9, abs=1e-12 * scale)


class TestMethodAgreement:
    def test_documented_grid(self):
        worst = 0.0
        for params in method_grid():
            res = cumulants_resolvent(params)
            eig = cumulants_eigenvalue(params)
            scale = max(abs(v) for v in res.cumulants.values())
            for k in (1, 2, 3, 4):
                rel = abs(res[k] - eig[k]) / max(abs(res[k]), 1e-9 * scale)
                worst = max(worst, rel)
        assert worst <= 1e-6

    def test_twenty_point_random_sample(self):
        rng = np.random.default_rng(1234)
        for _ in range(20):
            n_atoms = int(rng.integers(1, 17))
            params = sd(n_atoms, *rng.uniform(0.3, 2.5, 2), *rng.uniform(0.1, 4, 2))
            res = cumulants_resolvent(params)
            eig = cumulants_eigenvalue(params)
            scale = max(abs(v) for v in res.cumulants.values())
            for k in (1, 2, 3, 4):
                assert abs(res[k] - eig[k]) / max(abs(res[k]), 1e-9 * scale) <= 1e-6


class TestScalingCrossover:
    def test_current_ratio_small_and_large_pumping(self):
        def c1(n_atoms, n_s):
            return cumulants_resolvent(sd(n_atoms, 1.0, n_s, 1.0, 0.0), orders=(1,))[1]

        base = c1(1, 1e-3)
        for n_atoms in (2, 4, 8, 16):
            assert c1(n_atoms, 1e-3) / base == pytest.approx(n_atoms, rel=0.02)
            assert c1(n_atoms, 1e6) == pytest.approx(
                n_atoms * (n_atoms + 2) / 6.0, rel=0.02
            )


class TestCrossValidate:
    def test_poisson_regime_passes(self):
        report = cross_validate(sd(4, 1.0, 1e-3, 1.0, 0.0))
        assert report.passed
        assert any("Poisson" in e.name for e in report.entries)

    def test_large_bias_passes(self):
        report = cross_validate(sd(2, 1.0, 1e6, 1.0, 1.0))
        assert report.passed
        assert any("large-bias" in e.name for e in report.entries)

    def test_zero_bias_passes(self):
        report = cross_validate(sd(4, 1.0, 400.0, 1.0, 400.0))
        assert report.passed
        assert any("zero-bias" in e.name for e in report.entries)

    def test_failure_raises_with_quantity_named(self, monkeypatch):
        import dickefcs.engine as engine_module

        good = cumulants_eigenvalue(sd(3, 1.0, 1.5, 0.8, 0.2))
        corrupted = engine_module.CumulantSet(
            cumulants={k: v * (1.01 if k == 3 else 1.0) for k, v in good.cumulants.items()},
            errors=good.errors,
            method="eigenvalue",
        )
        monkeypatch.setattr(engine_module, "cumulants_eigenvalue", lambda *a, **kw: corrupted)
        with pytest.raises(ValidationFailure, match="C3"):
            engine_module.cross_validate(sd(3, 1.0, 1.5, 0.8, 0.2))
