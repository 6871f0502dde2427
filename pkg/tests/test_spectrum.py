import io
import itertools
import math

import numpy as np
import pytest

from pdm_oscillator import (
    BaseSpectrum,
    BracketingError,
    DomainError,
    ModelParams,
    QuantumState,
    angular_multiplicity,
    continuum_threshold,
    degeneracy,
    effective_frequency,
    energy_closed_form,
    energy_implicit,
    harmonic_base,
    solve_deformed_spectrum,
    spectrum_table,
    threshold_gap,
)

P3 = ModelParams(lam=0.02, omega=1.0, hbar=1.0, dim=3)


def bisection_oracle(n, params, iterations=200):
    """Plain scalar bisection of E = hbar*Omega(E)*(n+N/2), written blind."""
    nu = n + params.dim / 2.0
    top = params.omega**2 / (2.0 * params.lam)
    f = lambda e: params.hbar * math.sqrt(max(params.omega**2 - 2 * params.lam * e, 0.0)) * nu - e
    lo, hi = 0.0, top
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestContinuumThreshold:
    def test_reference_values(self):
        assert continuum_threshold(P3) == pytest.approx(25.0, rel=1e-15)
        assert continuum_threshold(ModelParams(lam=0.1, omega=1.0)) == pytest.approx(5.0)
        assert continuum_threshold(ModelParams(lam=0.5, omega=2.0)) == pytest.approx(4.0)

    def test_flat_is_unbounded(self):
        assert continuum_threshold(ModelParams(lam=0.0)) == math.inf


class TestEffectiveFrequency:
    def test_zero_energy(self):
        assert effective_frequency(0.0, P3) == pytest.approx(1.0)

    def test_flat(self):
        p = ModelParams(lam=0.0, omega=1.7)
        assert effective_frequency(123.0, p) == pytest.approx(1.7)

    def test_vanishes_at_threshold(self):
        e = continuum_threshold(P3) * (1.0 - 1e-12)
        assert 0.0 < effective_frequency(e, P3) < 1e-5

    def test_continuum_rejected(self):
        with pytest.raises(DomainError):
            effective_frequency(continuum_threshold(P3), P3)


class TestClosedForm:
    def test_flat_ground_state(self):
        p = ModelParams(lam=0.0, omega=1.0, hbar=1.0, dim=3)
        assert energy_closed_form(0, p) == pytest.approx(1.5, rel=1e-15)

    def test_ground_state_against_bisection_oracle(self):
        oracle = bisection_oracle(0, P3)
        assert oracle == pytest.approx(1.455674848193305, rel=1e-13)
        assert energy_closed_form(0, P3) == pytest.approx(oracle, abs=1e-12)

    def test_high_level_against_oracle(self):
        oracle = bisection_oracle(100, P3)
        assert oracle == pytest.approx(23.64346733129637, rel=1e-13)
        value = energy_closed_form(100, P3)
        assert value == pytest.approx(oracle, abs=1e-10)
        assert value < 25.0

    def test_strictly_increasing_and_confined(self):
        levels = np.arange(2001)
        energy = energy_closed_form(levels, P3)
        assert np.all(np.diff(energy) > 0)
        assert np.all(energy > 0)
        assert np.all(energy < continuum_threshold(P3))

    def test_rejects_zero_omega(self):
        with pytest.raises(DomainError):
            energy_closed_form(0, ModelParams(lam=0.1, omega=0.0))

    def test_rejects_negative_level(self):
        with pytest.raises(DomainError):
            energy_closed_form(-1, P3)


class TestImplicitSolver:
    def test_agrees_with_closed_form(self):
        for n in (0, 1, 7, 50, 300):
            assert energy_implicit(n, P3) == pytest.approx(
                energy_closed_form(n, P3), abs=1e-10
            )

    def test_tiny_lam_continuity(self):
        p = ModelParams(lam=1e-10, omega=1.0, hbar=1.0, dim=3)
        assert energy_implicit(4, p) == pytest.approx(5.5, abs=1e-6)

    def test_flat_lam_branch(self):
        p = ModelParams(lam=0.0, omega=2.0, hbar=1.0, dim=2)
        assert energy_implicit(3, p) == pytest.approx(8.0, rel=1e-14)

    def test_vectorized(self):
        levels = np.arange(150)
        values = energy_implicit(levels, P3)
        assert values.shape == (150,)
        assert np.max(np.abs(values - energy_closed_form(levels, P3))) < 1e-10

    def test_self_consistency_residual(self):
        levels = np.arange(401)
        energy = energy_closed_form(levels, P3)
        nu = levels + 1.5
        residual = np.abs(energy - np.sqrt(1.0 - 0.04 * energy) * nu)
        assert residual.max() < 1e-10

    def test_high_level_approaches_threshold(self):
        value = energy_implicit(300, P3)
        threshold = continuum_threshold(P3)
        assert threshold - value < 0.01 * threshold


class TestThresholdGap:
    def test_matches_direct_difference(self):
        for n in (0, 3, 20):
            direct = continuum_threshold(P3) - energy_closed_form(n, P3)
            assert threshold_gap(n, P3) == pytest.approx(direct, rel=1e-12)

    def test_strictly_decreasing_far_out(self):
        gaps = threshold_gap(np.arange(5001), P3)
        assert np.all(gaps > 0)
        assert np.all(np.diff(gaps) < 0)

    def test_asymptotic_deficit(self):
        # gap ~ omega^4 / (8 lam^3 hbar^2 nu^2) far above the well
        n = 100000
        nu = n + 1.5
        predicted = 1.0 / (8.0 * 0.02**3 * nu**2)
        assert threshold_gap(n, P3) == pytest.approx(predicted, rel=1e-3)

    def test_flat_sentinel(self):
        assert threshold_gap(3, ModelParams(lam=0.0)) == math.inf


class TestDegeneracy:
    def count_tuples(self, n, dim):
        return sum(
            1
            for tup in itertools.product(range(n + 1), repeat=dim)
            if sum(tup) == n
        )

    def test_ground_state(self):
        for dim in (1, 2, 3, 7):
            assert degeneracy(0, dim) == 1

    def test_enumeration_small(self):
        assert degeneracy(2, 3) == self.count_tuples(2, 3) == 6
        assert degeneracy(3, 2) == self.count_tuples(3, 2) == 4

    def test_enumeration_sweep(self):
        for dim in (1, 2, 3, 4):
            for n in range(9):
                assert degeneracy(n, dim) == self.count_tuples(n, dim)

    def test_large_arguments_exact(self):
        assert degeneracy(1000, 3) == (1002 * 1001) // 2


class TestAngularMultiplicity:
    def test_counting_identity(self):
        # sum over radial pairs 2k+l = n of the angular dimensions matches
        # the Cartesian tuple count
        for dim in (2, 3, 4):
            for n in range(13):
                total = sum(
                    angular_multiplicity(n - 2 * k, dim) for k in range(n // 2 + 1)
                )
                assert total == degeneracy(n, dim)

    def test_three_dimensions(self):
        assert [angular_multiplicity(l, 3) for l in range(4)] == [1, 3, 5, 7]

    def test_two_dimensions(self):
        assert [angular_multiplicity(l, 2) for l in range(4)] == [1, 2, 2, 2]


class TestQuantumState:
    def test_cartesian_invariants(self):
        state = QuantumState.cartesian((2, 0, 1), P3)
        assert state.n == 3
        assert state.energy == pytest.approx(energy_closed_form(3, P3), rel=1e-15)
        omega_eff = effective_frequency(state.energy, P3)
        assert state.beta**2 == pytest.approx(omega_eff / P3.hbar, rel=1e-14)

    def test_radial_principal_number(self):
        state = QuantumState.radial(2, 1, P3)
        assert state.n == 5
        assert 0.0 < state.energy < continuum_threshold(P3)

    def test_wrong_tuple_length(self):
        with pytest.raises(DomainError):
            QuantumState.cartesian((1, 2), P3)

    def test_negative_occupation(self):
        with pytest.raises(DomainError):
            QuantumState.cartesian((1, -1, 0), P3)


class TestGenericDeformation:
    def test_harmonic_base_matches_closed_form(self):
        base = harmonic_base(P3)
        for n in (0, 1, 5, 20):
            assert solve_deformed_spectrum(base, n, P3) == pytest.approx(
                energy_closed_form(n, P3), abs=1e-10
            )

    def test_one_dimensional_cross_check(self):
        p = ModelParams(lam=0.05, omega=1.0, hbar=1.0, dim=1)
        base = harmonic_base(p)
        assert solve_deformed_spectrum(base, 2, p) == pytest.approx(
            energy_closed_form(2, p), abs=1e-10
        )

    def test_tiny_lam_returns_base(self):
        p = ModelParams(lam=1e-12, omega=1.0, hbar=1.0, dim=3)
        base = harmonic_base(p)
        assert solve_deformed_spectrum(base, 6, p) == pytest.approx(7.5, abs=1e-6)

    def test_nonharmonic_base(self):
        # quartic-like solvable family, still increasing in frequency
        p = ModelParams(lam=0.03, omega=1.0, hbar=1.0, dim=1)
        base = BaseSpectrum(eval=lambda w, n: w ** 1.5 * (n + 0.7))
        energy = solve_deformed_spectrum(base, 3, p)
        omega_eff = effective_frequency(energy, p)
        assert energy == pytest.approx(base.eval(omega_eff, 3), abs=1e-10)

    def test_non_monotone_base_rejected(self):
        base = BaseSpectrum(eval=lambda w, n: math.sin(20.0 * w))
        with pytest.raises(BracketingError):
            solve_deformed_spectrum(base, 0, P3)

    def test_no_sign_change_rejected(self):
        base = BaseSpectrum(eval=lambda w, n: -1.0 - 0.0 * w + 1e-9 * w)
        with pytest.raises(BracketingError):
            solve_deformed_spectrum(base, 0, P3)

    def test_flat_lam_rejected(self):
        base = harmonic_base(ModelParams(lam=0.0))
        with pytest.raises(DomainError):
            solve_deformed_spectrum(base, 0, ModelParams(lam=0.0))

    def test_bracket_has_exactly_one_sign_change(self):
        # fine sampling of the fixed-point defect for the harmonic base
        base = harmonic_base(P3)
        top = continuum_threshold(P3) * (1.0 - 1e-12)
        for n in (0, 3, 40):
            e = np.linspace(0.0, top, 2000)
            g = base.eval(np.sqrt(1.0 - 0.04 * e), n) - e
            assert int(np.sum(np.diff(np.sign(g)) != 0)) == 1


class TestSpectrumTable:
    def test_single_flat_row(self):
        p = ModelParams(lam=0.0, omega=1.0, hbar=1.0, dim=3)
        table = spectrum_table(0, p)
        assert len(table) == 1
        row = next(table.rows())
        assert row.energy == pytest.approx(1.5, rel=1e-15)
        assert row.degeneracy == 1
        assert row.gap_to_threshold == math.inf
        assert row.residual == 0.0

    def test_monotone_energies_with_small_residuals(self):
        table = spectrum_table(5, P3)
        assert np.all(np.diff(table.energy) > 0)
        assert np.all(table.residual < 1e-10)

    def test_gap_column_strictly_decreasing(self):
        table = spectrum_table(400, P3)
        assert np.all(np.diff(table.gap_to_threshold) < 0)

    def test_csv_round_trip(self):
        table = spectrum_table(3, P3)
        buf = io.StringIO()
        table.to_csv(buf)
        lines = buf.getvalue().strip().split("\n")
        assert lines[0] == "n,energy,degeneracy,gap_to_threshold,residual"
        assert len(lines) == 5
        first = lines[1].split(",")
        assert int(first[0]) == 0
        assert float(first[1]) == pytest.approx(energy_closed_form(0, P3), rel=1e-16)

    def test_json_rows(self):
        table = spectrum_table(2, ModelParams(lam=0.0, omega=1.0, dim=2))
        rows = table.to_json_rows()
        assert rows[0]["gap_to_threshold"] is None  # inf serialized as null
        assert rows[1]["degeneracy"] == 2

    def test_cap(self):
        with pytest.raises(DomainError):
            spectrum_table(100_001, P3)
