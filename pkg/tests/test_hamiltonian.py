import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from czpulse import hamiltonian as ham
from czpulse.hamiltonian import (
    BasisMismatchError,
    CalibrationError,
    NonHermitianError,
    OperatorMatrix,
    SpectralTargets,
    TransmonSpec,
    EJ_to_flux,
    build_coupled_hamiltonian,
    build_transmon_hamiltonian,
    calibrate_EJ,
    calibrate_device,
    diagonalize,
    effective_six_level,
    find_resonance,
    flux_to_EJ,
    frequency_map,
    measure_targets,
    transmon_frequencies,
)
from czpulse.units import ghz, mhz


def small_spec(E_C=1.0, E_J=60.0, cutoff=12):
    return TransmonSpec(E_C=E_C, E_J_max=E_J, charge_cutoff=cutoff)


class TestTransmonSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            TransmonSpec(E_C=-1.0, E_J_max=10.0)
        with pytest.raises(ValueError):
            TransmonSpec(E_C=1.0, E_J_max=0.0)
        with pytest.raises(ValueError):
            TransmonSpec(E_C=1.0, E_J_max=10.0, charge_cutoff=5)

    def test_regime_flag_is_warning_not_error(self):
        spec = TransmonSpec(E_C=1.0, E_J_max=20.0)  # ratio 20 < 50
        assert not spec.in_transmon_regime
        assert "E_J/E_C" in spec.regime_status()
        good = TransmonSpec(E_C=1.0, E_J_max=60.0)
        assert good.in_transmon_regime
        assert good.regime_status() is None


class TestBuildTransmon:
    def test_direct_transcription(self):
        # m_max fixed at the minimum allowed; check the analytic 3x3 core
        spec = TransmonSpec(E_C=1.0, E_J_max=2.0, charge_cutoff=10)
        H = build_transmon_hamiltonian(spec, 2.0).entries
        center = spec.charge_cutoff
        block = H[center - 1 : center + 2, center - 1 : center + 2]
        expected = np.array([[4.0, -1.0, 0.0], [-1.0, 0.0, -1.0], [0.0, -1.0, 4.0]])
        np.testing.assert_allclose(block, expected, atol=0)
        assert H.shape == (21, 21)

    def test_hermitian(self):
        H = build_transmon_hamiltonian(small_spec(), 47.3)
        assert H.hermiticity_defect() < 1e-12

    def test_rejects_nonpositive_EJ(self):
        with pytest.raises(ValueError):
            build_transmon_hamiltonian(small_spec(), 0.0)

    def test_reference_qubit_a_splitting(self, device):
        # calibrated qubit a must reproduce the 6.91 GHz splitting exactly
        spec = device.tunable
        w01, _ = transmon_frequencies(spec, spec.E_J_max)
        # bare value differs from the dressed 6.91 GHz only by the small
        # coupling-induced shift; invert the calibration to check the map
        EJ = calibrate_EJ(spec, w01)
        assert abs(EJ - spec.E_J_max) / spec.E_J_max < 1e-9


class TestDiagonalize:
    def test_permutation(self):
        H = OperatorMatrix(np.diag([3.0, 1.0, 2.0]), "charge")
        spec = diagonalize(H)
        np.testing.assert_allclose(spec.energies, [1.0, 2.0, 3.0])
        # eigenvectors are (signed) unit vectors picking out the sorted order
        np.testing.assert_allclose(np.abs(spec.vectors), np.eye(3)[:, [1, 2, 0]])

    def test_gauge_shift(self):
        rng = np.random.default_rng(7)
        A = rng.standard_normal((8, 8))
        A = A + A.T
        H1 = OperatorMatrix(A, "charge")
        H2 = OperatorMatrix(A + 2.5 * np.eye(8), "charge")
        s1, s2 = diagonalize(H1), diagonalize(H2)
        np.testing.assert_allclose(s2.energies, s1.energies + 2.5, atol=1e-12)
        np.testing.assert_allclose(s2.vectors, s1.vectors, atol=1e-12)

    def test_rejects_non_hermitian(self):
        H = OperatorMatrix(np.array([[0.0, 1.0], [0.0, 0.0]]), "charge")
        with pytest.raises(NonHermitianError):
            diagonalize(H)

    def test_phase_convention(self):
        rng = np.random.default_rng(3)
        A = rng.standard_normal((12, 12)) + 1j * rng.standard_normal((12, 12))
        A = A + A.conj().T
        spec = diagonalize(OperatorMatrix(A, "charge"))
        idx = np.argmax(np.abs(spec.vectors), axis=0)
        pivots = spec.vectors[idx, np.arange(12)]
        assert np.all(pivots.real > 0)
        assert np.max(np.abs(pivots.imag)) < 1e-12

    def test_anharmonicity_of_reference_qubit_a(self, device):
        spec = device.tunable
        H = build_transmon_hamiltonian(spec, spec.E_J_max)
        s = diagonalize(H)
        alpha = s.energies[2] - 2 * s.energies[1] + s.energies[0]
        assert abs(alpha - (-ghz(0.331))) < 0.01 * ghz(0.331)


class TestOperatorMatrix:
    def test_basis_mismatch(self):
        A = OperatorMatrix(np.eye(2), "charge(a)")
        B = OperatorMatrix(np.eye(2), "charge(b)")
        with pytest.raises(BasisMismatchError):
            A + B
        with pytest.raises(BasisMismatchError):
            A @ B


class TestTransmonFrequencies:
    def test_asymptotic_agreement(self):
        # EJ/EC = 50: exact values against the harmonic-limit formulas.
        # The leading correction to omega01 is -E_C, i.e. ~5.3% right at
        # ratio 50, so the loose bound sits just above that.
        spec = TransmonSpec(E_C=1.0, E_J_max=50.0, charge_cutoff=15)
        w01, alpha = transmon_frequencies(spec, 50.0)
        assert abs(w01 - np.sqrt(8 * 50.0)) / np.sqrt(8 * 50.0) < 0.06
        assert abs(alpha - (-1.0)) < 0.30

    def test_monotone_in_EJ(self):
        spec = small_spec()
        w1, _ = transmon_frequencies(spec, 30.0)
        w2, _ = transmon_frequencies(spec, 60.0)
        assert w2 > w1

    def test_reference_qubit_b(self, device):
        spec = device.parked
        w01, alpha = transmon_frequencies(spec, spec.E_J_max)
        # bare values sit within 1% of the dressed targets (the dressed
        # calibration absorbs the coupling-induced shifts into the bare spec)
        assert abs(w01 - ghz(5.69)) / ghz(5.69) < 1e-2
        assert abs(alpha - (-ghz(0.300))) / ghz(0.300) < 1e-2


class TestCalibrateEJ:
    def test_fixed_point_at_sweet_spot(self):
        spec = small_spec()
        w_max, _ = transmon_frequencies(spec, spec.E_J_max)
        assert calibrate_EJ(spec, w_max) == spec.E_J_max

    def test_round_trip(self):
        spec = small_spec()
        target = 0.83 * transmon_frequencies(spec, spec.E_J_max)[0]
        EJ = calibrate_EJ(spec, target)
        w, _ = transmon_frequencies(spec, EJ)
        assert abs(w - target) / target < 1e-9

    def test_out_of_range(self):
        spec = small_spec()
        w_max, _ = transmon_frequencies(spec, spec.E_J_max)
        with pytest.raises(CalibrationError):
            calibrate_EJ(spec, 1.5 * w_max)

    def test_qubit_a_regression_value(self):
        # frozen oracle value: bisection against exact diagonalization for
        # E_C = 2*pi*0.331 GHz, target 2*pi*6.91 GHz (computed once)
        spec = TransmonSpec(E_C=ghz(0.331), E_J_max=200.0, charge_cutoff=12)
        EJ = calibrate_EJ(spec, ghz(6.91))
        w, _ = transmon_frequencies(spec, EJ)
        assert abs(w - ghz(6.91)) / ghz(6.91) < 1e-12
        assert EJ == pytest.approx(125.00543504926614, rel=1e-9)


class TestFluxMaps:
    def test_sweet_spot(self):
        spec = small_spec()
        assert flux_to_EJ(spec, 0.0) == spec.E_J_max

    def test_round_trip(self):
        spec = small_spec()
        phis = np.linspace(0.0, 0.24 * np.pi, 40)
        back = EJ_to_flux(spec, flux_to_EJ(spec, phis))
        np.testing.assert_allclose(back, phis, atol=1e-12)

    def test_half_EJ_is_pi_over_3(self):
        spec = small_spec()
        phi = EJ_to_flux(spec, spec.E_J_max / 2)
        assert 2 * phi == pytest.approx(np.pi / 3, abs=1e-12)

    def test_rejects_closed_squid(self):
        spec = small_spec()
        with pytest.raises(ValueError):
            EJ_to_flux(spec, 0.0)
        with pytest.raises(ValueError):
            EJ_to_flux(spec, -3.0)

    @given(st.floats(min_value=1e-3, max_value=0.999))
    @settings(max_examples=50, deadline=None)
    def test_round_trip_property(self, frac):
        spec = TransmonSpec(E_C=1.0, E_J_max=60.0)
        EJ = frac * spec.E_J_max
        assert flux_to_EJ(spec, EJ_to_flux(spec, EJ)) == pytest.approx(
            EJ, rel=1e-12
        )


class TestCalibrateDevice:
    def test_targets_reproduced(self, device):
        meas = measure_targets(device)
        t = device.targets
        assert abs(meas.omega_a - t.omega_a) / t.omega_a < 5e-3
        assert abs(meas.omega_b - t.omega_b) / t.omega_b < 5e-3
        assert abs(meas.alpha_a - t.alpha_a) / abs(t.alpha_a) < 5e-3
        assert abs(meas.alpha_b - t.alpha_b) / abs(t.alpha_b) < 5e-3
        assert abs(meas.J_1 - t.J_1) / t.J_1 < 1e-3
        assert abs(meas.J_2 - t.J_2) / t.J_2 < 0.10

    def test_J1_fitted_tightly(self, device):
        assert abs(device.J1_realized - mhz(14.3)) / mhz(14.3) < 1e-3

    def test_idempotence(self, device):
        # re-measuring targets from the calibrated device reproduces inputs
        meas = measure_targets(device)
        t = device.targets
        assert meas.omega_a == pytest.approx(t.omega_a, rel=1e-9)
        assert meas.alpha_b == pytest.approx(t.alpha_b, rel=1e-8)

    def test_ordering_at_parking(self, device):
        meas = measure_targets(device)
        assert meas.omega_a >= meas.omega_b


class TestCoupledHamiltonian:
    def test_hermitian(self, device):
        H = build_coupled_hamiltonian(device, device.tunable.E_J_max)
        assert H.hermiticity_defect() < 1e-12

    def test_zero_coupling_tensor_additivity(self, device):
        from dataclasses import replace

        dev0 = replace(device, g_C=0.0)
        H = build_coupled_hamiltonian(dev0, dev0.tunable.E_J_max)
        w = np.linalg.eigvalsh(H.entries)
        ea = np.linalg.eigvalsh(
            build_transmon_hamiltonian(dev0.tunable, dev0.tunable.E_J_max).entries
        )
        eb = np.linalg.eigvalsh(
            build_transmon_hamiltonian(dev0.parked, dev0.parked.E_J_max).entries
        )
        sums = np.sort((ea[:8, None] + eb[None, :8]).ravel())
        np.testing.assert_allclose(w[:10], sums[:10], atol=1e-9)

    def test_six_lowest_match_six_level_model(self, device):
        # full-model dressed levels vs the 6x6 matrix at parking, after
        # removing the ground-state offset; MHz-scale agreement
        H = build_coupled_hamiltonian(device, device.tunable.E_J_max)
        w = np.linalg.eigvalsh(H.entries)[:6]
        w = w - w[0]
        model = effective_six_level(device, device.targets.omega_a)
        wm = np.linalg.eigvalsh(model.entries)
        wm = np.sort(wm) - wm.min()
        np.testing.assert_allclose(w, np.sort(wm), atol=mhz(1.0))

    def test_cutoff_convergence(self):
        # increasing m_max 12 -> 20 moves retained eigenvalues < 2*pi*1 kHz
        dev12 = calibrate_device(charge_cutoff=12)
        dev20 = calibrate_device(charge_cutoff=20)
        w12 = np.linalg.eigvalsh(
            build_coupled_hamiltonian(dev12, dev12.tunable.E_J_max).entries
        )[:12]
        w20 = np.linalg.eigvalsh(
            build_coupled_hamiltonian(dev20, dev20.tunable.E_J_max).entries
        )[:12]
        assert np.max(np.abs((w12 - w12[0]) - (w20 - w20[0]))) < mhz(1e-3)

    def test_eigenvector_continuity(self, device):
        fmap = frequency_map(device.tunable)
        w0 = ghz(6.4)
        s1 = diagonalize(build_coupled_hamiltonian(device, fmap.ej(w0)))
        s2 = diagonalize(
            build_coupled_hamiltonian(device, fmap.ej(w0 + mhz(0.1)))
        )
        overlaps = np.abs(np.sum(s1.vectors[:, :8] * s2.vectors[:, :8], axis=0))
        assert np.min(overlaps) >= 0.999


class TestSixLevel:
    def test_diagonal_when_uncoupled(self, device):
        from dataclasses import replace

        dev = replace(device, J1_realized=None, J2_realized=None,
                      targets=replace(device.targets, J_1=1e-9, J_2=1e-9))
        H = effective_six_level(dev, ghz(6.4)).entries
        off = H - np.diag(np.diag(H))
        assert np.max(np.abs(off)) < 1e-8

    def test_J2_entries(self, device):
        H = effective_six_level(device, ghz(6.4)).entries
        assert H[4, 5] == pytest.approx(device.J2)
        assert H[3, 4] == pytest.approx(device.J2)
        assert H[1, 2] == pytest.approx(device.J1)

    def test_two_excitation_gap_at_resonance(self, device):
        star, _ = find_resonance(device)
        H = effective_six_level(device, star).entries
        block = H[3:, 3:]
        w = np.linalg.eigvalsh(block)
        # gap of the crossing pair is about 2 J_2
        assert abs((w[2] - w[1]) - 2 * device.J2) < 0.2 * device.J2


class TestFindResonance:
    def test_location_near_paper_value(self, device):
        star, gap = find_resonance(device)
        assert abs(star - ghz(6.02)) < mhz(15.0)

    def test_gap_matches_J2(self, device):
        _, gap = find_resonance(device)
        assert abs(0.5 * gap - mhz(20.2)) / mhz(20.2) < 0.10

    def test_gap_vanishes_without_coupling(self, device):
        from dataclasses import replace

        dev0 = replace(device, g_C=1e-8 * device.g_C)
        _, gap = ham._find_resonance_raw(dev0)
        assert gap < mhz(0.01)
