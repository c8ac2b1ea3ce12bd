import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from casimir_mems import (
    CasimirSpherePlateLaw,
    DomainError,
    DriveConfig,
    InstabilityError,
    NullForceLaw,
    SpherePlateGeometry,
    TaylorCoefficients,
    TorsionalOscillator,
    hysteresis_window,
    linearized_shift,
    response_curve,
    steady_state_amplitudes,
    taylor_coefficients,
)

F0 = 2753.47
INERTIA = 7.1e-17
Q = 7150.0
LEVER = 131e-6
RADIUS = 100e-6


@pytest.fixture
def osc():
    return TorsionalOscillator.from_frequency(F0, INERTIA, Q)


@pytest.fixture
def geom():
    return SpherePlateGeometry(radius_R=RADIUS, lever_b=LEVER, z0=122.4e-9, z1=85.9e-9)


@pytest.fixture
def law():
    return CasimirSpherePlateLaw(RADIUS)


class TestOscillator:
    def test_paper_parameters(self, osc):
        assert osc.omega0 == pytest.approx(17300.562247759775, rel=1e-14)
        assert osc.gamma == pytest.approx(1.209829527815369, rel=1e-14)
        assert osc.spring_k == pytest.approx(2.1250971240291362e-08, rel=1e-14)

    def test_stiffness_route_matches_frequency_route(self, osc):
        other = TorsionalOscillator.from_stiffness(osc.spring_k, INERTIA, Q)
        assert other.omega0 == pytest.approx(osc.omega0, rel=1e-12)

    def test_inconsistent_fields_rejected(self, osc):
        with pytest.raises(DomainError):
            TorsionalOscillator(
                spring_k=osc.spring_k,
                inertia_I=INERTIA,
                omega0=osc.omega0 * 1.01,
                gamma=osc.gamma,
                quality_Q=Q,
            )

    def test_undamped_limit_allowed(self):
        osc = TorsionalOscillator.from_frequency(F0, INERTIA, math.inf)
        assert osc.gamma == 0.0

    def test_overdamped_rejected(self):
        with pytest.raises(DomainError):
            TorsionalOscillator.from_frequency(F0, INERTIA, 0.4)


class TestLinearizedShift:
    def test_shift_at_closest_approach(self, osc, law):
        # 85.9 nm gap: first-order shift of -104.806 rad/s (-16.68 Hz)
        shifted = linearized_shift(osc, LEVER, law.derivative(85.9e-9, 1))
        assert shifted.omega1 - osc.omega0 == pytest.approx(
            -104.8061119353525, rel=1e-9
        )

    def test_exact_eigenfrequency_sits_below_first_order(self, osc, law):
        shifted = linearized_shift(osc, LEVER, law.derivative(85.9e-9, 1))
        assert shifted.omega_exact < shifted.omega1 < osc.omega0
        diff_hz = (shifted.omega_exact - shifted.omega1) / (2.0 * math.pi)
        assert diff_hz == pytest.approx(-0.050832, abs=1e-4)

    def test_exact_and_linear_agree_when_gradient_is_weak(self, osc, law):
        shifted = linearized_shift(osc, LEVER, law.derivative(2e-6, 1))
        assert shifted.omega_exact == pytest.approx(shifted.omega1, rel=1e-9)

    def test_attractive_gradient_softens(self, osc):
        assert linearized_shift(osc, LEVER, 1e-3).omega1 < osc.omega0

    def test_repulsive_gradient_stiffens(self, osc):
        assert linearized_shift(osc, LEVER, -1e-3).omega1 > osc.omega0

    def test_pull_in_gradient_rejected(self, osc, law):
        # at 25 nm the Casimir gradient exceeds the torsional stiffness
        with pytest.raises(InstabilityError):
            linearized_shift(osc, LEVER, law.derivative(25e-9, 1))


class TestTaylorCoefficients:
    @pytest.mark.parametrize(
        "z, kappa",
        [
            (141e-9, -31250483.109017096),
            (116.5e-9, -98569110.96691361),
            (98e-9, -280022225.3083758),
        ],
    )
    def test_nonlinearity_parameter(self, osc, geom, law, z, kappa):
        coeffs = taylor_coefficients(osc, geom, law, z)
        assert coeffs.kappa == pytest.approx(kappa, rel=1e-10)

    def test_negligible_nonlinearity_at_large_gap(self, osc, geom, law):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            coeffs = taylor_coefficients(osc, geom, law, 3.3e-6)
        assert coeffs.kappa == pytest.approx(-0.18956503283459594, rel=1e-9)
        assert abs(coeffs.kappa) < 0.2

    def test_softening_signs(self, osc, geom, law):
        coeffs = taylor_coefficients(osc, geom, law, 116.5e-9)
        assert coeffs.alpha < 0.0
        assert coeffs.beta < 0.0
        assert coeffs.kappa < 0.0

    def test_kappa_combination_identity(self, osc, geom, law):
        c = taylor_coefficients(osc, geom, law, 141e-9)
        expected = 3.0 * c.beta / (8.0 * c.omega1) - 5.0 * c.alpha**2 / (
            12.0 * c.omega1**3
        )
        assert c.kappa == pytest.approx(expected, rel=1e-12)

    def test_inconsistent_kappa_rejected(self, osc, geom, law):
        c = taylor_coefficients(osc, geom, law, 141e-9)
        with pytest.raises(DomainError):
            TaylorCoefficients(
                omega1=c.omega1,
                alpha=c.alpha,
                beta=c.beta,
                kappa=2.0 * c.kappa,
                source_z=c.source_z,
            )

    def test_exact_frequency_model_shifts_down(self, osc, geom, law):
        linear = taylor_coefficients(osc, geom, law, 98e-9, frequency_model="linear")
        exact = taylor_coefficients(osc, geom, law, 98e-9, frequency_model="exact")
        assert exact.omega1 < linear.omega1

    def test_unknown_frequency_model_rejected(self, osc, geom, law):
        with pytest.raises(DomainError):
            taylor_coefficients(osc, geom, law, 98e-9, frequency_model="quadratic")

    def test_null_law_reduces_to_bare_oscillator(self, osc, geom):
        coeffs = taylor_coefficients(osc, geom, NullForceLaw(), 100e-9)
        assert coeffs.omega1 == osc.omega0
        assert coeffs.kappa == 0.0


class TestSteadyStateAmplitudes:
    TAU = 8.8484e-16

    def coeffs(self, osc, geom, law):
        return taylor_coefficients(osc, geom, law, 98e-9)

    def test_single_root_outside_window(self, osc, geom, law):
        c = self.coeffs(osc, geom, law)
        for detuning in (-30.0, -4.0, 10.0):
            sol = steady_state_amplitudes(
                c, osc, DriveConfig(torque_tau=self.TAU, omega=c.omega1 + detuning)
            )
            assert len(sol.roots) == 1
            assert sol.roots[0].stable

    def test_three_roots_inside_window(self, osc, geom, law):
        c = self.coeffs(osc, geom, law)
        sol = steady_state_amplitudes(
            c, osc, DriveConfig(torque_tau=self.TAU, omega=c.omega1 - 15.0)
        )
        assert [r.stable for r in sol.roots] == [True, False, True]
        amps = [r.amplitude_A for r in sol.roots]
        assert amps == sorted(amps)

    def test_roots_satisfy_response_polynomial(self, osc, geom, law):
        c = self.coeffs(osc, geom, law)
        lam = osc.gamma
        for detuning in (-25.0, -15.0, -6.5, 0.0):
            omega = c.omega1 + detuning
            p_drive = self.TAU**2 / (4.0 * INERTIA**2 * c.omega1**2)
            sol = steady_state_amplitudes(
                c, osc, DriveConfig(torque_tau=self.TAU, omega=omega)
            )
            for root in sol.roots:
                y = root.amplitude_A**2
                residual = (
                    c.kappa**2 * y**3
                    - 2.0 * c.kappa * detuning * y**2
                    + (detuning**2 + lam**2) * y
                    - p_drive
                )
                assert abs(residual) < 1e-8 * p_drive

    def test_amplitudes_respect_drive_limit(self, osc, geom, law):
        # no steady state can exceed tau / (2 I omega1 gamma)
        c = self.coeffs(osc, geom, law)
        cap = self.TAU / (2.0 * INERTIA * c.omega1 * osc.gamma)
        for detuning in np.linspace(-30.0, 10.0, 41):
            sol = steady_state_amplitudes(
                c, osc, DriveConfig(torque_tau=self.TAU, omega=c.omega1 + detuning)
            )
            for root in sol.roots:
                assert root.amplitude_A <= cap * (1.0 + 1e-9)

    def test_zero_drive_gives_zero_amplitude(self, osc, geom, law):
        c = self.coeffs(osc, geom, law)
        sol = steady_state_amplitudes(
            c, osc, DriveConfig(torque_tau=0.0, omega=c.omega1)
        )
        assert len(sol.roots) == 1
        assert sol.roots[0].amplitude_A == 0.0

    def test_undamped_oscillator_rejected(self, geom, law):
        free = TorsionalOscillator.from_frequency(F0, INERTIA, math.inf)
        c = taylor_coefficients(free, geom, law, 98e-9)
        with pytest.raises(DomainError):
            steady_state_amplitudes(
                c, free, DriveConfig(torque_tau=self.TAU, omega=c.omega1)
            )

    @given(
        kappa=st.floats(min_value=-1e9, max_value=-1e2),
        lam=st.floats(min_value=0.05, max_value=50.0),
        tau=st.floats(min_value=1e-18, max_value=1e-13),
        detuning=st.floats(min_value=-60.0, max_value=30.0),
    )
    @settings(max_examples=200, deadline=None)
    def test_root_structure_for_arbitrary_softening(self, kappa, lam, tau, detuning):
        omega1 = 17300.0
        osc = TorsionalOscillator.from_stiffness(
            INERTIA * omega1**2, INERTIA, omega1 / (2.0 * lam)
        )
        coeffs = TaylorCoefficients(
            omega1=omega1,
            alpha=0.0,
            beta=8.0 * omega1 * kappa / 3.0,
            kappa=kappa,
            source_z=100e-9,
        )
        sol = steady_state_amplitudes(
            coeffs, osc, DriveConfig(torque_tau=tau, omega=omega1 + detuning)
        )
        assert len(sol.roots) in (1, 3)
        p_drive = tau**2 / (4.0 * INERTIA**2 * omega1**2)
        for root in sol.roots:
            assert root.amplitude_A >= 0.0
            y = root.amplitude_A**2
            residual = (
                kappa**2 * y**3
                - 2.0 * kappa * detuning * y**2
                + (detuning**2 + lam**2) * y
                - p_drive
            )
            assert abs(residual) <= 1e-6 * p_drive
            assert root.amplitude_A <= math.sqrt(p_drive) / lam * (1.0 + 1e-9)


class TestHysteresisWindow:
    TAU = 8.8484e-16

    def test_window_edges_at_full_drive(self, osc, geom, law):
        # edges localized independently by scanning the root count of the
        # response polynomial with numpy and bisecting to convergence
        c = taylor_coefficients(osc, geom, law, 98e-9)
        window = hysteresis_window(c, osc, self.TAU)
        assert window is not None
        lo, hi = window
        assert lo - c.omega1 == pytest.approx(-25.01166127050601, abs=2e-5)
        assert hi - c.omega1 == pytest.approx(-6.093834553390479, abs=2e-5)

    def test_window_sits_below_shifted_resonance(self, osc, geom, law):
        c = taylor_coefficients(osc, geom, law, 98e-9)
        lo, hi = hysteresis_window(c, osc, self.TAU)
        assert lo < hi < c.omega1

    def test_no_window_for_weak_drive(self, osc, geom, law):
        c = taylor_coefficients(osc, geom, law, 98e-9)
        assert hysteresis_window(c, osc, 1e-18) is None

    def test_no_window_without_nonlinearity(self, osc, geom):
        c = taylor_coefficients(osc, geom, NullForceLaw(), 98e-9)
        assert hysteresis_window(c, osc, self.TAU) is None

    def test_onset_drive_threshold(self, osc, geom, law):
        # bistability requires the peak amplitude to reach
        # A*^2 = (8 / 3 sqrt 3) * lam / |kappa|
        c = taylor_coefficients(osc, geom, law, 116.5e-9)
        lam = osc.gamma
        a_star_sq = 8.0 / (3.0 * math.sqrt(3.0)) * lam / abs(c.kappa)
        tau_star = 2.0 * INERTIA * c.omega1 * lam * math.sqrt(a_star_sq)
        assert hysteresis_window(c, osc, 0.97 * tau_star) is None
        assert hysteresis_window(c, osc, 1.03 * tau_star) is not None


class TestResponseCurve:
    TAU = 8.8484e-16

    def curves(self, osc, geom, law):
        c = taylor_coefficients(osc, geom, law, 98e-9)
        grid = np.linspace(c.omega1 - 35.0, c.omega1 + 5.0, 161)
        up = response_curve(c, osc, self.TAU, grid, "up")
        down = response_curve(c, osc, self.TAU, grid[::-1], "down")
        return c, grid, up, down

    def test_direction_validation(self, osc, geom, law):
        c = taylor_coefficients(osc, geom, law, 98e-9)
        grid = np.linspace(c.omega1 - 10.0, c.omega1 + 10.0, 11)
        with pytest.raises(DomainError):
            response_curve(c, osc, self.TAU, grid, "sideways")
        jumbled = grid.copy()
        jumbled[3], jumbled[7] = jumbled[7], jumbled[3]
        with pytest.raises(DomainError):
            response_curve(c, osc, self.TAU, jumbled, "up")

    def test_grid_orientation_is_normalized(self, osc, geom, law):
        c = taylor_coefficients(osc, geom, law, 98e-9)
        grid = np.linspace(c.omega1 - 10.0, c.omega1 + 10.0, 11)
        a = response_curve(c, osc, self.TAU, grid, "up")
        b = response_curve(c, osc, self.TAU, grid[::-1], "up")
        np.testing.assert_allclose(a.amplitude_rad, b.amplitude_rad, rtol=1e-12)
        np.testing.assert_array_equal(a.omega, b.omega)

    def test_branches_differ_only_inside_window(self, osc, geom, law):
        c, grid, up, down = self.curves(osc, geom, law)
        lo, hi = hysteresis_window(c, osc, self.TAU)
        down_at = dict(zip(down.omega.tolist(), down.amplitude_rad.tolist()))
        for omega, amp in zip(up.omega.tolist(), up.amplitude_rad.tolist()):
            other = down_at[omega]
            if lo + 0.5 < omega < hi - 0.5:
                assert other > amp * 1.05
            elif omega < lo - 0.5 or omega > hi + 0.5:
                assert other == pytest.approx(amp, rel=1e-6)

    def test_branch_labels(self, osc, geom, law):
        c, grid, up, down = self.curves(osc, geom, law)
        assert set(up.branch) <= {"single", "lower", "upper"}
        assert "lower" in up.branch
        assert "upper" in down.branch
        assert up.branch[0] == "single"

    def test_amplitudes_finite_and_positive(self, osc, geom, law):
        _, _, up, down = self.curves(osc, geom, law)
        for curve in (up, down):
            assert np.all(np.isfinite(curve.amplitude_rad))
            assert np.all(curve.amplitude_rad > 0.0)

    def test_down_sweep_rides_upper_branch_to_the_fold(self, osc, geom, law):
        c, grid, up, down = self.curves(osc, geom, law)
        lo, hi = hysteresis_window(c, osc, self.TAU)
        inside = (down.omega > lo + 0.5) & (down.omega < hi - 0.5)
        n_roots = np.asarray(down.n_roots)
        assert np.all(n_roots[inside] == 3)


class TestDriveConfig:
    def test_rejects_negative_torque(self):
        with pytest.raises(DomainError):
            DriveConfig(torque_tau=-1e-16, omega=17300.0)

    def test_rejects_nonpositive_frequency(self):
        with pytest.raises(DomainError):
            DriveConfig(torque_tau=1e-16, omega=0.0)
