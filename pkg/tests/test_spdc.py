import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from ququart.dispersion import ORDINARY, extraordinary, omega_from_nm, wavenumber
from ququart.elements import FilterSpec
from ququart.errors import ConfigError, DegenerateConfig, EnergyMismatch, GridTooCoarse, ZeroSpectrum
from ququart.spdc import (
    GridSpec,
    SourceConfig,
    SpectralAmplitude,
    _correlation_fft,
    correlation_function,
    correlation_overlap,
    dispersive_phase,
    phase_mismatch,
    resolve_grid,
    spectral_amplitude,
    walkoff_coefficients,
)


def fwhm(x, y):
    above = x[y >= y.max() / 2]
    return above.max() - above.min()


class TestSourceConfig:
    def test_idler_derived(self, bbo):
        cfg = SourceConfig.from_wavelengths(bbo, 2.0, 325.0, 600.0)
        assert 1 / cfg.pump_nm == pytest.approx(1 / cfg.signal_nm + 1 / cfg.idler_nm, rel=1e-14)
        assert cfg.omega_1 + cfg.omega_2 == cfg.omega_p

    def test_signal_is_shorter_wavelength(self, ref, bbo):
        swapped = SourceConfig(bbo, 2.0, 325.0, ref.idler_nm, ref.signal_nm)
        assert (swapped.signal_nm, swapped.idler_nm) == (ref.signal_nm, ref.idler_nm)

    @pytest.mark.parametrize("kwargs,key", [
        ({"crystal_length_mm": 0.0}, "source.crystal_length_mm"),
        ({"pump_balance": 1.5}, "source.pump_balance"),
        ({"extraordinary_model": "bogus"}, "source.extraordinary_model"),
    ])
    def test_invalid(self, bbo, kwargs, key):
        args = dict(medium=bbo, crystal_length_mm=2.0, pump_nm=325.0, signal_nm=650.0, idler_nm=650.0)
        args.update(kwargs)
        with pytest.raises(ConfigError) as info:
            SourceConfig(**args)
        assert info.value.key == key

    def test_energy_mismatch(self, bbo):
        with pytest.raises(EnergyMismatch):
            SourceConfig(bbo, 2.0, 325.0, 600.0, 710.0)


class TestWalkoff:
    def test_reference_values(self, ref):
        w = walkoff_coefficients(ref)
        assert w.tau1 == pytest.approx(96.0, rel=0.05)
        assert w.tau2 == pytest.approx(87.0, rel=0.05)
        assert w.D == pytest.approx(0.0193, rel=0.10)
        assert w.tau1 == w.C_o * 2.0 and w.tau2 == w.C_e * 2.0

    def test_degenerate(self, degenerate):
        w = walkoff_coefficients(degenerate)
        assert w.C_o == 0.0 and w.C_e == 0.0 and w.degenerate
        with pytest.raises(DegenerateConfig):
            w.D

    def test_kato_set_within_tolerance(self, ref):
        from dataclasses import replace

        from ququart import get_medium

        w = walkoff_coefficients(replace(ref, medium=get_medium("BBO-Kato")))
        assert w.tau1 == pytest.approx(96.0, rel=0.05)
        assert w.tau2 == pytest.approx(87.0, rel=0.05)
        assert w.D == pytest.approx(0.0193, rel=0.10)

    def test_d_definition(self, ref):
        w = walkoff_coefficients(ref)
        assert w.D == pytest.approx(w.B_e / (w.C_o**2 * 2.0), rel=1e-14)


class TestPhaseMismatch:
    def test_zero_at_center(self, ref):
        assert abs(phase_mismatch(ref, 0.0)) < 1e-9

    def test_slope(self, ref):
        h = 1e-6
        slope = (phase_mismatch(ref, h) - phase_mismatch(ref, -h)) / (2 * h)
        assert abs(slope) == pytest.approx(walkoff_coefficients(ref).C_o, rel=1e-3)

    def test_compositional(self, ref):
        m = ref.medium
        kp = wavenumber(m, extraordinary(ref.theta_pm), omega_from_nm(ref.pump_nm))
        for w in np.random.default_rng(1).uniform(-0.2, 0.2, 10):
            direct = (
                wavenumber(m, ORDINARY, ref.omega_1 + w) + wavenumber(m, ORDINARY, ref.omega_2 - w) - kp
            )
            assert phase_mismatch(ref, w) == pytest.approx(direct, abs=1e-9)

    def test_first_order_is_linear(self, ref):
        w = np.linspace(-0.1, 0.1, 5)
        np.testing.assert_allclose(
            np.abs(phase_mismatch(ref, w, "first_order")), walkoff_coefficients(ref).C_o * np.abs(w), rtol=1e-14
        )


class TestDispersivePhase:
    def test_zero_at_center(self, ref):
        assert dispersive_phase(ref, 0.0) == 0.0
        assert dispersive_phase(ref, np.array([-0.1, 0.0, 0.1]))[1] == 0.0

    def test_expansion_coefficients(self, ref):
        w = walkoff_coefficients(ref)
        omega = np.linspace(-0.01, 0.01, 201)
        quad, lin, _ = np.polyfit(omega, dispersive_phase(ref, omega), 2)
        assert lin == pytest.approx(w.C_e * 2.0, rel=1e-2)
        assert quad == pytest.approx(w.B_e * 2.0, rel=5e-2)

    def test_second_order_mode(self, ref):
        w = walkoff_coefficients(ref)
        omega = np.array([-0.05, 0.02, 0.1])
        np.testing.assert_allclose(
            dispersive_phase(ref, omega, "second_order"),
            w.C_e * 2.0 * omega + w.B_e * 2.0 * omega**2,
            rtol=1e-13,
        )

    def test_unknown_mode(self, ref):
        with pytest.raises(ValueError):
            dispersive_phase(ref, 0.1, "third_order")


class TestSpectralAmplitude:
    def test_center_value(self, ref):
        amp = spectral_amplitude(ref)
        assert abs(amp.values_h[amp.omega.size // 2]) == 1.0

    @pytest.mark.parametrize("mode", ["full", "first_order", "second_order"])
    def test_branch_moduli_equal(self, ref_run, mode):
        amp = spectral_amplitude(ref_run.source, None, ref_run.filter, ref_run.compensator, mode)
        np.testing.assert_allclose(np.abs(amp.values_v), np.abs(amp.values_h), atol=1e-12, rtol=0)

    def test_first_zero_first_order(self, ref):
        amp = spectral_amplitude(ref, GridSpec(lobes=3), mode="first_order")
        a = np.abs(amp.values_h)
        k = amp.omega.size // 2 + 1
        while a[k + 1] < a[k]:
            k += 1
        expected = 2 * math.pi / walkoff_coefficients(ref).tau1
        assert abs(amp.omega[k] - expected) <= amp.step

    def test_full_model_zero_is_pulled_in(self, ref):
        # the quadratic mismatch term moves the first zero inward
        amp = spectral_amplitude(ref)
        a = np.abs(amp.values_h)
        k = amp.omega.size // 2 + 1
        while a[k + 1] < a[k]:
            k += 1
        assert amp.omega[k] < 2 * math.pi / walkoff_coefficients(ref).tau1

    def test_filter_narrows(self, ref_run):
        bare = spectral_amplitude(ref_run.source)
        filt = spectral_amplitude(ref_run.source, filter=ref_run.filter)
        assert fwhm(filt.omega, filt.intensity()) < fwhm(bare.omega, bare.intensity())

    @pytest.mark.parametrize("mode", ["full", "first_order"])
    def test_normalization_converges(self, ref, mode):
        half, points = resolve_grid(ref, mode)
        a = spectral_amplitude(ref, GridSpec(half, points), mode=mode).normalization
        b = spectral_amplitude(ref, GridSpec(half, 2 * points - 1), mode=mode).normalization
        assert abs(a - b) / a < 1e-6

    def test_window_clamped_before_arm_exchange(self, ref):
        half, _ = resolve_grid(ref, "full", GridSpec(lobes=50))
        assert half < (ref.omega_1 - ref.omega_2) / 2

    def test_even_points_rejected(self, ref):
        with pytest.raises(ValueError):
            resolve_grid(ref, "full", GridSpec(points=1000))

    def test_coarse_grid_rejected(self, ref):
        with pytest.raises(GridTooCoarse):
            resolve_grid(ref, "first_order", GridSpec(points=101, lobes=100))

    def test_degenerate_needs_width(self, degenerate):
        with pytest.raises(DegenerateConfig):
            resolve_grid(degenerate, "first_order")
        half, _ = resolve_grid(degenerate, "first_order", filter=FilterSpec(10.0))
        assert half > 0

    def test_degenerate_full_mode(self, degenerate):
        amp = spectral_amplitude(degenerate, filter=FilterSpec(10.0))
        assert np.all(np.isfinite(amp.values_v))

    def test_zero_spectrum(self):
        omega = np.linspace(-1, 1, 5)
        amp = SpectralAmplitude(omega, np.zeros(5, complex), np.zeros(5, complex))
        with pytest.raises(ZeroSpectrum):
            amp.coherence_integral()


class TestCorrelation:
    def test_rectangle(self, ref):
        amp = spectral_amplitude(ref, mode="first_order")
        tau1 = walkoff_coefficients(ref).tau1
        tau = np.linspace(-1.5 * tau1, 1.5 * tau1, 601)
        g = correlation_function(amp, "H", tau)
        assert g[np.abs(tau) < 0.45 * tau1].min() > 0.9
        assert g[np.abs(tau) > 0.55 * tau1].max() < 0.1

    def test_symmetric(self, ref):
        amp = spectral_amplitude(ref, mode="first_order")
        tau = np.linspace(0, 150, 31)
        np.testing.assert_allclose(
            correlation_function(amp, "H", tau), correlation_function(amp, "H", -tau), atol=1e-12
        )

    def test_v_branch_shifted_by_tau2(self, ref):
        amp = spectral_amplitude(ref, mode="first_order")
        w = walkoff_coefficients(ref)
        tau = np.linspace(-200, 300, 2001)
        g = correlation_function(amp, "V", tau)
        centroid = trapezoid(g * tau, tau) / trapezoid(g, tau)
        assert centroid == pytest.approx(w.tau2, abs=1.0)

    def test_gaussian_pair(self, ref):
        filt = FilterSpec(10.0)
        half, points = 2.0, 8001
        omega = np.linspace(-half, half, points)
        t = filt.amplitude(ref, omega).astype(complex)
        amp = SpectralAmplitude(omega, t, t)
        a1 = filt._coefficient(ref.signal_nm)
        a2 = filt._coefficient(ref.idler_nm)
        tau = np.linspace(-300, 300, 61)
        # |int exp(-A W^2 - i W tau) dW|^2 / (pi / A) = exp(-tau^2 / (2 A))
        expected = np.exp(-(tau**2) / (2 * (a1 + a2)))
        np.testing.assert_allclose(correlation_function(amp, "H", tau), expected, atol=1e-10)

    def test_tau_beyond_nyquist(self, ref):
        amp = spectral_amplitude(ref, GridSpec(points=1001, lobes=10), mode="first_order")
        with pytest.raises(GridTooCoarse):
            correlation_function(amp, "H", [1e5])

    def test_fft_matches_direct(self, ref):
        amp = spectral_amplitude(ref, GridSpec(points=2049, lobes=30), mode="first_order")
        tau, g = _correlation_fft(amp, "V")
        ref = abs(np.sum(amp.values_h)) ** 2 * amp.step**2
        pick = np.flatnonzero(np.abs(tau) < 200)[::25]
        direct = correlation_function(amp, "V", tau[pick])
        np.testing.assert_allclose(g[pick] / ref, direct, atol=2e-3)


class TestOverlap:
    def test_no_compensation(self, ref):
        w = walkoff_coefficients(ref)
        assert correlation_overlap(ref, 0.0) == pytest.approx(1 - w.tau2 / w.tau1, rel=0.02)

    def test_disjoint(self, ref):
        w = walkoff_coefficients(ref)
        assert correlation_overlap(ref, w.tau1 + w.tau2) <= 0.02

    def test_maximum_at_tau2(self, ref):
        w = walkoff_coefficients(ref)
        step = 0.5
        grid = np.arange(w.tau2 - 10, w.tau2 + 10 + step, step)
        values = [correlation_overlap(ref, tc) for tc in grid]
        assert abs(grid[int(np.argmax(values))] - w.tau2) <= step
        assert correlation_overlap(ref, w.tau2) == pytest.approx(1.0, abs=1e-9)

    def test_negative_delay(self, ref):
        with pytest.raises(ValueError):
            correlation_overlap(ref, -1.0)
