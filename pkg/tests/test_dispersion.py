import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ququart.dispersion import (
    C_MM_PER_FS,
    ORDINARY,
    DispersiveMedium,
    Ray,
    check_energy,
    collinear_mismatch,
    extraordinary,
    get_medium,
    gvd,
    idler_from,
    inverse_group_velocity,
    load_materials,
    nm_from_omega,
    omega_from_nm,
    phase_matching_angle,
    refractive_index,
    wavenumber,
)
from ququart.errors import ConfigError, EnergyMismatch, NoPhaseMatching, OutOfRange

MEDIA = ("BBO", "BBO-Kato", "quartz")


def hand_index_bbo_o(lam_nm):
    # Eimerl et al. ordinary-ray fit, written out independently
    lam = lam_nm * 1e-3
    return math.sqrt(2.7405 + 0.0184 / (lam**2 - 0.0179) - 0.0155 * lam**2)


def hand_index_bbo_e(lam_nm):
    lam = lam_nm * 1e-3
    return math.sqrt(2.3730 + 0.0128 / (lam**2 - 0.0156) - 0.0044 * lam**2)


def fd1(f, x, h=1e-4):
    return (f(x + h) - f(x - h)) / (2 * h)


def fd2(f, x, h=1e-4):
    return (f(x + h) - 2 * f(x) + f(x - h)) / h**2


rays = st.one_of(st.just(ORDINARY), st.floats(0.0, math.pi / 2).map(extraordinary))


def in_range_omega(medium, frac):
    lo, hi = medium.valid_range
    # keep the finite-difference stencil inside the fit range
    lam = lo * 1.02 + frac * (hi * 0.98 - lo * 1.02)
    return omega_from_nm(lam)


class TestUnits:
    def test_round_trip(self):
        lam = np.array([325.0, 600.0, 709.0909])
        np.testing.assert_allclose(nm_from_omega(omega_from_nm(lam)), lam, rtol=1e-14)

    def test_600nm_frequency(self):
        assert omega_from_nm(600.0) == pytest.approx(2 * math.pi * 299.792458 / 600.0, rel=1e-14)


class TestRefractiveIndex:
    def test_bbo_ordinary_hand_evaluation(self, bbo):
        assert refractive_index(bbo, ORDINARY, 600.0) == pytest.approx(hand_index_bbo_o(600.0), abs=1e-9)

    def test_bbo_against_handbook_table(self, bbo):
        # tabulated BBO indices at 632.8 nm: n_o = 1.6673, n_e = 1.5506
        assert refractive_index(bbo, ORDINARY, 632.8) == pytest.approx(1.6673, abs=1e-3)
        assert refractive_index(bbo, Ray(math.pi / 2), 632.8) == pytest.approx(1.5506, abs=1e-3)

    @pytest.mark.parametrize("lam", [250.0, 500.0, 800.0, 1000.0, 1500.0])
    def test_theta_zero_is_ordinary(self, quartz, lam):
        assert refractive_index(quartz, extraordinary(0.0), lam) == pytest.approx(
            refractive_index(quartz, ORDINARY, lam), abs=1e-12
        )

    @pytest.mark.parametrize("lam", [300.0, 600.0, 709.0909, 1000.0])
    def test_theta_right_angle_is_principal(self, bbo, lam):
        assert refractive_index(bbo, extraordinary(math.pi / 2), lam) == pytest.approx(hand_index_bbo_e(lam), abs=1e-12)

    def test_uniaxial_ellipse(self, bbo):
        theta = 0.63
        no, ne = hand_index_bbo_o(400.0), hand_index_bbo_e(400.0)
        expected = 1 / math.sqrt(math.cos(theta) ** 2 / no**2 + math.sin(theta) ** 2 / ne**2)
        assert refractive_index(bbo, extraordinary(theta), 400.0) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("lam", [100.0, 219.9, 1060.1, float("nan")])
    def test_out_of_range(self, bbo, lam):
        with pytest.raises(OutOfRange):
            refractive_index(bbo, ORDINARY, lam)

    def test_vectorized(self, bbo):
        lam = np.array([400.0, 600.0, 800.0])
        out = refractive_index(bbo, ORDINARY, lam)
        assert out.shape == (3,)
        assert out[1] == refractive_index(bbo, ORDINARY, 600.0)

    @pytest.mark.parametrize("name", MEDIA)
    def test_extraordinary_monotone_between_principal_values(self, name):
        medium = get_medium(name)
        thetas = np.linspace(0, math.pi / 2, 91)
        for lam in np.linspace(*medium.valid_range, 7):
            n = np.array([refractive_index(medium, extraordinary(t), lam) for t in thetas])
            d = np.diff(n)
            assert np.all(d <= 1e-15) or np.all(d >= -1e-15)
            lo, hi = sorted((n[0], n[-1]))
            assert np.all((n >= lo - 1e-15) & (n <= hi + 1e-15))

    def test_bad_angle(self):
        with pytest.raises(ValueError):
            Ray(2.0)


class TestDerivatives:
    def test_wavenumber_definition(self, bbo):
        w = omega_from_nm(600.0)
        assert wavenumber(bbo, ORDINARY, w) == refractive_index(bbo, ORDINARY, 600.0) * w / C_MM_PER_FS

    def test_wavenumber_direct_formula(self, bbo):
        rng = np.random.default_rng(3)
        for lam in rng.uniform(230, 1050, 10):
            w = omega_from_nm(lam)
            assert wavenumber(bbo, ORDINARY, w) == pytest.approx(hand_index_bbo_o(lam) * w / C_MM_PER_FS, rel=1e-12)

    @pytest.mark.parametrize("name", MEDIA)
    def test_normal_dispersion(self, name):
        medium = get_medium(name)
        w = omega_from_nm(np.linspace(medium.valid_range[0] * 1.05, medium.valid_range[1] * 0.95, 50))
        for ray in (ORDINARY, extraordinary(0.7)):
            k = np.array([wavenumber(medium, ray, x) for x in w])
            assert np.all(np.diff(k[::-1]) > 0)  # w decreases with wavelength
            kp = np.array([inverse_group_velocity(medium, ray, x) for x in w])
            n = np.array([wavenumber(medium, ray, x) / x * C_MM_PER_FS for x in w])
            assert np.all(1 / kp < C_MM_PER_FS)
            assert np.all(kp > n / C_MM_PER_FS)

    @pytest.mark.parametrize("lam", [400.0, 600.0, 709.0909, 900.0])
    def test_group_delay_finite_difference(self, bbo, lam):
        w = omega_from_nm(lam)
        for ray in (ORDINARY, extraordinary(0.63)):
            fd = fd1(lambda x: wavenumber(bbo, ray, x), w)
            assert inverse_group_velocity(bbo, ray, w) == pytest.approx(fd, rel=1e-6)

    @pytest.mark.parametrize("lam", [400.0, 600.0, 709.0909, 900.0])
    def test_gvd_finite_difference(self, bbo, lam):
        w = omega_from_nm(lam)
        for ray in (ORDINARY, extraordinary(0.63)):
            assert gvd(bbo, ray, w) == pytest.approx(fd2(lambda x: wavenumber(bbo, ray, x), w), rel=1e-4)
            assert gvd(bbo, ray, w) == pytest.approx(
                fd1(lambda x: inverse_group_velocity(bbo, ray, x), w), rel=1e-5
            )

    @pytest.mark.parametrize("lam", [600.0, 710.0])
    def test_gvd_positive_extraordinary(self, bbo, lam):
        assert gvd(bbo, extraordinary(0.63), omega_from_nm(lam)) > 0

    @settings(max_examples=100, deadline=None)
    @given(name=st.sampled_from(MEDIA), ray=rays, frac=st.floats(0.0, 1.0))
    def test_analytic_derivatives_match_finite_differences(self, name, ray, frac):
        medium = get_medium(name)
        w = in_range_omega(medium, frac)
        h = 1e-4 * w
        k = lambda x: wavenumber(medium, ray, x)  # noqa: E731
        assert abs(inverse_group_velocity(medium, ray, w) / fd1(k, w, h) - 1) < 1e-5
        assert abs(gvd(medium, ray, w) / fd2(k, w, h) - 1) < 1e-3

    def test_deterministic(self, bbo):
        w = omega_from_nm(np.linspace(300, 1000, 101))
        ray = extraordinary(0.6)
        for f in (wavenumber, inverse_group_velocity, gvd):
            assert f(bbo, ray, w).tobytes() == f(bbo, ray, w.copy()).tobytes()


class TestPhaseMatching:
    def grid_oracle(self, medium, p, s, i):
        # coarse sign-change search, then a 1e-6 rad scan of the bracket
        coarse = np.linspace(0, math.pi / 2, 2001)
        vals = np.array([collinear_mismatch(medium, t, p, s, i) for t in coarse])
        j = np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
        fine = np.arange(coarse[j], coarse[j + 1] + 1e-6, 1e-6)
        fv = np.array([collinear_mismatch(medium, t, p, s, i) for t in fine])
        k = np.flatnonzero(np.sign(fv[:-1]) != np.sign(fv[1:]))[0]
        return fine[k], fine[k + 1]

    @pytest.mark.parametrize("signal,idler", [(650.0, 650.0), (600.0, idler_from(325.0, 600.0))])
    def test_matches_grid_scan(self, bbo, signal, idler):
        theta = phase_matching_angle(bbo, 325.0, signal, idler)
        lo, hi = self.grid_oracle(bbo, 325.0, signal, idler)
        assert lo - 1e-12 <= theta <= hi + 1e-12
        assert abs(collinear_mismatch(bbo, theta, 325.0, signal, idler)) < 1e-9

    def test_typical_bbo_angle(self, bbo):
        # type-I BBO at 325 nm is cut near 36-37 degrees
        assert 35.0 < math.degrees(phase_matching_angle(bbo, 325.0, 650.0, 650.0)) < 38.0

    def test_energy_mismatch(self, bbo):
        with pytest.raises(EnergyMismatch, match="709.09"):
            phase_matching_angle(bbo, 325.0, 600.0, 710.0)

    def test_check_energy_accepts_exact(self):
        check_energy(325.0, 600.0, idler_from(325.0, 600.0))

    def test_no_phase_matching(self, quartz):
        # quartz birefringence is far too small for 325 -> 650 + 650
        with pytest.raises(NoPhaseMatching):
            phase_matching_angle(quartz, 325.0, 650.0, 650.0)

    def test_out_of_range_wavelength(self, bbo):
        with pytest.raises(OutOfRange):
            phase_matching_angle(bbo, 600.0, 1200.0, 1200.0)


class TestMaterials:
    def test_shipped_media_have_sources(self):
        media = load_materials()
        assert {"bbo", "bbo-kato", "quartz"} <= set(media)
        assert all(m.source for m in media.values())

    def test_case_insensitive(self):
        assert get_medium("bbo") is get_medium("BBO")

    def test_unknown_medium(self):
        with pytest.raises(ConfigError):
            get_medium("unobtainium")

    def test_custom_file(self, tmp_path):
        path = tmp_path / "m.ini"
        path.write_text(
            "[toy]\nformula = sellmeier_uv_ir\nordinary = 2.5, 0.01, 0.01, 0.01\n"
            "extraordinary = 2.4, 0.01, 0.01, 0.01\nvalid_range_nm = 300, 900\nsource = test\n"
        )
        toy = get_medium("toy", path)
        assert refractive_index(toy, ORDINARY, 500.0) == pytest.approx(
            math.sqrt(2.5 + 0.01 / (0.25 - 0.01) - 0.01 * 0.25), abs=1e-12
        )

    def test_wrong_coefficient_count(self):
        with pytest.raises(ConfigError, match="coefficients"):
            DispersiveMedium("x", "sellmeier_uv_ir", (1, 2, 3), (1, 2, 3, 4), (300, 900))

    def test_unknown_formula(self):
        with pytest.raises(ConfigError):
            DispersiveMedium("x", "cauchy", (1, 2), (1, 2), (300, 900))
