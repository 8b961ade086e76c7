"""Passive elements acting on the biphoton spectrum: interference filters
and birefringent group-delay compensators."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dispersion import C_MM_PER_FS, ORDINARY, Ray, inverse_group_velocity, omega_from_nm, wavenumber

FILTER_CONVENTIONS = ("fwhm", "width")
ARMS = ("signal", "idler")
AXES = ("vertical", "horizontal")
COMPENSATOR_MODELS = ("full", "first_order")

# extraordinary wave at normal incidence on a plate cut parallel to its optic axis
PLATE_E = Ray(math.pi / 2)


def bandwidth_to_omega(bandwidth_nm, center_nm):
    """Spectral width in rad/fs for a width in nm around ``center_nm``."""
    return 2.0 * math.pi * C_MM_PER_FS * (bandwidth_nm * 1e-6) / (center_nm * 1e-6) ** 2


@dataclass(frozen=True)
class FilterSpec:
    """Gaussian interference filters, one per arm.

    ``convention="fwhm"`` reads ``bandwidth_nm`` as the intensity FWHM.
    ``convention="width"`` uses it as the width parameter of an amplitude
    factor exp(-(w - w_c)^2 / dw^2), with dw converted from nm.
    Centers default to the source's signal and idler wavelengths.
    """

    bandwidth_nm: float
    signal_center_nm: float | None = None
    idler_center_nm: float | None = None
    convention: str = "fwhm"

    def __post_init__(self):
        if not self.bandwidth_nm > 0:
            raise ValueError(f"filter bandwidth must be positive, got {self.bandwidth_nm}")
        if self.convention not in FILTER_CONVENTIONS:
            raise ValueError(f"unknown filter convention '{self.convention}'")

    def _coefficient(self, center_nm):
        """a in the amplitude transmission exp(-a (w - w_c)^2)."""
        dw = bandwidth_to_omega(self.bandwidth_nm, center_nm)
        if self.convention == "fwhm":
            return 2.0 * math.log(2.0) / dw**2
        return 1.0 / dw**2

    def centers(self, config):
        return (
            self.signal_center_nm or config.signal_nm,
            self.idler_center_nm or config.idler_nm,
        )

    def amplitude(self, config, omega):
        """Product of both arms' amplitude transmissions at detuning ``omega``."""
        c1, c2 = self.centers(config)
        d1 = config.omega_1 + omega - omega_from_nm(c1)
        d2 = config.omega_2 - omega - omega_from_nm(c2)
        return np.exp(-self._coefficient(c1) * d1**2 - self._coefficient(c2) * d2**2)

    def amplitude_sigma(self, config):
        """Width sigma (rad/fs) of the combined amplitude exp(-W^2 / 2 sigma^2)."""
        c1, c2 = self.centers(config)
        return 1.0 / math.sqrt(2.0 * (self._coefficient(c1) + self._coefficient(c2)))


@dataclass(frozen=True)
class CompensatorSpec:
    """Birefringent plate with its optic axis in the plate plane.

    With ``axis="vertical"`` in the signal arm the plate cancels the
    positive walk-off delay of the V branch.  Moving it to the idler arm
    requires the horizontal orientation.
    """

    medium: object
    thickness_mm: float
    arm: str = "signal"
    axis: str = "vertical"
    model: str = "full"

    def __post_init__(self):
        if self.thickness_mm < 0:
            raise ValueError(f"compensator thickness must be >= 0, got {self.thickness_mm}")
        if self.arm not in ARMS:
            raise ValueError(f"unknown arm '{self.arm}'")
        if self.axis not in AXES:
            raise ValueError(f"unknown axis '{self.axis}'")
        if self.model not in COMPENSATOR_MODELS:
            raise ValueError(f"unknown compensator model '{self.model}'")

    def delay_per_mm(self, wavelength_nm):
        """|1/v_e - 1/v_o| of the plate material, fs/mm."""
        w = omega_from_nm(wavelength_nm)
        return abs(inverse_group_velocity(self.medium, PLATE_E, w) - inverse_group_velocity(self.medium, ORDINARY, w))

    def _arm_frequency(self, config, omega):
        if self.arm == "signal":
            return config.omega_1 + omega, 1.0
        return config.omega_2 - omega, -1.0

    def _sign(self):
        return -1.0 if self.axis == "vertical" else 1.0

    def phase_per_mm(self, config, omega, linear=False):
        """Phase added to the V branch per mm of plate, zero at omega = 0."""
        w, dw = self._arm_frequency(config, np.asarray(omega, dtype=float))
        w0 = config.omega_1 if self.arm == "signal" else config.omega_2
        if linear or self.model == "first_order":
            slope = inverse_group_velocity(self.medium, PLATE_E, w0) - inverse_group_velocity(self.medium, ORDINARY, w0)
            return self._sign() * slope * dw * np.asarray(omega, dtype=float)
        dk = wavenumber(self.medium, PLATE_E, w) - wavenumber(self.medium, ORDINARY, w)
        dk0 = wavenumber(self.medium, PLATE_E, w0) - wavenumber(self.medium, ORDINARY, w0)
        return self._sign() * (dk - dk0)

    def phase(self, config, omega, linear=False):
        return self.thickness_mm * self.phase_per_mm(config, omega, linear=linear)


@dataclass(frozen=True)
class DelayLine:
    """Ideal polarization-dependent group delay of ``delay_fs`` on the V
    branch, with no higher-order dispersion."""

    delay_fs: float

    def phase(self, config, omega, linear=True):
        return -self.delay_fs * np.asarray(omega, dtype=float)
