"""Two-crystal biphoton spectral amplitude and temporal correlations.

The signal is always the shorter-wavelength photon; the detuning ``omega``
(rad/fs) shifts the signal to ``omega_1 + omega`` and the idler to
``omega_2 - omega``.  With that orientation both walk-off coefficients are
nonnegative in the normal-dispersion range.

Three evaluation modes are available everywhere a spectrum is built:

``full``
    exact phase mismatch and dispersive phase from the Sellmeier fits.
``first_order``
    mismatch ``C_o * omega`` and phase ``C_e * L * omega``.
``second_order``
    mismatch ``C_o * omega`` and phase ``C_e L omega + B_e L omega^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.integrate import trapezoid

from .dispersion import (
    ORDINARY,
    check_energy,
    extraordinary,
    gvd,
    idler_from,
    inverse_group_velocity,
    omega_from_nm,
    phase_matching_angle,
    wavenumber,
)
from .errors import ConfigError, DegenerateConfig, GridTooCoarse, ZeroSpectrum

MODES = ("full", "first_order", "second_order")
EXTRAORDINARY_MODELS = ("phase_matched", "principal")

DEFAULT_POINTS = 8193
DEFAULT_LOBES = {"full": 10, "first_order": 2000, "second_order": 100}
MIN_SAMPLES_PER_LOBE = 16
MAX_POINTS = 2**22 + 1
# largest phase increment of the dispersive phase between neighbouring samples
MAX_PHASE_STEP = 0.1
# fraction of the half signal-idler separation usable by the full-mode window
ARM_EXCHANGE_MARGIN = 0.98


def _check_mode(mode):
    if mode not in MODES:
        raise ValueError(f"unknown mode '{mode}', expected one of {MODES}")


@dataclass(frozen=True)
class SourceConfig:
    """Two orthogonal type-I crystals pumped by a CW laser."""

    medium: object
    crystal_length_mm: float
    pump_nm: float
    signal_nm: float
    idler_nm: float
    pump_balance: float = 0.5
    pump_phase: float = 0.0
    extraordinary_model: str = "phase_matched"

    def __post_init__(self):
        if not self.crystal_length_mm > 0:
            raise ConfigError("crystal length must be positive", key="source.crystal_length_mm")
        if not 0.0 <= self.pump_balance <= 1.0:
            raise ConfigError("pump balance must lie in [0, 1]", key="source.pump_balance")
        if self.extraordinary_model not in EXTRAORDINARY_MODELS:
            raise ConfigError(
                f"expected one of {EXTRAORDINARY_MODELS}", key="source.extraordinary_model"
            )
        check_energy(self.pump_nm, self.signal_nm, self.idler_nm)
        if self.signal_nm > self.idler_nm:
            s, i = self.signal_nm, self.idler_nm
            object.__setattr__(self, "signal_nm", i)
            object.__setattr__(self, "idler_nm", s)

    @classmethod
    def from_wavelengths(cls, medium, crystal_length_mm, pump_nm, signal_nm, idler_nm=None, **kwargs):
        """Build a config, deriving the idler from energy conservation if omitted."""
        if idler_nm is None:
            idler_nm = idler_from(pump_nm, signal_nm)
        return cls(medium, crystal_length_mm, pump_nm, signal_nm, idler_nm, **kwargs)

    @property
    def omega_p(self):
        return float(omega_from_nm(self.pump_nm))

    @property
    def omega_1(self):
        return float(omega_from_nm(self.signal_nm))

    @property
    def omega_2(self):
        # exact complement keeps omega_1 + omega_2 == omega_p
        return self.omega_p - self.omega_1

    @property
    def degenerate(self):
        return self.signal_nm == self.idler_nm

    @cached_property
    def theta_pm(self):
        return phase_matching_angle(self.medium, self.pump_nm, self.signal_nm, self.idler_nm)

    @property
    def spdc_e_ray(self):
        """Extraordinary ray used for signal/idler photons crossing the second crystal."""
        if self.extraordinary_model == "principal":
            return extraordinary(math.pi / 2)
        return extraordinary(self.theta_pm)


@dataclass(frozen=True)
class WalkoffCoefficients:
    """First- and second-order expansion coefficients of the two-crystal source.

    ``C_o`` and ``C_e`` are in fs/mm, ``B_e`` in fs^2/mm.
    """

    C_o: float
    C_e: float
    B_e: float
    crystal_length_mm: float
    theta_pm: float

    @property
    def tau1(self):
        """Width of the single-crystal correlation function, fs."""
        return self.C_o * self.crystal_length_mm

    @property
    def tau2(self):
        """Relative shift of the two crystals' correlation functions, fs."""
        return self.C_e * self.crystal_length_mm

    @property
    def degenerate(self):
        return self.C_o == 0.0

    @property
    def D(self):
        """Dimensionless strength of the quadratic phase, B_e / (C_o^2 L)."""
        if self.C_o == 0.0:
            raise DegenerateConfig("D is undefined for frequency-degenerate signal and idler (C_o = 0)")
        return self.B_e / (self.C_o**2 * self.crystal_length_mm)


def _signed_slopes(config):
    """Signed k_o'(w1) - k_o'(w2), k_e'(w1) - k_e'(w2) and the mean k_e''."""
    m, w1, w2 = config.medium, config.omega_1, config.omega_2
    ray = config.spdc_e_ray
    c_o = inverse_group_velocity(m, ORDINARY, w1) - inverse_group_velocity(m, ORDINARY, w2)
    c_e = inverse_group_velocity(m, ray, w1) - inverse_group_velocity(m, ray, w2)
    b_e = 0.5 * (gvd(m, ray, w1) + gvd(m, ray, w2))
    return c_o, c_e, b_e


def walkoff_coefficients(config):
    c_o, c_e, b_e = _signed_slopes(config)
    return WalkoffCoefficients(abs(c_o), abs(c_e), b_e, config.crystal_length_mm, config.theta_pm)


def phase_mismatch(config, omega, mode="full"):
    """Longitudinal mismatch k_o(w1+W) + k_o(w2-W) - k_e(wp, theta_pm) in rad/mm."""
    _check_mode(mode)
    omega = np.asarray(omega, dtype=float)
    if mode == "full":
        m = config.medium
        k_p = wavenumber(m, extraordinary(config.theta_pm), config.omega_p)
        out = (
            wavenumber(m, ORDINARY, config.omega_1 + omega)
            + wavenumber(m, ORDINARY, config.omega_2 - omega)
            - k_p
        )
    else:
        out = _signed_slopes(config)[0] * omega
    return float(out) if np.ndim(out) == 0 else out


def _phase_constant(config):
    m, L = config.medium, config.crystal_length_mm
    ray = config.spdc_e_ray
    pump = wavenumber(m, extraordinary(config.theta_pm), config.omega_p) - wavenumber(m, ORDINARY, config.omega_p)
    return (pump + wavenumber(m, ray, config.omega_1) + wavenumber(m, ray, config.omega_2)) * L


def dispersive_phase(config, omega, mode="full", remove_constant=True):
    """Relative phase of the V-branch amplitude, radians.

    With ``remove_constant`` the detuning-independent part (pump
    birefringence plus the phase at zero detuning) is subtracted, so the
    result vanishes at ``omega = 0``.
    """
    _check_mode(mode)
    omega = np.asarray(omega, dtype=float)
    L = config.crystal_length_mm
    if mode == "full":
        m, ray = config.medium, config.spdc_e_ray
        phi = (wavenumber(m, ray, config.omega_1 + omega) + wavenumber(m, ray, config.omega_2 - omega)) * L
        pump = wavenumber(m, extraordinary(config.theta_pm), config.omega_p) - wavenumber(m, ORDINARY, config.omega_p)
        phi = phi + pump * L
        if remove_constant:
            phi = phi - _phase_constant(config)
            phi = np.where(omega == 0.0, 0.0, phi)
    else:
        _, c_e, b_e = _signed_slopes(config)
        phi = c_e * L * omega
        if mode == "second_order":
            phi = phi + b_e * L * omega**2
        if not remove_constant:
            phi = phi + _phase_constant(config)
    return float(phi) if np.ndim(phi) == 0 else phi


@dataclass(frozen=True)
class GridSpec:
    """Uniform symmetric detuning grid.

    Either give ``half_width`` (rad/fs) directly or a number of sinc lobes
    (one lobe is 2 pi / tau1).  ``points`` must be odd.  Unset fields are
    filled from mode-dependent defaults by :func:`resolve_grid`.
    """

    half_width: float | None = None
    points: int | None = None
    lobes: float | None = None


def _lobe_width(config):
    c_o = abs(_signed_slopes(config)[0])
    if c_o == 0.0:
        return None
    return 2.0 * math.pi / (c_o * config.crystal_length_mm)


def _full_mode_limit(config):
    """Largest detuning the full model can use: the arm-exchange point
    and the medium's valid range."""
    lo_nm, hi_nm = config.medium.valid_range
    w_hi = float(omega_from_nm(lo_nm))
    w_lo = float(omega_from_nm(hi_nm))
    limit = min(w_hi - config.omega_1, config.omega_2 - w_lo) * (1 - 1e-9)
    if not config.degenerate:
        limit = min(limit, ARM_EXCHANGE_MARGIN * (config.omega_1 - config.omega_2) / 2.0)
    return limit


def resolve_grid(config, mode="full", grid=None, filter=None):
    """Concrete (half_width, points) for a spectrum in the given mode."""
    _check_mode(mode)
    grid = grid or GridSpec()
    lobe = _lobe_width(config)
    if grid.half_width is not None:
        half = float(grid.half_width)
    elif lobe is None:
        if filter is not None:
            half = 12.0 * filter.amplitude_sigma(config)
        elif mode == "full":
            half = _full_mode_limit(config)
        else:
            raise DegenerateConfig("degenerate source: give an explicit grid half-width or a filter")
    else:
        lobes = grid.lobes if grid.lobes is not None else DEFAULT_LOBES[mode]
        half = lobes * lobe
        if mode == "full":
            half = min(half, _full_mode_limit(config))
        if filter is not None and grid.lobes is None:
            half = min(half, 12.0 * filter.amplitude_sigma(config))

    if grid.points is not None:
        points = int(grid.points)
        if points % 2 == 0:
            raise ValueError(f"grid needs an odd number of points, got {points}")
    else:
        needed = DEFAULT_POINTS if mode == "full" else 4097
        if lobe is not None:
            needed = max(needed, int(math.ceil(2 * half / lobe * MIN_SAMPLES_PER_LOBE)) + 1)
        if mode == "second_order":
            b_e = abs(_signed_slopes(config)[2]) * config.crystal_length_mm
            # |d(B L W^2)/dW| * h <= MAX_PHASE_STEP at the window edge
            needed = max(needed, int(math.ceil(2 * half * 2 * b_e * half / MAX_PHASE_STEP)) + 1)
        if filter is not None:
            needed = max(needed, int(math.ceil(2 * half / (filter.amplitude_sigma(config) / 8))) + 1)
        if needed > MAX_POINTS:
            raise GridTooCoarse(f"grid would need {needed} points (limit {MAX_POINTS})")
        points = needed | 1
    if lobe is not None and (points - 1) / (2 * half) * lobe < MIN_SAMPLES_PER_LOBE * (1 - 1e-12):
        raise GridTooCoarse(
            f"{(points - 1) / (2 * half) * lobe:.1f} samples per sinc lobe, need {MIN_SAMPLES_PER_LOBE}"
        )
    return half, points


@dataclass(frozen=True, eq=False)
class SpectralAmplitude:
    """Sampled amplitudes F(W, H) and F(W, V) on a symmetric detuning grid."""

    omega: np.ndarray
    values_h: np.ndarray
    values_v: np.ndarray
    mode: str = "full"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.omega.size
        if n % 2 == 0 or self.values_h.shape != (n,) or self.values_v.shape != (n,):
            raise ValueError("amplitude arrays must share one odd-length grid")

    @property
    def step(self):
        return float(self.omega[1] - self.omega[0])

    def intensity(self, branch="H"):
        return np.abs(self.values_h if branch == "H" else self.values_v) ** 2

    @property
    def normalization(self):
        """Trapezoidal integral of |F(W, H)|^2 over the grid."""
        return float(trapezoid(self.intensity("H"), self.omega))

    def branch(self, branch):
        if branch not in ("H", "V"):
            raise ValueError(f"branch must be 'H' or 'V', got {branch!r}")
        return self.values_h if branch == "H" else self.values_v

    def coherence_integral(self):
        """Integral of F_H conj(F_V) over the H-branch norm.

        Its conjugate is the visibility phasor of the residual phase.
        """
        norm = self.normalization
        if not norm > 0:
            raise ZeroSpectrum("spectral amplitude has zero norm")
        return complex(trapezoid(self.values_h * np.conj(self.values_v), self.omega)) / norm


def spectral_amplitude(config, grid=None, filter=None, compensator=None, mode="full"):
    """Sample both polarization branches of the biphoton amplitude.

    H branch: sinc(D_z L / 2).  V branch: the same times exp(i phi_res),
    where phi_res is the constant-free dispersive phase plus the
    compensator phase.  Filters multiply both branches.
    """
    half, points = resolve_grid(config, mode, grid, filter)
    omega = np.linspace(-half, half, points)
    omega[points // 2] = 0.0
    L = config.crystal_length_mm
    x = phase_mismatch(config, omega, mode) * L / 2.0
    f = np.sinc(x / np.pi)
    phi = dispersive_phase(config, omega, mode)
    if compensator is not None:
        phi = phi + compensator.phase(config, omega, linear=(mode != "full"))
    values_h = f.astype(complex)
    values_v = f * np.exp(1j * phi)
    if filter is not None:
        t = filter.amplitude(config, omega)
        values_h = values_h * t
        values_v = values_v * t
    return SpectralAmplitude(
        omega, values_h, values_v, mode, meta={"half_width": half, "points": points}
    )


def _trapezoid_weights(n, h):
    w = np.full(n, h)
    w[0] = w[-1] = h / 2
    return w


def correlation_function(amp, branch, tau, chunk=256):
    """Second-order correlation |integral F(W) exp(-i W tau) dW|^2.

    For a symmetric real amplitude this is the cosine transform.  Values
    are normalized to the H-branch value at zero delay, so both branches
    of one amplitude share a scale and a smooth spectrum peaks at 1.
    """
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    h = amp.step
    if tau.size and np.max(np.abs(tau)) * h > math.pi / 2:
        raise GridTooCoarse(
            f"grid step {h:.3g} rad/fs cannot resolve |tau| up to {np.max(np.abs(tau)):.3g} fs"
        )
    w = _trapezoid_weights(amp.omega.size, h)
    ref = abs(np.sum(w * amp.values_h)) ** 2
    if ref == 0.0:
        raise ZeroSpectrum("H-branch amplitude integrates to zero")
    weighted = w * amp.branch(branch)
    out = np.empty(tau.size)
    for start in range(0, tau.size, chunk):
        t = tau[start:start + chunk]
        kernel = np.exp(-1j * np.outer(t, amp.omega))
        out[start:start + chunk] = np.abs(kernel @ weighted) ** 2
    return out / ref


def _correlation_fft(amp, branch, pad=2):
    """G^2 on the FFT delay grid; returns (tau, g2) sorted by tau."""
    n = amp.omega.size
    h = amp.step
    weighted = _trapezoid_weights(n, h) * amp.branch(branch)
    size = pad * n
    g = np.fft.fftshift(np.abs(np.fft.fft(weighted, size)) ** 2)
    # exp(-i W_n tau_k) = exp(i W tau_k) exp(-2 pi i n k / N) for tau_k = 2 pi k / (N h)
    tau = np.fft.fftshift(np.fft.fftfreq(size, d=h)) * 2 * math.pi
    return tau, g


def correlation_overlap(config, compensator_delay_fs, mode="first_order", filter=None, grid=None):
    """Normalized zero-lag cross-correlation of the H- and V-branch G^2.

    The V branch carries the residual phase after an ideal group delay of
    ``compensator_delay_fs``.  For rectangular correlation functions this
    equals 1 - |tau2 - tau_c| / tau1.
    """
    from .elements import DelayLine

    if compensator_delay_fs < 0:
        raise ValueError("compensator delay must be >= 0")
    amp = spectral_amplitude(config, grid, filter, DelayLine(compensator_delay_fs), mode)
    _, g_h = _correlation_fft(amp, "H")
    _, g_v = _correlation_fft(amp, "V")
    denom = math.sqrt(float(np.sum(g_h**2) * np.sum(g_v**2)))
    return float(np.sum(g_h * g_v) / denom)
