"""Two-photon polarization interference: coincidence curves, visibility,
compensator design and the thickness / bandwidth scans."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .dispersion import get_medium
from .elements import CompensatorSpec, DelayLine, FilterSpec
from .errors import DegenerateConfig, RegimeViolation
from .polarization import check_density
from .spdc import (
    MAX_PHASE_STEP,
    MIN_SAMPLES_PER_LOBE,
    _signed_slopes,
    spectral_amplitude,
    walkoff_coefficients,
)

__all__ = [
    "CompensatorSpec",
    "FilterSpec",
    "VisibilityResult",
    "best_thickness",
    "coincidence_rate",
    "compensator_delay",
    "compensator_sensitivity",
    "design_compensator",
    "scan_bandwidth",
    "scan_thickness",
    "second_order_visibility",
    "visibility_first_order",
    "visibility_from_amplitude",
    "visibility_integral",
]

METHODS = {
    "full": "quadrature_full",
    "first_order": "quadrature_first_order",
    "second_order": "quadrature_second_order",
}


@dataclass(frozen=True)
class VisibilityResult:
    V: float
    phase_offset: float
    method: str


def compensator_delay(comp, wavelength_nm):
    """Group delay between the plate's e and o waves, fs."""
    return comp.delay_per_mm(wavelength_nm) * comp.thickness_mm


def design_compensator(config, quartz=None, arm="signal", model="full"):
    """Plate whose group delay at the arm wavelength cancels tau2.

    The delay is linear in thickness, so this is a single division.  A
    degenerate source yields a zero-thickness plate.
    """
    quartz = quartz or get_medium("quartz")
    axis = "vertical" if arm == "signal" else "horizontal"
    unit = CompensatorSpec(quartz, 1.0, arm=arm, axis=axis, model=model)
    wavelength = config.signal_nm if arm == "signal" else config.idler_nm
    tau2 = walkoff_coefficients(config).tau2
    return CompensatorSpec(quartz, tau2 / unit.delay_per_mm(wavelength), arm=arm, axis=axis, model=model)


def compensator_sensitivity(config, quartz=None, rel=0.01, measured_mm=None):
    """How the designed thickness responds to errors in the group delays.

    Returns the nominal thickness, thicknesses with the crystal walk-off
    tau2 and with the plate's group birefringence each perturbed by
    +-``rel``, and, if ``measured_mm`` is given, the relative error in
    tau2 / (plate delay per mm) that would move the optimum there.
    """
    comp = design_compensator(config, quartz)
    nominal = comp.thickness_mm
    report = {
        "nominal_mm": nominal,
        "relative_perturbation": rel,
        "tau2_plus_mm": nominal * (1 + rel),
        "tau2_minus_mm": nominal * (1 - rel),
        "plate_delay_plus_mm": nominal / (1 + rel),
        "plate_delay_minus_mm": nominal / (1 - rel),
    }
    if measured_mm is not None:
        report["measured_mm"] = measured_mm
        if nominal:
            err = measured_mm / nominal - 1.0
            report["required_relative_error"] = err
            report["explanation"] = (
                f"L_q scales as tau2 / (plate group delay per mm); a {100 * err:+.1f}% error in that "
                f"ratio moves the optimum from {nominal:.3f} mm to {measured_mm:.3f} mm, while each 1% "
                f"error shifts it by {nominal * rel:.3f} mm"
            )
        else:
            report["required_relative_error"] = None
    return report


def coincidence_rate(rho, phi):
    """Coincidences behind +45/+45 analyzers as the VV phase is tuned.

    ``rho`` is rotated by diag(1, 1, 1, e^{i phi}) before projection.  The
    curve contains only the first harmonic in phi and is normalized to
    mean 1 (left as zeros if the projection vanishes for every phi).
    """
    rho = check_density(rho)
    phi = np.asarray(phi, dtype=float)
    plus = np.full(4, 0.5, dtype=complex)
    # <++| U rho U^dag |++> = a + Re(b e^{-i phi}),  U = diag(1, 1, 1, e^{i phi})
    m = np.outer(plus.conj(), plus) * rho
    b = 2.0 * (m[:3, 3].sum())
    a = (m.sum() - m[:3, 3].sum() - m[3, :3].sum()).real
    rate = a + (b * np.exp(-1j * phi)).real
    if a <= 0:
        return np.zeros_like(phi)
    return rate / a


def visibility_from_amplitude(amp):
    """|integral |F|^2 e^{i phi_res}| / integral |F|^2 from a sampled spectrum."""
    z = np.conj(amp.coherence_integral())
    return min(1.0, abs(z)), float(np.angle(z))


def visibility_integral(config, compensator=None, filter=None, mode="full", grid=None):
    amp = spectral_amplitude(config, grid, filter, compensator, mode)
    v, offset = visibility_from_amplitude(amp)
    return VisibilityResult(v, offset, METHODS[mode])


def visibility_first_order(config):
    """Closed form 1 - tau2 / tau1 for rectangular correlation functions."""
    w = walkoff_coefficients(config)
    if w.tau1 == 0.0:
        if w.tau2 == 0.0:
            return VisibilityResult(1.0, 0.0, "closed_form_first_order")
        raise DegenerateConfig("tau1 = 0 with nonzero tau2")
    if w.tau2 > w.tau1:
        raise RegimeViolation(f"tau2 = {w.tau2:.4g} fs exceeds tau1 = {w.tau1:.4g} fs")
    return VisibilityResult(1.0 - w.tau2 / w.tau1, 0.0, "closed_form_first_order")


def second_order_visibility(D, lobes=100, points=None):
    """Visibility left after exact first-order compensation.

    Integrates sinc^2(x/2) exp(i D x^2) over |x| <= 2 pi lobes and reports the
    modulus normalized by the integral of sinc^2(x/2) on the same window.
    """
    if D < 0:
        raise ValueError("D must be >= 0")
    half = 2.0 * math.pi * lobes
    if points is None:
        needed = int(math.ceil(2 * lobes * MIN_SAMPLES_PER_LOBE))
        needed = max(needed, int(math.ceil(2 * half * 2 * D * half / MAX_PHASE_STEP)))
        points = needed | 1
    x = np.linspace(-half, half, points)
    weight = np.sinc(x / (2 * np.pi)) ** 2
    vc = trapezoid(weight * np.cos(D * x**2), x)
    vs = trapezoid(weight * np.sin(D * x**2), x)
    v = math.hypot(vc, vs) / trapezoid(weight, x)
    return VisibilityResult(float(min(1.0, v)), math.atan2(vs, vc), "quadrature_second_order")


def scan_thickness(config, thicknesses, filter=None, mode="full", quartz=None, grid=None):
    """Visibility against compensator thickness.

    Returns a list of ``(thickness_mm, V, phase_offset)`` in input order.
    The spectrum is computed once; the plate phase is linear in thickness.
    """
    thicknesses = np.asarray(thicknesses, dtype=float)
    if np.any(thicknesses < 0):
        raise ValueError("thicknesses must be >= 0")
    unit = design_compensator(config, quartz)
    unit = CompensatorSpec(unit.medium, 1.0, unit.arm, unit.axis, unit.model)
    amp = spectral_amplitude(config, grid, filter, None, mode)
    per_mm = unit.phase_per_mm(config, amp.omega, linear=(mode != "full"))
    n = amp.omega.size
    w = np.full(n, amp.step)
    w[0] = w[-1] = amp.step / 2
    weighted = w * np.conj(amp.values_h) * amp.values_v
    norm = float(np.sum(w * np.abs(amp.values_h) ** 2))
    out = []
    for start in range(0, thicknesses.size, 64):
        block = thicknesses[start:start + 64]
        z = np.exp(1j * np.outer(block, per_mm)) @ weighted / norm
        for t, zi in zip(block, z):
            out.append((float(t), min(1.0, float(abs(zi))), float(np.angle(zi))))
    return out


def best_thickness(scan):
    """Smallest thickness attaining the scan maximum (to 1e-12)."""
    vmax = max(v for _, v, _ in scan)
    return next(t for t, v, _ in scan if v >= vmax - 1e-12)


def scan_bandwidth(config, bandwidths, mode="second_order", convention="fwhm", grid=None):
    """Visibility against filter bandwidth with ideal first-order compensation.

    The compensation is an ideal delay equal to tau2, so in
    ``second_order`` mode only the quadratic phase remains.
    """
    c_e = _signed_slopes(config)[1]
    delay = DelayLine(c_e * config.crystal_length_mm)
    out = []
    for bw in bandwidths:
        filt = FilterSpec(float(bw), convention=convention)
        r = visibility_integral(config, delay, filt, mode, grid)
        out.append((float(bw), r.V, r.phase_offset))
    return out
