"""Refractive indices, wavenumbers and their frequency derivatives for
uniaxial crystals.

Wavelengths are given in nm at the public surface. Internally angular
frequency is in rad/fs and lengths in mm, so wavenumbers come out in rad/mm,
inverse group velocities in fs/mm and group-velocity dispersion in fs^2/mm.

All derivatives are analytic. The dispersion formulas are written in the
variable ``u = lambda^2`` (micrometres squared); derivatives with respect to
``u`` are chained to omega via ``du/dw = -2u/w`` and ``d2u/dw2 = 6u/w^2``.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.optimize import bisect

from .errors import ConfigError, EnergyMismatch, NoPhaseMatching, OutOfRange, ConvergenceFailure

C_MM_PER_FS = 2.99792458e-4
C_UM_PER_FS = 0.299792458

# formula id -> number of coefficients
FORMULAS = {
    "sellmeier_uv_ir": 4,
    "sellmeier_2pole": 5,
}


def omega_from_nm(wavelength_nm):
    """Vacuum wavelength (nm) to angular frequency (rad/fs)."""
    return 2.0 * np.pi * C_MM_PER_FS / (np.asarray(wavelength_nm, dtype=float) * 1e-6)


def nm_from_omega(omega):
    """Angular frequency (rad/fs) to vacuum wavelength (nm)."""
    return 2.0 * np.pi * C_MM_PER_FS / np.asarray(omega, dtype=float) * 1e6


@dataclass(frozen=True)
class DispersiveMedium:
    """A uniaxial crystal described by Sellmeier fits for n_o and n_e."""

    name: str
    formula: str
    sellmeier_o: tuple
    sellmeier_e: tuple
    valid_range: tuple
    source: str = ""

    def __post_init__(self):
        if self.formula not in FORMULAS:
            raise ConfigError(f"unknown dispersion formula '{self.formula}'", key=f"{self.name}.formula")
        n = FORMULAS[self.formula]
        for label, coeffs in (("ordinary", self.sellmeier_o), ("extraordinary", self.sellmeier_e)):
            if len(coeffs) != n:
                raise ConfigError(
                    f"formula {self.formula} takes {n} coefficients, got {len(coeffs)}",
                    key=f"{self.name}.{label}",
                )
        lo, hi = self.valid_range
        if not 0 < lo < hi:
            raise ConfigError("valid range must satisfy 0 < lower < upper", key=f"{self.name}.valid_range_nm")
        u = (np.linspace(lo, hi, 512) * 1e-3) ** 2
        for which in ("o", "e"):
            eps = _principal(self, which, u)[0]
            if not np.all(eps > 1.0):
                raise ConfigError("index must exceed 1 over the valid range", key=f"{self.name}.{which}")

    def check_range(self, wavelength_nm):
        lam = np.asarray(wavelength_nm, dtype=float)
        lo, hi = self.valid_range
        bad = (lam < lo) | (lam > hi) | ~np.isfinite(lam)
        if np.any(bad):
            raise OutOfRange(self.name, float(np.atleast_1d(lam)[np.argmax(np.atleast_1d(bad))]), self.valid_range)


@dataclass(frozen=True)
class Ray:
    """Polarization of a wave inside a uniaxial crystal.

    ``theta=None`` is the ordinary wave; otherwise the extraordinary wave
    propagating at ``theta`` radians to the optic axis.
    """

    theta: float | None = None

    def __post_init__(self):
        if self.theta is not None and not (0.0 <= self.theta <= math.pi / 2):
            raise ValueError(f"propagation angle {self.theta} outside [0, pi/2]")

    @property
    def ordinary(self):
        return self.theta is None


ORDINARY = Ray()


def extraordinary(theta):
    return Ray(float(theta))


def _principal(medium, which, u):
    """n^2 and its first two u-derivatives for one principal index."""
    coeffs = medium.sellmeier_o if which == "o" else medium.sellmeier_e
    if medium.formula == "sellmeier_uv_ir":
        a, b, c, d = coeffs
        x = u - c
        return a + b / x - d * u, -b / x**2 - d, 2.0 * b / x**3
    a, b1, c1, b2, c2 = coeffs
    eps, eps_u, eps_uu = a, 0.0, 0.0
    for b, c in ((b1, c1), (b2, c2)):
        x = u - c
        # b u / (u - c) = b + b c / (u - c)
        eps = eps + b + b * c / x
        eps_u = eps_u - b * c / x**2
        eps_uu = eps_uu + 2.0 * b * c / x**3
    return eps, eps_u, eps_uu


def _eps_ray(medium, ray, u):
    """n^2 of the given ray and its u-derivatives."""
    if ray.ordinary:
        return _principal(medium, "o", u)
    eo, eo1, eo2 = _principal(medium, "o", u)
    ee, ee1, ee2 = _principal(medium, "e", u)
    cs, sn = math.cos(ray.theta) ** 2, math.sin(ray.theta) ** 2
    # 1/n^2 = cos^2/n_o^2 + sin^2/n_e^2
    eta = cs / eo + sn / ee
    eta1 = -cs * eo1 / eo**2 - sn * ee1 / ee**2
    eta2 = cs * (2 * eo1**2 / eo**3 - eo2 / eo**2) + sn * (2 * ee1**2 / ee**3 - ee2 / ee**2)
    eps = 1.0 / eta
    eps1 = -eta1 / eta**2
    eps2 = 2 * eta1**2 / eta**3 - eta2 / eta**2
    return eps, eps1, eps2


def _index_omega(medium, ray, omega):
    """n, dn/dw, d2n/dw2 at angular frequency omega (rad/fs)."""
    w = np.asarray(omega, dtype=float)
    medium.check_range(nm_from_omega(w))
    u = (2.0 * np.pi * C_UM_PER_FS / w) ** 2
    eps, eps_u, eps_uu = _eps_ray(medium, ray, u)
    u_w = -2.0 * u / w
    u_ww = 6.0 * u / w**2
    eps_w = eps_u * u_w
    eps_ww = eps_uu * u_w**2 + eps_u * u_ww
    n = np.sqrt(eps)
    n_w = eps_w / (2 * n)
    n_ww = eps_ww / (2 * n) - eps_w**2 / (4 * n**3)
    return n, n_w, n_ww


def _out(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def refractive_index(medium, ray, wavelength_nm):
    """Phase index of ``ray`` at vacuum wavelength ``wavelength_nm``."""
    medium.check_range(wavelength_nm)
    u = (np.asarray(wavelength_nm, dtype=float) * 1e-3) ** 2
    return _out(np.sqrt(_eps_ray(medium, ray, u)[0]))


def wavenumber(medium, ray, omega):
    """k = n w / c in rad/mm."""
    n = _index_omega(medium, ray, omega)[0]
    return _out(n * np.asarray(omega, dtype=float) / C_MM_PER_FS)


def inverse_group_velocity(medium, ray, omega):
    """dk/dw = (n + w dn/dw) / c in fs/mm."""
    w = np.asarray(omega, dtype=float)
    n, n_w, _ = _index_omega(medium, ray, w)
    return _out((n + w * n_w) / C_MM_PER_FS)


def gvd(medium, ray, omega):
    """d2k/dw2 = (2 dn/dw + w d2n/dw2) / c in fs^2/mm."""
    w = np.asarray(omega, dtype=float)
    _, n_w, n_ww = _index_omega(medium, ray, w)
    return _out((2 * n_w + w * n_ww) / C_MM_PER_FS)


def check_energy(pump_nm, signal_nm, idler_nm, rtol=1e-9):
    inv_p = 1.0 / pump_nm
    mismatch = abs(inv_p - 1.0 / signal_nm - 1.0 / idler_nm) / inv_p
    if mismatch > rtol:
        raise EnergyMismatch(
            f"1/{pump_nm:g} != 1/{signal_nm:g} + 1/{idler_nm:g} (relative mismatch {mismatch:.3g}); "
            f"idler for this pump and signal is {idler_from(pump_nm, signal_nm):.9g} nm"
        )


def idler_from(pump_nm, signal_nm):
    """Wavelength completing the energy balance with pump and signal."""
    return 1.0 / (1.0 / pump_nm - 1.0 / signal_nm)


def collinear_mismatch(medium, theta, pump_nm, signal_nm, idler_nm):
    """k_e(pump, theta) - k_o(signal) - k_o(idler) in rad/mm."""
    return (
        wavenumber(medium, extraordinary(theta), omega_from_nm(pump_nm))
        - wavenumber(medium, ORDINARY, omega_from_nm(signal_nm))
        - wavenumber(medium, ORDINARY, omega_from_nm(idler_nm))
    )


def phase_matching_angle(medium, pump_nm, signal_nm, idler_nm, scan_points=1000):
    """Collinear type-I (o + o <- e) phase-matching angle in radians.

    A uniform scan over [0, pi/2] brackets the first sign change of the
    mismatch, which is then bisected to machine precision.
    """
    check_energy(pump_nm, signal_nm, idler_nm)
    medium.check_range([pump_nm, signal_nm, idler_nm])
    ks = wavenumber(medium, ORDINARY, omega_from_nm(signal_nm))
    ki = wavenumber(medium, ORDINARY, omega_from_nm(idler_nm))
    wp = omega_from_nm(pump_nm)

    def mismatch(theta):
        return wavenumber(medium, extraordinary(theta), wp) - ks - ki

    thetas = np.linspace(0.0, math.pi / 2, scan_points)
    values = np.array([mismatch(t) for t in thetas])
    exact = np.flatnonzero(values == 0.0)
    crossings = np.flatnonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0)
    if exact.size and (not crossings.size or exact[0] <= crossings[0]):
        theta = float(thetas[exact[0]])
    elif crossings.size:
        i = crossings[0]
        theta = bisect(mismatch, thetas[i], thetas[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    else:
        raise NoPhaseMatching(
            f"{medium.name}: no collinear type-I phase matching for {pump_nm:g} -> {signal_nm:g} + {idler_nm:g} nm"
        )
    residual = abs(mismatch(theta))
    if residual >= 1e-9:
        raise ConvergenceFailure(f"phase-matching residual {residual:.3g} rad/mm")
    return float(theta)


def _parse_floats(text, key):
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got '{text}'", key=key) from None


def load_materials(path=None):
    """Read a materials file into a dict keyed by lower-case medium name."""
    parser = configparser.ConfigParser(interpolation=None)
    if path is None:
        text = resources.files("ququart").joinpath("data/materials.ini").read_text()
        parser.read_string(text, source="materials.ini")
    else:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"materials file not found: {path}")
        parser.read(path)
    media = {}
    for name in parser.sections():
        sec = parser[name]
        for key in ("formula", "ordinary", "extraordinary", "valid_range_nm"):
            if key not in sec:
                raise ConfigError("missing field", key=f"{name}.{key}")
        rng = _parse_floats(sec["valid_range_nm"], f"{name}.valid_range_nm")
        if len(rng) != 2:
            raise ConfigError("expected two bounds", key=f"{name}.valid_range_nm")
        media[name.lower()] = DispersiveMedium(
            name=name,
            formula=sec["formula"].strip(),
            sellmeier_o=_parse_floats(sec["ordinary"], f"{name}.ordinary"),
            sellmeier_e=_parse_floats(sec["extraordinary"], f"{name}.extraordinary"),
            valid_range=rng,
            source=sec.get("source", "").strip(),
        )
    return media


_DEFAULT_MEDIA = None


def get_medium(name, path=None):
    """Look up a medium by (case-insensitive) name."""
    global _DEFAULT_MEDIA
    if path is None:
        if _DEFAULT_MEDIA is None:
            _DEFAULT_MEDIA = load_materials()
        media = _DEFAULT_MEDIA
    else:
        media = load_materials(path)
    try:
        return media[name.lower()]
    except KeyError:
        raise ConfigError(f"unknown material '{name}' (known: {', '.join(m.name for m in media.values())})") from None
