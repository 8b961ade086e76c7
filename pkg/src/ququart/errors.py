"""Exception types raised across the package."""


class QuquartError(Exception):
    """Base class for all package errors."""


class ConfigError(QuquartError, ValueError):
    """Malformed or inconsistent configuration."""

    def __init__(self, message, key=None, line=None):
        self.message = message
        self.key = key
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class OutOfRange(QuquartError, ValueError):
    """Wavelength outside the published validity range of a dispersion fit."""

    def __init__(self, medium, wavelength_nm, valid_range):
        self.medium = medium
        self.wavelength_nm = wavelength_nm
        self.valid_range = valid_range
        lo, hi = valid_range
        super().__init__(
            f"{medium}: wavelength {wavelength_nm:.6g} nm outside valid range "
            f"[{lo:g}, {hi:g}] nm"
        )


class EnergyMismatch(ConfigError):
    """Pump, signal and idler wavelengths violate energy conservation."""


class NoPhaseMatching(QuquartError):
    """No collinear phase-matching angle exists in [0, pi/2]."""


class DegenerateConfig(QuquartError):
    """Quantity undefined for frequency-degenerate signal and idler."""


class RegimeViolation(QuquartError):
    """Closed-form expression used outside its regime of validity."""


class GridTooCoarse(QuquartError):
    """Sampling grid cannot resolve the requested quantity."""


class ZeroSpectrum(QuquartError):
    """Spectral amplitude carries no weight."""


class ConvergenceFailure(QuquartError):
    """An iterative solver did not reach its target accuracy."""


class NonUnitaryInput(QuquartError, ValueError):
    """Matrix expected to be unitary is not."""


class InvalidState(QuquartError, ValueError):
    """State vector or density matrix violates its invariants."""
