"""Dispersion and compensation of two-crystal type-I polarization ququarts."""

from .dispersion import (
    DispersiveMedium,
    Ray,
    get_medium,
    gvd,
    inverse_group_velocity,
    load_materials,
    phase_matching_angle,
    refractive_index,
    wavenumber,
)
from .elements import CompensatorSpec, DelayLine, FilterSpec
from .errors import *  # noqa: F401,F403
from .polarization import (
    Recipe,
    SchmidtForm,
    concurrence,
    density_from_spectrum,
    fidelity,
    plate_angles_for_target,
    prepare_arbitrary,
    purity,
    schmidt_decompose,
)
from .spdc import (
    GridSpec,
    SourceConfig,
    SpectralAmplitude,
    correlation_function,
    dispersive_phase,
    spectral_amplitude,
    walkoff_coefficients,
)
from .visibility import (
    VisibilityResult,
    best_thickness,
    coincidence_rate,
    compensator_sensitivity,
    design_compensator,
    scan_bandwidth,
    scan_thickness,
    second_order_visibility,
    visibility_first_order,
    visibility_integral,
)

__version__ = "0.1.0"
