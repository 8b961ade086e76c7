"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 numerical error.
"""

from __future__ import annotations

import functools
import math
import sys

import click
import numpy as np

from . import config as cfgmod
from .errors import (
    ConfigError,
    ConvergenceFailure,
    DegenerateConfig,
    GridTooCoarse,
    InvalidState,
    NoPhaseMatching,
    OutOfRange,
    QuquartError,
    RegimeViolation,
    ZeroSpectrum,
)
from .output import csv_text, json_text, table_json
from .polarization import (
    apply_local_density,
    check_density,
    concurrence,
    density_from_spectrum,
    fidelity,
    normalize,
    prepare_arbitrary,
    purity,
    to_pairs,
)
from .spdc import GridSpec, correlation_function, spectral_amplitude, walkoff_coefficients
from .visibility import (
    CompensatorSpec,
    coincidence_rate,
    compensator_sensitivity,
    design_compensator,
    scan_bandwidth,
    scan_thickness,
    visibility_first_order,
    visibility_from_amplitude,
)

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
CONFIG_ERRORS = (ConfigError, OutOfRange, NoPhaseMatching, InvalidState, DegenerateConfig, RegimeViolation)
NUMERICAL_ERRORS = (ConvergenceFailure, GridTooCoarse, ZeroSpectrum)

MODE_NAMES = {"full": "full", "first-order": "first_order", "second-order": "second_order"}


def _mode(value, default):
    return MODE_NAMES[value] if value else default


def _grid(run, points):
    grid = run.grid or GridSpec()
    if points is None:
        return run.grid
    if points < 3 or points % 2 == 0:
        raise ConfigError("--grid-points must be an odd integer >= 3")
    return GridSpec(grid.half_width, points, grid.lobes)


def _emit(text, out):
    if out is None:
        click.echo(text, nl=False)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def common_options(default_format):
    def decorate(fn):
        @click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False),
                      help="Run configuration file.")
        @click.option("--out", type=click.Path(dir_okay=False), default=None,
                      help="Output file (default stdout).")
        @click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default=default_format,
                      show_default=True)
        @click.option("--grid-points", type=int, default=None, help="Odd number of detuning samples.")
        @click.option("--mode", type=click.Choice(list(MODE_NAMES)), default=None,
                      help="Phase model; the default depends on the command.")
        @functools.wraps(fn)
        def wrapper(config_path, **kwargs):
            try:
                run = cfgmod.load(config_path)
                fn(run, **kwargs)
            except CONFIG_ERRORS as exc:
                click.echo(f"config error: {exc}", err=True)
                sys.exit(EXIT_CONFIG)
            except NUMERICAL_ERRORS as exc:
                click.echo(f"numerical error: {exc}", err=True)
                sys.exit(EXIT_NUMERICAL)
            except QuquartError as exc:
                click.echo(f"error: {exc}", err=True)
                sys.exit(EXIT_NUMERICAL)
        return wrapper
    return decorate


@click.group()
def main():
    """Dispersion, compensation and visibility of two-crystal polarization ququarts."""


def coefficients_report(run, measured_mm=None):
    src = run.source
    w = walkoff_coefficients(src)
    comp = design_compensator(src, run.compensator.medium if run.compensator else None)
    report = {
        "source": {
            "material": src.medium.name,
            "crystal_length_mm": src.crystal_length_mm,
            "pump_nm": src.pump_nm,
            "signal_nm": src.signal_nm,
            "idler_nm": src.idler_nm,
        },
        "theta_pm_rad": src.theta_pm,
        "theta_pm_deg": math.degrees(src.theta_pm),
        "C_o_fs_per_mm": w.C_o,
        "C_e_fs_per_mm": w.C_e,
        "B_e_fs2_per_mm": w.B_e,
        "tau1_fs": w.tau1,
        "tau2_fs": w.tau2,
        "D": None if w.degenerate else w.D,
        "degenerate": w.degenerate,
        "compensator": {
            "material": comp.medium.name,
            "arm": comp.arm,
            "thickness_mm": comp.thickness_mm,
            "delay_per_mm_fs": comp.delay_per_mm(src.signal_nm),
        },
        "sensitivity": compensator_sensitivity(src, comp.medium, measured_mm=measured_mm),
    }
    if not w.degenerate and w.tau2 <= w.tau1:
        report["visibility_uncompensated_first_order"] = visibility_first_order(src).V
    return report


@main.command()
@common_options("json")
@click.option("--measured-thickness", type=float, default=None,
              help="Measured optimum thickness (mm) to compare with the design.")
def coefficients(run, out, fmt, grid_points, mode, measured_thickness):
    """Walk-off coefficients, phase-matching angle and compensator thickness."""
    report = coefficients_report(run, measured_thickness)
    if fmt == "json":
        _emit(json_text(report), out)
    else:
        flat = [(k, v) for k, v in report.items() if not isinstance(v, dict)]
        flat += [(f"compensator.{k}", v) for k, v in report["compensator"].items()]
        _emit(csv_text(["quantity", "value"], flat), out)


def _phase_scan(run, thickness, grid, mode, phi):
    comp = run.compensator
    if thickness is not None:
        plate = comp.medium if comp else design_compensator(run.source).medium
        arm = comp.arm if comp else "signal"
        axis = "vertical" if arm == "signal" else "horizontal"
        comp = CompensatorSpec(plate, thickness, arm=arm, axis=axis, model=comp.model if comp else "full")
    amp = spectral_amplitude(run.source, grid, run.filter, comp, mode)
    rho = density_from_spectrum(amp, run.source.pump_balance, run.source.pump_phase)
    return coincidence_rate(rho, phi)


@main.command()
@common_options("csv")
@click.option("--kind", type=click.Choice(["thickness", "bandwidth", "phase"]), required=True)
@click.option("--start", type=float, default=None)
@click.option("--stop", type=float, default=None)
@click.option("--num", type=int, default=None)
@click.option("--thickness", type=float, default=None,
              help="Compensator thickness (mm) for a phase scan; default from the config.")
def scan(run, out, fmt, grid_points, mode, kind, start, stop, num, thickness):
    """Visibility against thickness or bandwidth, or coincidences against phase."""
    grid = _grid(run, grid_points)
    if kind == "thickness":
        xs = np.linspace(0.0 if start is None else start, 5.0 if stop is None else stop, num or 501)
        rows = scan_thickness(run.source, xs, run.filter, _mode(mode, "full"),
                              run.compensator.medium if run.compensator else None, grid)
        columns = ["lq_mm", "visibility", "phase_offset_rad"]
    elif kind == "bandwidth":
        xs = np.linspace(1.0 if start is None else start, 100.0 if stop is None else stop, num or 50)
        convention = run.filter.convention if run.filter else "fwhm"
        rows = scan_bandwidth(run.source, xs, _mode(mode, "second_order"), convention, grid)
        columns = ["bandwidth_nm", "visibility", "phase_offset_rad"]
    else:
        phi = np.linspace(0.0 if start is None else start, 4 * math.pi if stop is None else stop, num or 401)
        rate = _phase_scan(run, thickness, grid, _mode(mode, "full"), phi)
        rows = list(zip(phi.tolist(), rate.tolist()))
        columns = ["phi_rad", "rate"]
    if fmt == "json":
        _emit(table_json(kind, columns, rows), out)
    else:
        _emit(csv_text(columns, rows), out)


def _parse_target(text):
    try:
        values = [complex(tok.strip().replace(" ", "")) for tok in text.split(",")]
    except ValueError:
        raise InvalidState(f"cannot parse target amplitudes '{text}'") from None
    return normalize(values)


def state_report(run, target, grid=None, mode="full"):
    psi = _parse_target(target)
    recipe = prepare_arbitrary(psi)
    amp = spectral_amplitude(run.source, grid, run.filter, run.compensator, mode)
    v, offset = visibility_from_amplitude(amp)
    # the pump phase also absorbs the mean residual phase of the spectrum
    seed = density_from_spectrum(amp, recipe.mu, recipe.pump_phase - offset)
    rho = check_density(apply_local_density(seed, recipe.arm1.unitary(), recipe.arm2.unitary()))

    def arm(a):
        return {"qwp_rad": a.qwp, "hwp_rad": a.hwp, "residual_phase_rad": a.residual_phase}

    return {
        "target": to_pairs(psi),
        "basis": ["HH", "HV", "VH", "VV"],
        "recipe": {
            "mu": recipe.mu,
            "pump_angle_rad": recipe.pump_angle,
            "pump_hwp_angle_rad": recipe.pump_hwp_angle,
            "pump_phase_rad": recipe.pump_phase,
            "pump_phase_with_dispersion_rad": float(np.angle(np.exp(1j * (recipe.pump_phase - offset)))),
            "arm1": arm(recipe.arm1),
            "arm2": arm(recipe.arm2),
            "compensator_required": recipe.compensator_required,
        },
        "schmidt_mu": recipe.mu,
        "concurrence_target": concurrence(psi),
        "visibility": v,
        "prepared": {
            "density_matrix": to_pairs(rho),
            "fidelity": round(fidelity(rho, psi), 3),
            "fidelity_exact": fidelity(rho, psi),
            "purity": purity(rho),
            "concurrence": concurrence(rho),
        },
        "note": "dispersion-only prediction; spatial-mode selection errors are not modelled",
    }


@main.command()
@common_options("json")
@click.option("--target", required=True,
              help="Four comma-separated complex amplitudes in HH,HV,VH,VV order, e.g. '1,0,0,1'.")
def state(run, out, fmt, grid_points, mode, target):
    """Preparation recipe and predicted quality for a target ququart."""
    report = state_report(run, target, _grid(run, grid_points), _mode(mode, "full"))
    if fmt == "json":
        _emit(json_text(report), out)
    else:
        p = report["prepared"]
        rows = [("schmidt_mu", report["schmidt_mu"]), ("concurrence_target", report["concurrence_target"]),
                ("visibility", report["visibility"]), ("fidelity", p["fidelity_exact"]),
                ("purity", p["purity"])]
        _emit(csv_text(["quantity", "value"], rows), out)


@main.command()
@common_options("csv")
def spectrum(run, out, fmt, grid_points, mode):
    """|F(W)|^2 of the H branch against detuning."""
    amp = spectral_amplitude(run.source, _grid(run, grid_points), run.filter, run.compensator,
                             _mode(mode, "full"))
    rows = list(zip(amp.omega.tolist(), amp.intensity("H").tolist()))
    columns = ["omega_rad_per_fs", "intensity"]
    _emit(table_json("spectrum", columns, rows) if fmt == "json" else csv_text(columns, rows), out)


@main.command()
@common_options("csv")
@click.option("--branch", type=click.Choice(["H", "V"]), default="H", show_default=True)
@click.option("--tau-max", type=float, default=None, help="Largest |tau| in fs (default 1.5 tau1).")
@click.option("--num", type=int, default=601, show_default=True)
def g2(run, out, fmt, grid_points, mode, branch, tau_max, num):
    """Second-order correlation function G2(tau)."""
    w = walkoff_coefficients(run.source)
    if tau_max is None:
        tau_max = 1.5 * max(w.tau1, w.tau2) if w.tau1 > 0 else 200.0
    tau = np.linspace(-tau_max, tau_max, num)
    amp = spectral_amplitude(run.source, _grid(run, grid_points), run.filter, run.compensator,
                             _mode(mode, "first_order"))
    rows = list(zip(tau.tolist(), correlation_function(amp, branch, tau).tolist()))
    columns = ["tau_fs", "g2"]
    _emit(table_json("g2", columns, rows) if fmt == "json" else csv_text(columns, rows), out)


if __name__ == "__main__":
    main()
