"""Run configuration files.

Plain text, one ``key = value`` per line, ``#`` starts a comment.  Keys
carry a section prefix:

==============================  =============================================
source.material                 medium name in the materials file (BBO)
source.crystal_length_mm        length of each crystal
source.pump_nm                  pump wavelength
source.signal_nm                one down-converted wavelength
source.idler_nm                 optional; derived from energy conservation
source.pump_balance             weight mu of the HH branch (default 0.5)
source.pump_phase_rad           pump H/V phase (default 0)
source.extraordinary_model      phase_matched (default) or principal
materials.file                  optional alternative materials file
filter.bandwidth_nm             enables Gaussian filters in both arms
filter.convention               fwhm (default) or width
filter.signal_center_nm         optional, defaults to source.signal_nm
filter.idler_center_nm          optional, defaults to source.idler_nm
compensator.material            plate medium (default quartz)
compensator.thickness_mm        number, or ``auto`` for the designed value
compensator.arm                 signal (default) or idler
compensator.model               full (default) or first_order
grid.points                     odd number of detuning samples
grid.lobes                      window half-width in sinc lobes
grid.half_width_rad_per_fs      explicit window half-width
==============================  =============================================
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .dispersion import get_medium
from .elements import ARMS, COMPENSATOR_MODELS, FILTER_CONVENTIONS, CompensatorSpec, FilterSpec
from .errors import ConfigError, QuquartError
from .spdc import EXTRAORDINARY_MODELS, GridSpec, SourceConfig

KNOWN_KEYS = {
    "source.material": str,
    "source.crystal_length_mm": float,
    "source.pump_nm": float,
    "source.signal_nm": float,
    "source.idler_nm": float,
    "source.pump_balance": float,
    "source.pump_phase_rad": float,
    "source.extraordinary_model": str,
    "materials.file": str,
    "filter.bandwidth_nm": float,
    "filter.convention": str,
    "filter.signal_center_nm": float,
    "filter.idler_center_nm": float,
    "compensator.material": str,
    "compensator.thickness_mm": str,
    "compensator.arm": str,
    "compensator.model": str,
    "grid.points": int,
    "grid.lobes": float,
    "grid.half_width_rad_per_fs": float,
}
REQUIRED = ("source.material", "source.crystal_length_mm", "source.pump_nm", "source.signal_nm")
CHOICES = {
    "source.extraordinary_model": EXTRAORDINARY_MODELS,
    "filter.convention": FILTER_CONVENTIONS,
    "compensator.arm": ARMS,
    "compensator.model": COMPENSATOR_MODELS,
}


@dataclass(frozen=True)
class RunConfig:
    source: SourceConfig
    filter: FilterSpec | None = None
    compensator: CompensatorSpec | None = None
    grid: GridSpec | None = None
    auto_compensator: bool = False
    materials_file: str | None = None


def parse_text(text):
    """Parse config text into ``{key: (value, line_number)}``."""
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError("unknown key", key=key, line=lineno)
        if key in entries:
            raise ConfigError("duplicate key", key=key, line=lineno)
        caster = KNOWN_KEYS[key]
        try:
            typed = caster(value)
        except ValueError:
            raise ConfigError(f"cannot read '{value}' as {caster.__name__}", key=key, line=lineno) from None
        if key in CHOICES and typed not in CHOICES[key]:
            raise ConfigError(f"expected one of {CHOICES[key]}, got '{typed}'", key=key, line=lineno)
        entries[key] = (typed, lineno)
    return entries


def _build(entries):
    for key in REQUIRED:
        if key not in entries:
            raise ConfigError("missing required key", key=key)

    def get(key, default=None):
        return entries[key][0] if key in entries else default

    def wrap(key, fn):
        # rethrow with the offending line attached
        try:
            return fn()
        except ConfigError as exc:
            if exc.line is None and key in entries:
                raise type(exc)(exc.message, key=exc.key or key, line=entries[key][1]) from None
            raise
        except (ValueError, QuquartError) as exc:
            line = entries[key][1] if key in entries else None
            raise ConfigError(str(exc), key=key, line=line) from None

    mat_file = get("materials.file")
    medium = wrap("source.material", lambda: get_medium(get("source.material"), mat_file))
    source = wrap("source.idler_nm" if "source.idler_nm" in entries else "source.signal_nm",
                  lambda: SourceConfig.from_wavelengths(
                      medium,
                      get("source.crystal_length_mm"),
                      get("source.pump_nm"),
                      get("source.signal_nm"),
                      get("source.idler_nm"),
                      pump_balance=get("source.pump_balance", 0.5),
                      pump_phase=get("source.pump_phase_rad", 0.0),
                      extraordinary_model=get("source.extraordinary_model", "phase_matched"),
                  ))
    # blame the key that holds the offending wavelength; a derived idler comes from the signal
    idler_key = "source.idler_nm" if "source.idler_nm" in entries else "source.signal_nm"
    for key, lam in (("source.pump_nm", source.pump_nm), ("source.signal_nm", get("source.signal_nm")),
                     (idler_key, source.idler_nm)):
        wrap(key, lambda lam=lam: medium.check_range(lam))
    wrap("source.pump_nm", lambda: source.theta_pm)

    filt = None
    if "filter.bandwidth_nm" in entries:
        filt = wrap("filter.bandwidth_nm", lambda: FilterSpec(
            get("filter.bandwidth_nm"),
            get("filter.signal_center_nm"),
            get("filter.idler_center_nm"),
            get("filter.convention", "fwhm"),
        ))
    elif any(k.startswith("filter.") for k in entries):
        raise ConfigError("filter settings given without filter.bandwidth_nm", key="filter.bandwidth_nm")

    comp, auto = None, False
    if "compensator.thickness_mm" in entries:
        plate = wrap("compensator.material", lambda: get_medium(get("compensator.material", "quartz"), mat_file))
        arm = get("compensator.arm", "signal")
        model = get("compensator.model", "full")
        raw = get("compensator.thickness_mm").strip().lower()
        if raw == "auto":
            from .visibility import design_compensator

            auto = True
            comp = wrap("compensator.thickness_mm", lambda: design_compensator(source, plate, arm=arm, model=model))
        else:
            try:
                thickness = float(raw)
            except ValueError:
                raise ConfigError(
                    f"expected a number or 'auto', got '{raw}'",
                    key="compensator.thickness_mm",
                    line=entries["compensator.thickness_mm"][1],
                ) from None
            axis = "vertical" if arm == "signal" else "horizontal"
            comp = wrap("compensator.thickness_mm",
                        lambda: CompensatorSpec(plate, thickness, arm=arm, axis=axis, model=model))
    elif any(k.startswith("compensator.") for k in entries):
        raise ConfigError("compensator settings given without compensator.thickness_mm",
                          key="compensator.thickness_mm")

    grid = None
    if any(k.startswith("grid.") for k in entries):
        points = get("grid.points")
        if points is not None and (points < 3 or points % 2 == 0):
            raise ConfigError("grid.points must be an odd integer >= 3", key="grid.points",
                              line=entries["grid.points"][1])
        grid = GridSpec(get("grid.half_width_rad_per_fs"), points, get("grid.lobes"))
    return RunConfig(source, filt, comp, grid, auto, mat_file)


def loads(text):
    return _build(parse_text(text))


def load(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    return loads(text)


def dumps(run):
    """Serialize a RunConfig back to config text."""
    s = run.source
    lines = [
        f"source.material = {s.medium.name}",
        f"source.crystal_length_mm = {s.crystal_length_mm!r}",
        f"source.pump_nm = {s.pump_nm!r}",
        f"source.signal_nm = {s.signal_nm!r}",
        f"source.idler_nm = {s.idler_nm!r}",
        f"source.pump_balance = {s.pump_balance!r}",
        f"source.pump_phase_rad = {s.pump_phase!r}",
        f"source.extraordinary_model = {s.extraordinary_model}",
    ]
    if run.materials_file is not None:
        lines.append(f"materials.file = {run.materials_file}")
    if run.filter is not None:
        f = run.filter
        lines.append(f"filter.bandwidth_nm = {f.bandwidth_nm!r}")
        lines.append(f"filter.convention = {f.convention}")
        if f.signal_center_nm is not None:
            lines.append(f"filter.signal_center_nm = {f.signal_center_nm!r}")
        if f.idler_center_nm is not None:
            lines.append(f"filter.idler_center_nm = {f.idler_center_nm!r}")
    if run.compensator is not None:
        c = run.compensator
        lines.append(f"compensator.material = {c.medium.name}")
        lines.append("compensator.thickness_mm = " + ("auto" if run.auto_compensator else repr(c.thickness_mm)))
        lines.append(f"compensator.arm = {c.arm}")
        lines.append(f"compensator.model = {c.model}")
    if run.grid is not None:
        g = run.grid
        if g.points is not None:
            lines.append(f"grid.points = {g.points}")
        if g.lobes is not None:
            lines.append(f"grid.lobes = {g.lobes!r}")
        if g.half_width is not None:
            lines.append(f"grid.half_width_rad_per_fs = {g.half_width!r}")
    return "\n".join(lines) + "\n"
