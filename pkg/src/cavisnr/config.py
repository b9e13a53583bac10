"""Run configuration: schema, file loading, and dotted-path overrides.

Boundary units match lab conventions: lengths in um, wavelengths in nm,
frequencies and rates in MHz (nu, not angular; converted to rad/s
internally), photon flux in photons/us, times in us. Detunings are
dimensionless multiples of kappa (for delta) and gamma (for theta).
Unknown keys are rejected so typos fail loudly.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError


class ConfigError(ValueError):
    """Configuration file or override did not validate."""

    def __init__(self, message: str, *, details: list[str] | None = None):
        super().__init__(message)
        self.details = details or []


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class CavitySection(_Section):
    length_um: float = Field(100.0, gt=0)
    waist_um: float = Field(20.0, gt=0)
    wavelength_nm: float = Field(780.0, gt=0)
    finesse: float = Field(1e4, gt=0)
    gamma_mhz: float = Field(6.0, gt=0, description="atomic population decay / 2pi")
    g0_mhz: Optional[float] = Field(26.0, description="coupling / 2pi; null derives from geometry")
    geometry: Literal["standing", "travelling"] = "standing"
    f_in: float = Field(0.5, ge=0)
    f_out: float = Field(0.5, ge=0)
    f_loss: float = Field(0.0, ge=0)


class OperatingSection(_Section):
    delta_kappa: float = 0.0           # cavity-probe detuning in units of kappa
    theta_gamma: float = 0.0           # atom-probe detuning in units of gamma
    flux: float = Field(10.0, ge=0)    # input photon flux, photons/us
    tau_us: float = Field(20.0, gt=0)  # measurement window


class DetectorSection(_Section):
    kind: Literal["ideal", "apd", "heterodyne"] = "ideal"
    eta: Optional[float] = Field(None, gt=0, le=1)
    saturation: Optional[float] = Field(None, gt=0, description="photons/us; counters only")

    def resolved_eta(self) -> float:
        if self.eta is not None:
            return self.eta
        return {"ideal": 1.0, "apd": 0.5, "heterodyne": 0.95}[self.kind]

    def resolved_saturation_per_s(self) -> float:
        if self.saturation is not None:
            return self.saturation * 1e6
        return 20e6 if self.kind == "apd" else math.inf


_DEFAULT_SCALES = {"finesse": "log", "flux": "log", "delta": "linear", "theta": "linear"}


class AxisSection(_Section):
    name: Literal["finesse", "flux", "delta", "theta"]
    start: float
    stop: float
    num: int = Field(ge=1)
    scale: Optional[Literal["log", "linear"]] = None

    def resolved_scale(self) -> str:
        return self.scale if self.scale is not None else _DEFAULT_SCALES[self.name]


class SweepSection(_Section):
    axes: list[AxisSection] = Field(
        default_factory=lambda: [AxisSection(name="flux", start=1.0, stop=1e4, num=25)],
        min_length=1, max_length=2,
    )
    objective: Literal["snr", "abs_snr", "snr_het"] = "snr"
    ridge_inner: Literal["finesse", "flux", "delta", "theta"] = "flux"


class SpectrumSection(_Section):
    half_span_mhz: float = Field(150.0, gt=0)  # probe scan reaches +-this, nu units
    points: int = Field(201, ge=3)
    atom_offset_mhz: float = 0.0               # (omega_a - omega_c)/2pi
    with_atom: bool = True


class DiscriminatorSection(_Section):
    p_sigma: float = Field(3.0, gt=0)
    n_empty: Optional[float] = Field(None, ge=0)    # override; else solved
    n_transit: Optional[float] = Field(None, ge=0)
    polarity: Literal["auto", "dip", "peak"] = "auto"


class CompareSection(_Section):
    flux_start: float = Field(1.0, gt=0)   # photons/us
    flux_stop: float = Field(1e4, gt=0)
    points: int = Field(25, ge=2)


class SolverSection(_Section):
    tol: float = Field(1e-8, gt=0, le=1e-2)
    m_cap: int = Field(160, ge=2)
    workers: Optional[int] = Field(None, ge=1)
    verify_doubling: bool = False


class OutputSection(_Section):
    format: Optional[Literal["json", "csv"]] = None  # default depends on subcommand
    path: Optional[str] = None
    precision: int = Field(9, ge=1, le=17)


class RunConfig(_Section):
    cavity: CavitySection = Field(default_factory=CavitySection)
    operating: OperatingSection = Field(default_factory=OperatingSection)
    detector: DetectorSection = Field(default_factory=DetectorSection)
    sweep: SweepSection = Field(default_factory=SweepSection)
    spectrum: SpectrumSection = Field(default_factory=SpectrumSection)
    discriminator: DiscriminatorSection = Field(default_factory=DiscriminatorSection)
    compare: CompareSection = Field(default_factory=CompareSection)
    solver: SolverSection = Field(default_factory=SolverSection)
    output: OutputSection = Field(default_factory=OutputSection)


def _format_errors(exc: ValidationError) -> list[str]:
    out = []
    for err in exc.errors():
        loc = ".".join(str(part) for part in err["loc"]) or "<root>"
        out.append(f"{loc}: {err['msg']}")
    return out


def _validate(data: dict, source: str) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        details = _format_errors(exc)
        raise ConfigError(
            f"invalid configuration ({source}): " + "; ".join(details),
            details=details,
        ) from exc


def load_config(path: str | Path | None) -> RunConfig:
    """Load a YAML or JSON config file; None gives the built-in defaults."""
    if path is None:
        return RunConfig()
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text(encoding="utf-8")
    suffix = path.suffix.lower()
    try:
        if suffix == ".json":
            data = json.loads(text)
        elif suffix in (".yaml", ".yml"):
            data = yaml.safe_load(text)
        else:  # undeclared extension: YAML parses JSON too
            data = yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"config root must be a mapping, got {type(data).__name__}")
    return _validate(data, str(path))


def _coerce(raw: str):
    """Interpret an override value: JSON literal if possible, else a string."""
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def apply_overrides(cfg: RunConfig, assignments: list[str]) -> RunConfig:
    """Apply `section.key=value` overrides (list indices allowed as segments).

    Values parse as JSON literals, falling back to plain strings; the result
    is re-validated as a whole, so unknown paths and type errors surface
    with their field names.
    """
    if not assignments:
        return cfg
    data = cfg.model_dump(mode="json")
    for raw in assignments:
        if "=" not in raw:
            raise ConfigError(f"override must look like section.key=value, got {raw!r}")
        dotted, value = raw.split("=", 1)
        parts = [p for p in dotted.strip().split(".") if p]
        if not parts:
            raise ConfigError(f"override has an empty key path: {raw!r}")
        node = data
        for part in parts[:-1]:
            if isinstance(node, list):
                try:
                    node = node[int(part)]
                except (ValueError, IndexError) as exc:
                    raise ConfigError(f"bad list index {part!r} in override {raw!r}") from exc
            elif isinstance(node, dict):
                node = node.setdefault(part, {})
            else:
                raise ConfigError(f"cannot descend into {part!r} in override {raw!r}")
        leaf = parts[-1]
        if isinstance(node, list):
            try:
                node[int(leaf)] = _coerce(value)
            except (ValueError, IndexError) as exc:
                raise ConfigError(f"bad list index {leaf!r} in override {raw!r}") from exc
        elif isinstance(node, dict):
            node[leaf] = _coerce(value)
        else:
            raise ConfigError(f"cannot assign {leaf!r} in override {raw!r}")
    return _validate(data, "overrides")


def resolved_dict(cfg: RunConfig) -> dict:
    """Fully resolved configuration, embedded in every run output."""
    return cfg.model_dump(mode="json")
