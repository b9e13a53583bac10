"""Grid sweeps of detection SNR over finesse, flux, and detunings.

Axes carry boundary units (finesse, photons/us, delta in units of kappa,
theta in units of gamma); conversion to angular rates happens per point at
evaluation time. Points are embarrassingly parallel; results are written
back positionally so the output tensors are bit-identical for any worker
count. Per-point failures (capacity, solver) mark the point invalid and
never abort the sweep.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Iterable, Mapping

import numpy as np

from .detect import DetectorModel, OperatingPoint, SNRResult, evaluate_point
from .hilbert import CapacityError
from .params import AtomSpec, CavityGeometry, derive_cavity
from .steadystate import DEFAULT_M_CAP, DEFAULT_TOL, SolverError

WORKERS_ENV = "CAVISNR_WORKERS"
AXIS_NAMES = ("finesse", "flux", "delta", "theta")
WARNING_INVALID_FRACTION = 0.2


def resolve_workers(workers: int | None) -> int:
    """Explicit argument, else the CAVISNR_WORKERS env var, else all cores."""
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class Axis:
    """One swept coordinate, with its values in boundary units."""

    name: str
    values: np.ndarray
    scale: str = "linear"  # "log" | "linear"; informs refinement, not spacing

    def __post_init__(self) -> None:
        if self.name not in AXIS_NAMES:
            raise ValueError(f"axis name must be one of {AXIS_NAMES}, got {self.name!r}")
        if self.scale not in ("log", "linear"):
            raise ValueError(f"axis scale must be 'log' or 'linear', got {self.scale!r}")
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 1:
            raise ValueError(f"axis {self.name!r} needs a 1-d, nonempty value array")
        object.__setattr__(self, "values", values)

    @classmethod
    def log(cls, name: str, start: float, stop: float, num: int) -> "Axis":
        return cls(name, np.logspace(np.log10(start), np.log10(stop), num), "log")

    @classmethod
    def linear(cls, name: str, start: float, stop: float, num: int) -> "Axis":
        return cls(name, np.linspace(start, stop, num), "linear")


@dataclass(frozen=True)
class GridSpec:
    """What to sweep and what to hold fixed.

    fixed supplies {flux (photons/us), delta (units of kappa), theta (units
    of gamma), finesse} for whatever the axes do not cover.
    """

    axes: tuple[Axis, ...]
    geometry: CavityGeometry
    atom: AtomSpec
    detector: DetectorModel
    tau: float
    g0_override: float | None = None
    fixed: Mapping[str, float] = field(default_factory=dict)
    tol: float = DEFAULT_TOL
    m_cap: int = DEFAULT_M_CAP
    verify_doubling: bool = False

    def __post_init__(self) -> None:
        if not 1 <= len(self.axes) <= 2:
            raise ValueError(f"1 or 2 swept axes supported, got {len(self.axes)}")
        names = [ax.name for ax in self.axes]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate axis {names!r}")
        for key in self.fixed:
            if key not in AXIS_NAMES:
                raise ValueError(f"unknown fixed parameter {key!r}")
        if self.tau <= 0.0:
            raise ValueError(f"tau must be positive, got {self.tau!r}")

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(ax.values.size for ax in self.axes)

    def coords(self, flat_index: int) -> dict[str, float]:
        """Axis-name -> value mapping of one grid point (row-major)."""
        idx = np.unravel_index(flat_index, self.shape)
        out = dict(self.fixed)
        for ax, i in zip(self.axes, idx):
            out[ax.name] = float(ax.values[i])
        return out


_FIELDS = ("snr", "snr_het", "n", "n0", "counts_atom", "counts_empty", "incident_flux")


def _eval_cell(job: tuple) -> tuple[int, dict | str]:
    """Evaluate one grid point; module-level so process pools can pickle it."""
    (i, geometry, atom, g0_override, detector, tau, tol, m_cap, verify, merged) = job
    finesse = merged.get("finesse", geometry.finesse)
    geom = replace(geometry, finesse=finesse)
    cavity = derive_cavity(geom, atom, g0_override)
    op = OperatingPoint(
        delta=merged.get("delta", 0.0) * cavity.kappa,
        theta=merged.get("theta", 0.0) * atom.gamma,
        flux_in=merged["flux"] * 1e6,
        tau=tau,
    )
    try:
        r: SNRResult = evaluate_point(
            op, cavity, atom.gamma, detector,
            tol=tol, m_cap=m_cap, verify_doubling=verify,
        )
    except (CapacityError, SolverError) as exc:
        return i, f"{type(exc).__name__}: {exc}"
    payload = {name: getattr(r, name) for name in _FIELDS}
    payload["m"] = r.m
    payload["apd_saturated"] = r.apd_saturated
    payload["truncation_ok"] = r.truncation_ok
    return i, payload


@dataclass
class SweepResult:
    """Dense result tensors over the configured axes, with validity flags."""

    axes: tuple[Axis, ...]
    tensors: dict[str, np.ndarray]     # float fields, NaN where invalid
    m: np.ndarray                      # int, -1 where invalid
    valid: np.ndarray                  # bool
    saturated: np.ndarray              # bool
    truncation_ok: np.ndarray          # bool
    errors: dict[int, str]
    provenance: dict
    warning: bool
    invalid_fraction: float

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(ax.values.size for ax in self.axes)

    def axis_index(self, name: str) -> int:
        for i, ax in enumerate(self.axes):
            if ax.name == name:
                return i
        raise KeyError(f"no axis named {name!r}")

    def to_payload(self) -> dict:
        """JSON-ready dict: axes, row-major tensors, flags, provenance."""
        return {
            "axes": [
                {"name": ax.name, "scale": ax.scale, "values": ax.values.tolist()}
                for ax in self.axes
            ],
            "shape": list(self.shape),
            "tensors": {k: v.ravel().tolist() for k, v in self.tensors.items()},
            "m": self.m.ravel().tolist(),
            "valid": self.valid.ravel().astype(int).tolist(),
            "apd_saturated": self.saturated.ravel().astype(int).tolist(),
            "truncation_ok": self.truncation_ok.ravel().astype(int).tolist(),
            "errors": {str(k): v for k, v in sorted(self.errors.items())},
            "warning": self.warning,
            "invalid_fraction": self.invalid_fraction,
            "provenance": self.provenance,
        }


def run_grid(
    spec: GridSpec,
    *,
    workers: int | None = None,
    config_echo: dict | None = None,
) -> SweepResult:
    """Evaluate every grid point and assemble result tensors.

    Output tensors depend only on the spec, never on worker count or
    completion order: each point is computed independently and written into
    its own slot.
    """
    shape = spec.shape
    total = int(np.prod(shape))
    jobs = [
        (i, spec.geometry, spec.atom, spec.g0_override, spec.detector, spec.tau,
         spec.tol, spec.m_cap, spec.verify_doubling, spec.coords(i))
        for i in range(total)
    ]
    n_workers = resolve_workers(workers)
    if n_workers <= 1 or total <= 1:
        results: Iterable[tuple[int, dict | str]] = map(_eval_cell, jobs)
    else:
        chunk = max(1, total // (4 * n_workers))
        pool = ProcessPoolExecutor(max_workers=n_workers)
        try:
            results = list(pool.map(_eval_cell, jobs, chunksize=chunk))
        finally:
            pool.shutdown()

    tensors = {name: np.full(total, np.nan) for name in _FIELDS}
    m_arr = np.full(total, -1, dtype=int)
    valid = np.zeros(total, dtype=bool)
    saturated = np.zeros(total, dtype=bool)
    trunc_ok = np.zeros(total, dtype=bool)
    errors: dict[int, str] = {}
    for i, payload in results:
        if isinstance(payload, str):
            errors[i] = payload
            continue
        for name in _FIELDS:
            tensors[name][i] = payload[name]
        m_arr[i] = payload["m"]
        valid[i] = True
        saturated[i] = payload["apd_saturated"]
        trunc_ok[i] = payload["truncation_ok"]

    invalid_fraction = float(1.0 - valid.sum() / total) if total else 0.0
    provenance = {
        "config": config_echo or {},
        "version": _package_version(),
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "workers": n_workers,
    }
    return SweepResult(
        axes=spec.axes,
        tensors={k: v.reshape(shape) for k, v in tensors.items()},
        m=m_arr.reshape(shape),
        valid=valid.reshape(shape),
        saturated=saturated.reshape(shape),
        truncation_ok=trunc_ok.reshape(shape),
        errors=errors,
        provenance=provenance,
        warning=bool(invalid_fraction > WARNING_INVALID_FRACTION),
        invalid_fraction=invalid_fraction,
    )


def _package_version() -> str:
    from . import __version__
    return __version__


def usable_mask(result: SweepResult) -> np.ndarray:
    """Points that may enter optima: solved, converged, not saturated."""
    return result.valid & result.truncation_ok & ~result.saturated


def _objective_tensor(result: SweepResult, objective: str) -> np.ndarray:
    snr = result.tensors["snr"]
    if objective == "snr":
        return snr
    if objective == "abs_snr":
        return np.abs(snr)
    if objective == "snr_het":
        return result.tensors["snr_het"]
    raise ValueError(f"unknown objective {objective!r}")


@dataclass(frozen=True)
class RidgeTrace:
    """Per-row optimum of the inner axis: the crest of the SNR landscape."""

    outer_name: str
    outer_values: np.ndarray
    inner_name: str
    argmax_inner: np.ndarray    # discrete inner-axis value at the row max; NaN for gaps
    refined_inner: np.ndarray   # quadratic-vertex refinement of the same
    max_objective: np.ndarray   # sampled row maximum; NaN for gaps
    gap: np.ndarray             # rows with no usable point


def ridge_max(result: SweepResult, inner: str = "flux", objective: str = "snr") -> RidgeTrace:
    """Trace the inner-axis optimum across the outer axis.

    The discrete argmax (ties toward lower values) is refined by the vertex
    of a quadratic through the three bracketing samples — in log coordinates
    for log axes — except at row boundaries, where the discrete argmax
    stands. Rows with no usable point become gaps.
    """
    if len(result.axes) != 2:
        raise ValueError("ridge tracing needs a 2-axis sweep")
    inner_idx = result.axis_index(inner)
    outer_idx = 1 - inner_idx
    inner_ax = result.axes[inner_idx]
    outer_ax = result.axes[outer_idx]
    if inner_ax.values.size < 3:
        raise ValueError(f"inner axis {inner!r} needs at least 3 points for a ridge")

    obj = _objective_tensor(result, objective)
    mask = usable_mask(result)
    if inner_idx == 0:  # orient rows = outer
        obj = obj.T
        mask = mask.T

    x = inner_ax.values
    coords = np.log10(x) if inner_ax.scale == "log" else x
    n_rows = outer_ax.values.size
    argmax = np.full(n_rows, np.nan)
    refined = np.full(n_rows, np.nan)
    row_max = np.full(n_rows, np.nan)
    gap = np.zeros(n_rows, dtype=bool)

    for r in range(n_rows):
        row = np.where(mask[r], obj[r], -np.inf)
        if not np.isfinite(row).any():
            gap[r] = True
            continue
        i = int(np.argmax(row))  # first occurrence = lower flux on ties
        argmax[r] = x[i]
        row_max[r] = obj[r, i]
        refined[r] = x[i]
        if 0 < i < x.size - 1 and mask[r, i - 1] and mask[r, i + 1]:
            c = np.polyfit(coords[i - 1:i + 2], obj[r, i - 1:i + 2], 2)
            if c[0] < 0.0:  # concave bracket; otherwise keep the sample
                vertex = float(np.clip(-c[1] / (2.0 * c[0]), coords[i - 1], coords[i + 1]))
                refined[r] = 10.0 ** vertex if inner_ax.scale == "log" else vertex

    return RidgeTrace(
        outer_name=outer_ax.name,
        outer_values=outer_ax.values,
        inner_name=inner,
        argmax_inner=argmax,
        refined_inner=refined,
        max_objective=row_max,
        gap=gap,
    )


@dataclass(frozen=True)
class Optimum:
    """Location and statistics of the best usable grid point."""

    coords: dict[str, float]
    index: tuple[int, ...]
    objective: str
    value: float          # objective value at the optimum
    point: dict[str, float]  # all tensor fields at the optimum


def find_optimum(
    result: SweepResult,
    *,
    objective: str = "snr",
    region: Mapping[str, tuple[float, float]] | None = None,
) -> Optimum:
    """Global maximum of the objective over usable points, optionally windowed.

    region maps axis names to inclusive (lo, hi) bounds. Raises ValueError
    when no usable point remains.
    """
    obj = _objective_tensor(result, objective)
    mask = usable_mask(result).copy()
    if region:
        for name, (lo, hi) in region.items():
            ax_i = result.axis_index(name)
            vals = result.axes[ax_i].values
            sel = (vals >= lo) & (vals <= hi)
            shape = [1] * len(result.axes)
            shape[ax_i] = vals.size
            mask &= sel.reshape(shape)
    if not mask.any():
        raise ValueError("no valid, unsaturated grid point in the requested region")
    masked = np.where(mask, obj, -np.inf)
    flat = int(np.argmax(masked))
    index = np.unravel_index(flat, obj.shape)
    coords = {ax.name: float(ax.values[i]) for ax, i in zip(result.axes, index)}
    point = {name: float(result.tensors[name][index]) for name in result.tensors}
    point["m"] = int(result.m[index])
    return Optimum(
        coords=coords,
        index=tuple(int(i) for i in index),
        objective=objective,
        value=float(obj[index]),
        point=point,
    )
