"""HTTP service: one POST endpoint per operation, RunConfig in, results out.

The CLI uses the same service functions in-process; this module only adds
the transport. Validation errors map to 422, physics/capacity errors to 400.
"""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from . import service
from .config import ConfigError, RunConfig
from .hilbert import CapacityError
from .params import ParameterError
from .steadystate import SolverError


class DeriveResponse(BaseModel):
    kappa_rad_s: float
    kappa_over_2pi_mhz: float
    fwhm_rad_s: float
    kappa_in_rad_s: float
    kappa_out_rad_s: float
    kappa_loss_rad_s: float
    out_photon_rate_per_s: float
    fsr_rad_s: float
    mode_volume_m3: float
    g0_rad_s: float
    g0_over_2pi_mhz: float
    g0_formula_rad_s: float
    m0: float
    N0: float
    cooperativity: float
    gamma_rad_s: float
    config: dict


class SpectrumResponse(BaseModel):
    columns: list[str]
    rows: list[list[Optional[float]]]
    n0_peak: float
    warning: bool
    invalid_fraction: float
    config: dict


class SweepResponse(BaseModel):
    axes: list[dict]
    shape: list[int]
    tensors: dict[str, list[Optional[float]]]
    m: list[int]
    valid: list[int]
    apd_saturated: list[int]
    truncation_ok: list[int]
    errors: dict[str, str]
    warning: bool
    invalid_fraction: float
    provenance: dict


class RidgeResponse(SweepResponse):
    ridge: dict


class DiscriminatorResponse(BaseModel):
    n_empty: float
    n_transit: float
    polarity: str
    snr: float
    p_sigma: float
    min_snr: float
    thresholds: list[int]
    qe: list[float]
    false_rate: list[float]
    chosen: Optional[dict]
    separation_error: Optional[str]
    config: dict


class CompareResponse(BaseModel):
    columns: list[str]
    rows: list[list[Optional[float]]]
    config: dict


class HealthResponse(BaseModel):
    status: str
    version: str


def create_app() -> FastAPI:
    from . import __version__

    app = FastAPI(
        title="cavisnr",
        version=__version__,
        description="Steady-state cavity-QED single-atom detection SNR service",
    )

    def guarded(fn, cfg: RunConfig):
        try:
            return fn(cfg)
        except ConfigError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except (ParameterError, CapacityError, SolverError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/derive", response_model=DeriveResponse)
    def derive(cfg: RunConfig) -> dict:
        return guarded(service.run_derive, cfg)

    @app.post("/spectrum", response_model=SpectrumResponse)
    def spectrum(cfg: RunConfig) -> dict:
        return guarded(service.run_spectrum, cfg)

    @app.post("/sweep", response_model=SweepResponse)
    def sweep(cfg: RunConfig) -> dict:
        return guarded(service.run_sweep, cfg)

    @app.post("/ridge", response_model=RidgeResponse)
    def ridge(cfg: RunConfig) -> dict:
        return guarded(service.run_ridge, cfg)

    @app.post("/discriminator", response_model=DiscriminatorResponse)
    def discriminator(cfg: RunConfig) -> dict:
        return guarded(service.run_discriminator, cfg)

    @app.post("/compare-detectors", response_model=CompareResponse)
    def compare_detectors(cfg: RunConfig) -> dict:
        return guarded(service.run_compare_detectors, cfg)

    return app


app = create_app()
