"""Orchestration: turn a validated RunConfig into result payloads.

Each run_* function is a pure request -> JSON-able dict transform; the HTTP
layer and the CLI both call these. Payloads embed the fully resolved
configuration, and floats that failed to solve appear as null (never NaN,
which strict JSON rejects).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import analytics, detect, discriminator, params, sweep
from .config import RunConfig, resolved_dict
from .params import TWO_PI
from .steadystate import auto_truncate


@dataclass(frozen=True)
class System:
    """Physical objects resolved from a config's boundary-unit fields."""

    atom: params.AtomSpec
    geometry: params.CavityGeometry
    cavity: params.DerivedCavity
    detector: detect.DetectorModel
    g0_override: float | None
    tau: float          # s
    flux_in: float      # photons/s
    delta: float        # rad/s
    theta: float        # rad/s


def build_system(cfg: RunConfig) -> System:
    c = cfg.cavity
    atom = params.AtomSpec(
        wavelength=c.wavelength_nm * 1e-9,
        gamma=TWO_PI * c.gamma_mhz * 1e6,
    )
    geometry = params.CavityGeometry(
        length=c.length_um * 1e-6,
        waist=c.waist_um * 1e-6,
        finesse=c.finesse,
        kind=c.geometry,
        f_in=c.f_in,
        f_out=c.f_out,
        f_loss=c.f_loss,
    )
    g0_override = TWO_PI * c.g0_mhz * 1e6 if c.g0_mhz is not None else None
    cavity = params.derive_cavity(geometry, atom, g0_override)
    det = detect.DetectorModel(
        kind=cfg.detector.kind,
        eta=cfg.detector.resolved_eta(),
        saturation_flux=cfg.detector.resolved_saturation_per_s(),
    )
    op = cfg.operating
    return System(
        atom=atom,
        geometry=geometry,
        cavity=cavity,
        detector=det,
        g0_override=g0_override,
        tau=op.tau_us * 1e-6,
        flux_in=op.flux * 1e6,
        delta=op.delta_kappa * cavity.kappa,
        theta=op.theta_gamma * atom.gamma,
    )


def _clean(value):
    """NaN/inf -> None so payloads stay strict-JSON serializable."""
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, list):
        return [_clean(v) for v in value]
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    return value


def run_derive(cfg: RunConfig) -> dict:
    """Derived rates and coupling-regime numbers for the configured cavity."""
    sysd = build_system(cfg)
    cav = sysd.cavity
    regime = params.critical_numbers(cav.g0, sysd.atom.gamma, cav.kappa)
    g0_formula = params.derive_cavity(sysd.geometry, sysd.atom, None).g0
    return {
        "kappa_rad_s": cav.kappa,
        "kappa_over_2pi_mhz": cav.kappa / TWO_PI / 1e6,
        "fwhm_rad_s": 2.0 * cav.kappa,
        "kappa_in_rad_s": cav.kappa_in,
        "kappa_out_rad_s": cav.kappa_out,
        "kappa_loss_rad_s": cav.kappa_loss,
        "out_photon_rate_per_s": cav.out_photon_rate,
        "fsr_rad_s": cav.fsr,
        "mode_volume_m3": cav.mode_volume,
        "g0_rad_s": cav.g0,
        "g0_over_2pi_mhz": cav.g0 / TWO_PI / 1e6,
        "g0_formula_rad_s": g0_formula,
        "m0": regime.m0,
        "N0": regime.N0,
        "cooperativity": regime.cooperativity,
        "gamma_rad_s": sysd.atom.gamma,
        "config": resolved_dict(cfg),
    }


SPECTRUM_COLUMNS = ["delta_over_kappa", "theta_over_gamma", "transmission",
                    "phase_rad", "n_photons", "valid"]


def run_spectrum(cfg: RunConfig) -> dict:
    """Solved transmission spectrum over the configured probe scan."""
    sysd = build_system(cfg)
    sp = cfg.spectrum
    half = TWO_PI * sp.half_span_mhz * 1e6
    deltas = np.linspace(-half, half, sp.points)
    curve = analytics.transmission_spectrum(
        sysd.cavity, sysd.atom.gamma, sysd.flux_in, deltas,
        with_atom=sp.with_atom,
        atom_offset=TWO_PI * sp.atom_offset_mhz * 1e6,
        tol=cfg.solver.tol,
        m_cap=cfg.solver.m_cap,
    )
    rows = []
    for i in range(deltas.size):
        rows.append(_clean([
            float(curve.deltas[i] / sysd.cavity.kappa),
            float(curve.thetas[i] / sysd.atom.gamma),
            float(curve.transmission[i]),
            float(curve.phase[i]),
            float(curve.n_photons[i]),
            int(curve.valid[i]),
        ]))
    invalid_fraction = 1.0 - curve.valid.sum() / curve.valid.size
    return {
        "columns": SPECTRUM_COLUMNS,
        "rows": rows,
        "n0_peak": curve.n0_peak,
        "warning": bool(invalid_fraction > sweep.WARNING_INVALID_FRACTION),
        "invalid_fraction": float(invalid_fraction),
        "config": resolved_dict(cfg),
    }


def _grid_spec(cfg: RunConfig, sysd: System) -> sweep.GridSpec:
    axes = []
    for ax in cfg.sweep.axes:
        scale = ax.resolved_scale()
        builder = sweep.Axis.log if scale == "log" else sweep.Axis.linear
        axes.append(builder(ax.name, ax.start, ax.stop, ax.num))
    fixed = {
        "finesse": cfg.cavity.finesse,
        "flux": cfg.operating.flux,
        "delta": cfg.operating.delta_kappa,
        "theta": cfg.operating.theta_gamma,
    }
    for ax in axes:
        fixed.pop(ax.name, None)
    return sweep.GridSpec(
        axes=tuple(axes),
        geometry=sysd.geometry,
        atom=sysd.atom,
        detector=sysd.detector,
        tau=sysd.tau,
        g0_override=sysd.g0_override,
        fixed=fixed,
        tol=cfg.solver.tol,
        m_cap=cfg.solver.m_cap,
        verify_doubling=cfg.solver.verify_doubling,
    )


def run_sweep(cfg: RunConfig) -> dict:
    """Grid sweep of SNR over the configured axes."""
    result = _sweep_result(cfg)
    return _clean(result.to_payload())


def _sweep_result(cfg: RunConfig) -> sweep.SweepResult:
    sysd = build_system(cfg)
    spec = _grid_spec(cfg, sysd)
    return sweep.run_grid(spec, workers=cfg.solver.workers,
                          config_echo=resolved_dict(cfg))


def run_ridge(cfg: RunConfig) -> dict:
    """Sweep plus the per-row optimum trace along the inner axis."""
    result = _sweep_result(cfg)
    trace = sweep.ridge_max(result, inner=cfg.sweep.ridge_inner,
                            objective=cfg.sweep.objective)
    payload = result.to_payload()
    payload["ridge"] = {
        "outer_name": trace.outer_name,
        "outer_values": trace.outer_values.tolist(),
        "inner_name": trace.inner_name,
        "argmax_inner": trace.argmax_inner.tolist(),
        "refined_inner": trace.refined_inner.tolist(),
        "max_objective": trace.max_objective.tolist(),
        "gap": trace.gap.astype(int).tolist(),
    }
    return _clean(payload)


def run_discriminator(cfg: RunConfig) -> dict:
    """QE / false-count curves and the p-sigma threshold for the operating point.

    Mean counts come from the configured operating point unless both are
    overridden. An unseparable pair still returns the full curves, with the
    separation failure reported instead of a chosen threshold.
    """
    d = cfg.discriminator
    if d.n_empty is not None and d.n_transit is not None:
        n_empty, n_transit = d.n_empty, d.n_transit
    else:
        sysd = build_system(cfg)
        op = detect.OperatingPoint(delta=sysd.delta, theta=sysd.theta,
                                   flux_in=sysd.flux_in, tau=sysd.tau)
        r = detect.evaluate_point(op, sysd.cavity, sysd.atom.gamma, sysd.detector,
                                  tol=cfg.solver.tol, m_cap=cfg.solver.m_cap)
        n_empty, n_transit = r.counts_empty, r.counts_atom

    if d.polarity == "auto":
        model = discriminator.CountModel.from_counts(n_empty, n_transit)
    else:
        model = discriminator.CountModel(n_empty, n_transit, d.polarity)
    curve = discriminator.qe_false_curves(model)
    payload = {
        "n_empty": model.n_empty,
        "n_transit": model.n_transit,
        "polarity": model.polarity,
        "snr": model.snr,
        "p_sigma": d.p_sigma,
        "min_snr": discriminator.min_snr_for_sigma(d.p_sigma),
        "thresholds": curve.thresholds.tolist(),
        "qe": curve.qe.tolist(),
        "false_rate": curve.false_rate.tolist(),
        "chosen": None,
        "separation_error": None,
        "config": resolved_dict(cfg),
    }
    try:
        choice = discriminator.choose_threshold(model, d.p_sigma)
        payload["chosen"] = {
            "threshold": choice.threshold,
            "qe": choice.qe,
            "false_rate": choice.false_rate,
            "interval": list(choice.interval),
        }
    except discriminator.SeparationError as exc:
        payload["separation_error"] = str(exc)
    return _clean(payload)


COMPARE_COLUMNS = ["flux_per_us", "s_ideal", "s_apd", "apd_saturated",
                   "s_het_ideal", "s_het_095", "valid"]


def run_compare_detectors(cfg: RunConfig) -> dict:
    """SNR versus flux for the standard detector line-up, one solve per flux.

    The steady states do not depend on the detector, so each flux is solved
    once and the counting/heterodyne statistics are evaluated for: an ideal
    counter, an APD (eta 0.5, 20 photons/us saturation), and heterodyne at
    unit and 95% efficiency. The APD column is flagged saturated wherever
    the incident flux exceeds its limit.
    """
    sysd = build_system(cfg)
    cav = sysd.cavity
    apd = detect.DetectorModel.apd()
    fluxes = np.logspace(np.log10(cfg.compare.flux_start),
                         np.log10(cfg.compare.flux_stop), cfg.compare.points)
    rows = []
    for flux in fluxes:
        flux_in = float(flux) * 1e6
        eps = detect.calibrate_drive(flux_in, cav)
        try:
            empty = auto_truncate(sysd.delta, sysd.theta, 0.0, eps, cav.kappa,
                                  sysd.atom.gamma, tol=cfg.solver.tol,
                                  m_cap=cfg.solver.m_cap, flux_hint=flux_in)
            atom = auto_truncate(sysd.delta, sysd.theta, cav.g0, eps, cav.kappa,
                                 sysd.atom.gamma, tol=cfg.solver.tol,
                                 m_cap=cfg.solver.m_cap, flux_hint=flux_in)
        except Exception:
            rows.append([float(flux), None, None, 0, None, None, 0])
            continue
        n0, n = empty.observables.n, atom.observables.n
        amp2 = abs(atom.observables.amp) ** 2
        amp0_sq = abs(empty.observables.amp) ** 2
        out_rate = cav.out_photon_rate
        _, _, s_ideal = detect.direct_snr(n, n0, out_rate, sysd.tau, 1.0)
        _, _, s_apd = detect.direct_snr(n, n0, out_rate, sysd.tau, apd.eta)
        saturated = max(n, n0) * out_rate > apd.saturation_flux
        s_het_1 = detect.heterodyne_snr(amp2, amp0_sq, out_rate, sysd.tau, 1.0)
        s_het_95 = detect.heterodyne_snr(amp2, amp0_sq, out_rate, sysd.tau, 0.95)
        rows.append(_clean([float(flux), s_ideal, s_apd, int(saturated),
                            s_het_1, s_het_95, 1]))
    return {
        "columns": COMPARE_COLUMNS,
        "rows": rows,
        "config": resolved_dict(cfg),
    }
