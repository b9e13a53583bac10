"""Closed-form companions to the numerical solver.

Dressed-level energies, the intensity-dependent detuning of the driven
ladder, a linear-response oracle for the weak-drive limit, a classical
saturable-absorber picture, solved transmission spectra, and the
frequency-noise susceptibility of an operating point on such a spectrum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import DerivedCavity, ParameterError
from .steadystate import DEFAULT_M_CAP, DEFAULT_TOL, auto_truncate
from .hilbert import CapacityError
from .detect import calibrate_drive, empty_cavity_n


def dressed_energies(n: int, g: float, delta: float, theta: float) -> tuple[float, float]:
    """Energies of the dressed pair |n,+> and |n,->, as offsets (rad/s).

    The n-excitation manifold splits by +-(1/2)*sqrt(4 g^2 n + (delta-theta)^2)
    about its mean; offsets are reported relative to that mean, so the two
    branches are symmetric about zero. Requires n >= 1 (the ground state has
    no partner).
    """
    if n < 1:
        raise ParameterError(f"dressed branches exist only for n >= 1, got n={n}")
    split = 0.5 * math.sqrt(4.0 * g * g * n + (delta - theta) ** 2)
    return split, -split


def probe_detuning_shift(n: int, g: float) -> float:
    """Detuning of the (n -> n+1) ladder step from the bare cavity: g*(sqrt(n+1)-sqrt(n)).

    Decreases monotonically from g at n=0 toward g/(2*sqrt(n)); the ladder
    becomes harmonic again at high photon number. Returned as a magnitude;
    the physical shift is +- this value depending on the branch.
    """
    if n < 0:
        raise ParameterError(f"photon number must be nonnegative, got {n}")
    return g * (math.sqrt(n + 1.0) - math.sqrt(n))


def weak_drive_amplitude(eps: float, delta: float, theta: float, g: float,
                         kappa: float, gamma: float) -> complex:
    """Linear-response field amplitude with the atom adiabatically eliminated.

    <a> = -i*eps*(gamma/2 + i*theta) / ((kappa + i*delta)*(gamma/2 + i*theta) + g^2)

    Exact for the empty cavity (g=0) and accurate to O(n) corrections
    otherwise; serves as the solver oracle in the n << 1 regime.
    """
    atom = 0.5 * gamma + 1j * theta
    return -1j * eps * atom / ((kappa + 1j * delta) * atom + g * g)


def saturable_absorber(i_rel: float, sigma0: float, flux: float, area: float) -> tuple[float, float]:
    """Classical saturable-absorber picture of the intracavity atom.

    Effective cross-section sigma = sigma0/(1 + I/I_sat) (i_rel = I/I_sat)
    and scattering ratio s = flux*sigma/area. Intuition aid only; never used
    inside the SNR computation.
    """
    if i_rel < 0.0:
        raise ParameterError(f"I/I_sat must be nonnegative, got {i_rel!r}")
    if area <= 0.0:
        raise ParameterError(f"area must be positive, got {area!r}")
    sigma = sigma0 / (1.0 + i_rel)
    return sigma, flux * sigma / area


@dataclass(frozen=True)
class SpectrumContext:
    """Everything needed to re-solve points of a spectrum scan."""

    cavity: DerivedCavity
    gamma: float
    flux_in: float
    with_atom: bool
    atom_offset: float   # omega_a - omega_c, rad/s
    g: float
    tol: float
    m_cap: int


@dataclass(frozen=True)
class SpectrumCurve:
    """Solved transmission spectrum over a probe-detuning scan.

    transmission is n/n0_peak with n0_peak = eps^2/kappa^2, the resonant
    empty-cavity photon number; the empty-cavity curve is then a Lorentzian
    of FWHM 2*kappa peaking at 1.
    """

    deltas: np.ndarray        # cavity-probe detuning along the scan, rad/s
    thetas: np.ndarray        # atom-probe detuning along the scan, rad/s
    transmission: np.ndarray
    phase: np.ndarray         # arg <a>, rad
    n_photons: np.ndarray
    valid: np.ndarray         # bool per point
    n0_peak: float
    context: SpectrumContext | None = None


def _solve_spectrum_point(ctx: SpectrumContext, delta: float) -> tuple[float, float, float]:
    """(n, |a| phase, unused) at one probe detuning; raises on solver failure."""
    eps = calibrate_drive(ctx.flux_in, ctx.cavity)
    theta = delta + ctx.atom_offset
    g = ctx.g if ctx.with_atom else 0.0
    sol = auto_truncate(delta, theta, g, eps, ctx.cavity.kappa, ctx.gamma,
                        tol=ctx.tol, m_cap=ctx.m_cap, flux_hint=ctx.flux_in)
    amp = sol.observables.amp
    return sol.observables.n, math.atan2(amp.imag, amp.real), 0.0


def transmission_spectrum(
    cavity: DerivedCavity,
    gamma: float,
    flux_in: float,
    deltas: np.ndarray,
    *,
    with_atom: bool = True,
    atom_offset: float = 0.0,
    g: float | None = None,
    tol: float = DEFAULT_TOL,
    m_cap: int = DEFAULT_M_CAP,
) -> SpectrumCurve:
    """Steady-state transmission versus probe detuning at fixed input power.

    The probe frequency is scanned with the cavity and atom fixed, so theta
    tracks delta: theta = delta + (omega_a - omega_c). Solver failures mark
    individual points invalid rather than aborting the scan.
    """
    deltas = np.asarray(deltas, dtype=float)
    eps = calibrate_drive(flux_in, cavity)
    n0_peak = empty_cavity_n(eps, cavity.kappa, 0.0)
    ctx = SpectrumContext(
        cavity=cavity, gamma=gamma, flux_in=flux_in, with_atom=with_atom,
        atom_offset=atom_offset, g=cavity.g0 if g is None else g,
        tol=tol, m_cap=m_cap,
    )
    npts = deltas.size
    n_arr = np.full(npts, np.nan)
    phase = np.full(npts, np.nan)
    valid = np.zeros(npts, dtype=bool)
    for i, d in enumerate(deltas):
        try:
            n_i, ph_i, _ = _solve_spectrum_point(ctx, float(d))
        except (CapacityError, RuntimeError):
            continue
        n_arr[i] = n_i
        phase[i] = ph_i
        valid[i] = True
    scale = n0_peak if n0_peak > 0.0 else 1.0
    return SpectrumCurve(
        deltas=deltas,
        thetas=deltas + atom_offset,
        transmission=n_arr / scale,
        phase=phase,
        n_photons=n_arr,
        valid=valid,
        n0_peak=n0_peak,
        context=ctx,
    )


@dataclass(frozen=True)
class NoiseReport:
    """Frequency-jitter response at one operating point of a spectrum."""

    fluctuation: float   # |dT/d(delta)| * jitter / T
    shot: float          # 1/sqrt(N_empty)
    ratio: float         # fluctuation / shot; < 1 means sub-shot
    slope: float         # dT/d(delta) at the operating point, 1/(rad/s)
    t_op: float          # transmission at the operating point
    step: float          # finite-difference step at convergence, rad/s


def noise_susceptibility(
    curve: SpectrumCurve,
    delta_op: float,
    jitter: float,
    n_empty_counts: float,
    *,
    rel_tol: float = 0.01,
    max_refinements: int = 12,
) -> NoiseReport:
    """Relative transmission fluctuation caused by probe/cavity frequency jitter.

    fluctuation = |dT/d(delta)| * jitter / T(delta_op), compared against the
    shot-noise fraction 1/sqrt(N_empty) of the reference count. The slope
    uses a centered finite difference re-solved on the curve's context, with
    the step halved until the slope is stable to rel_tol.
    """
    if n_empty_counts <= 0.0:
        raise ParameterError(f"reference count must be positive, got {n_empty_counts!r}")
    lo, hi = float(np.min(curve.deltas)), float(np.max(curve.deltas))
    span = hi - lo
    if not lo + 1e-12 * abs(span) < delta_op < hi - 1e-12 * abs(span):
        raise ParameterError(
            f"operating detuning {delta_op:g} sits at or outside the scan range "
            f"[{lo:g}, {hi:g}]; the slope needs room on both sides")
    shot = 1.0 / math.sqrt(n_empty_counts)
    if curve.context is None:
        raise ParameterError("curve carries no solve context; rebuild it with transmission_spectrum")
    ctx = curve.context
    scale = curve.n0_peak if curve.n0_peak > 0.0 else 1.0

    def t_at(d: float) -> float:
        n, _, _ = _solve_spectrum_point(ctx, d)
        return n / scale

    t_op = t_at(delta_op)
    if t_op <= 0.0:
        raise ParameterError(f"transmission vanishes at delta={delta_op:g}; fluctuation undefined")
    if jitter == 0.0:
        return NoiseReport(0.0, shot, 0.0, 0.0, t_op, 0.0)

    # start from the local grid spacing, stay inside the scan
    spacing = float(np.median(np.diff(np.sort(curve.deltas))))
    h = min(spacing, delta_op - lo, hi - delta_op)
    slope = (t_at(delta_op + h) - t_at(delta_op - h)) / (2.0 * h)
    atol = 1e-12 * t_op / max(h, np.finfo(float).tiny)
    for _ in range(max_refinements):
        h2 = h / 2.0
        slope2 = (t_at(delta_op + h2) - t_at(delta_op - h2)) / (2.0 * h2)
        if abs(slope2 - slope) <= rel_tol * abs(slope2) + atol:
            slope = slope2
            h = h2
            break
        slope, h = slope2, h2

    fluctuation = abs(slope) * abs(jitter) / t_op
    return NoiseReport(
        fluctuation=fluctuation,
        shot=shot,
        ratio=fluctuation / shot,
        slope=slope,
        t_op=t_op,
        step=h,
    )
