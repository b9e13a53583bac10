"""Detected photon statistics and SNR for counting and heterodyne schemes.

Counting convention: one intracavity photon leaks through the output mirror
at the photon rate 2*kappa_out (energy decays twice as fast as the field),
so the detected count in a window tau is N = eta * n * (2*kappa_out) * tau.
The drive strength is calibrated against the same rate, which makes an
impedance-matched empty cavity transmit exactly the input flux on
resonance, and leaves n0(delta) = eps^2/(kappa^2 + delta^2) for fixed
input power as the probe is scanned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .params import DerivedCavity, ParameterError
from .steadystate import (
    DEFAULT_M_CAP,
    DEFAULT_TOL,
    TruncatedSolution,
    auto_truncate,
)


@dataclass(frozen=True)
class OperatingPoint:
    """Probe detunings, input flux, and measurement window for one evaluation."""

    delta: float          # cavity-probe detuning omega_c - omega_0, rad/s
    theta: float          # atom-probe detuning omega_a - omega_0, rad/s
    flux_in: float        # input photon flux, photons/s
    tau: float            # measurement window, s
    g: float | None = None  # coupling; None means the cavity's maximal g0

    def __post_init__(self) -> None:
        if not self.tau > 0.0:
            raise ParameterError(f"tau must be positive, got {self.tau!r}")
        if self.flux_in < 0.0:
            raise ParameterError(f"flux_in must be nonnegative, got {self.flux_in!r}")


@dataclass(frozen=True)
class DetectorModel:
    """Detector kind, quantum efficiency, and (for counters) saturation flux."""

    kind: str                      # "ideal" | "apd" | "heterodyne"
    eta: float
    saturation_flux: float = math.inf  # incident photons/s; counters only

    def __post_init__(self) -> None:
        if self.kind not in ("ideal", "apd", "heterodyne"):
            raise ParameterError(f"unknown detector kind {self.kind!r}")
        if not 0.0 < self.eta <= 1.0:
            raise ParameterError(f"eta must be in (0, 1], got {self.eta!r}")
        if self.saturation_flux <= 0.0:
            raise ParameterError(f"saturation_flux must be positive, got {self.saturation_flux!r}")

    @classmethod
    def ideal(cls, eta: float = 1.0) -> "DetectorModel":
        return cls("ideal", eta)

    @classmethod
    def apd(cls, eta: float = 0.5, saturation_flux: float = 20e6) -> "DetectorModel":
        """Avalanche photodiode: 50% QE, saturates at 20 incident photons/us."""
        return cls("apd", eta, saturation_flux)

    @classmethod
    def heterodyne(cls, eta: float = 0.95) -> "DetectorModel":
        return cls("heterodyne", eta)


@dataclass(frozen=True)
class SNRResult:
    """Photon statistics and SNR of one operating point, with validity flags."""

    n0: float              # empty-cavity photons
    n: float               # with-atom photons
    amp2: float            # |<a>|^2 with atom
    phase: float           # arg <a> with atom, rad
    counts_empty: float    # N_empty detected in tau
    counts_atom: float     # N detected in tau
    snr: float             # direct counting, (N_empty - N)/sqrt(N_empty + N)
    snr_het: float         # heterodyne
    incident_flux: float   # max(n, n0) * out-photon-rate, photons/s
    apd_saturated: bool
    truncation_ok: bool
    m: int                 # Fock cutoff of the with-atom solve


def calibrate_drive(flux_in: float, cavity: DerivedCavity) -> float:
    """Drive strength eps that injects flux_in through the input mirror.

    eps = kappa * sqrt(flux_in / out_rate) with out_rate the output-mirror
    photon rate; round trip: n0(0) * out_rate = flux_in exactly.
    """
    if flux_in < 0.0:
        raise ParameterError(f"flux_in must be nonnegative, got {flux_in!r}")
    out_rate = cavity.out_photon_rate
    if out_rate == 0.0:
        raise ParameterError("output mirror fraction is zero; nothing can be detected")
    return cavity.kappa * math.sqrt(flux_in / out_rate)


def empty_cavity_n(eps: float, kappa: float, delta: float) -> float:
    """Intracavity photons of the empty driven cavity: eps^2/(kappa^2 + delta^2)."""
    return eps**2 / (kappa**2 + delta**2)


def direct_snr(n: float, n0: float, out_rate: float, tau: float, eta: float) -> tuple[float, float, float]:
    """Detected counts and direct-counting SNR.

    Returns (N, N_empty, S) with N = eta*n*out_rate*tau and
    S = (N_empty - N)/sqrt(N_empty + N); S is positive for a transmission
    dip and negative for a peak. S = 0 when both counts vanish.
    """
    if n < 0.0 or n0 < 0.0:
        raise ParameterError("photon numbers must be nonnegative")
    counts = eta * n * out_rate * tau
    counts_empty = eta * n0 * out_rate * tau
    total = counts_empty + counts
    s = (counts_empty - counts) / math.sqrt(total) if total > 0.0 else 0.0
    return counts, counts_empty, s


def heterodyne_snr(amp2: float, n0: float, out_rate: float, tau: float, eta: float) -> float:
    """Heterodyne SNR from the coherent amplitude.

    S_het = sqrt(eta*out_rate*tau) * (n0 - |<a>|^2) / sqrt(2*(n0 + |<a>|^2)).
    The empty-cavity reference n0 is |<a>_0|^2; for the coherent empty
    cavity this equals <a'a>_0. Complete blackout gives sqrt(N_empty/2).
    """
    total = n0 + amp2
    if total <= 0.0:
        return 0.0
    return math.sqrt(eta * out_rate * tau) * (n0 - amp2) / math.sqrt(2.0 * total)


def evaluate_point(
    op: OperatingPoint,
    cavity: DerivedCavity,
    gamma: float,
    detector: DetectorModel,
    *,
    tol: float = DEFAULT_TOL,
    m_cap: int = DEFAULT_M_CAP,
    verify_doubling: bool = False,
) -> SNRResult:
    """Full evaluation of one operating point: two solves (g=0 and g), then SNR.

    Empty-cavity and with-atom solves share the drive strength and cutoff
    policy. The APD saturation flag marks points whose incident flux
    max(n, n0) * out_rate exceeds the detector's saturation flux; such
    points are excluded from counting-detector optima.
    """
    eps = calibrate_drive(op.flux_in, cavity)
    out_rate = cavity.out_photon_rate
    g = cavity.g0 if op.g is None else op.g

    solver_kw = dict(tol=tol, m_cap=m_cap, verify_doubling=verify_doubling,
                     flux_hint=op.flux_in)
    empty: TruncatedSolution = auto_truncate(
        op.delta, op.theta, 0.0, eps, cavity.kappa, gamma, **solver_kw)
    atom: TruncatedSolution = auto_truncate(
        op.delta, op.theta, g, eps, cavity.kappa, gamma, **solver_kw)

    n0 = empty.observables.n
    n = atom.observables.n
    amp = atom.observables.amp
    amp0_sq = abs(empty.observables.amp) ** 2

    counts, counts_empty, s = direct_snr(n, n0, out_rate, op.tau, detector.eta)
    s_het = heterodyne_snr(abs(amp) ** 2, amp0_sq, out_rate, op.tau, detector.eta)

    incident = max(n, n0) * out_rate
    saturated = (
        detector.kind != "heterodyne"
        and math.isfinite(detector.saturation_flux)
        and incident > detector.saturation_flux
    )
    return SNRResult(
        n0=n0,
        n=n,
        amp2=abs(amp) ** 2,
        phase=math.atan2(amp.imag, amp.real),
        counts_empty=counts_empty,
        counts_atom=counts,
        snr=s,
        snr_het=s_het,
        incident_flux=incident,
        apd_saturated=bool(saturated),
        truncation_ok=bool(empty.truncation_ok and atom.truncation_ok),
        m=atom.state.m,
    )


def with_flux(op: OperatingPoint, flux_in: float) -> OperatingPoint:
    """Copy of an operating point at a different input flux."""
    return replace(op, flux_in=flux_in)
