"""Physical parameters of the atom-cavity system and derived rates.

All frequencies and rates are stored internally in angular units (rad/s).
The cavity field decay rate kappa is defined so that the cavity linewidth
(FWHM) is 2*kappa; with that convention kappa = pi*c/(2*L*F).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy.constants import c as C_LIGHT

TWO_PI = 2.0 * math.pi


class ParameterError(ValueError):
    """A physical parameter is missing, non-finite, or out of range."""


def _require_positive(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value) or value <= 0.0:
            raise ParameterError(f"{name} must be finite and positive, got {value!r}")


@dataclass(frozen=True)
class AtomSpec:
    """Two-level atom: wavelength, population decay rate, resonant cross-section.

    sigma0 defaults to the two-level resonant cross-section 3*lambda^2/(2*pi).
    gamma is the excited-state *population* decay rate (rad/s).
    """

    wavelength: float            # m
    gamma: float                 # rad/s
    sigma0: float | None = None  # m^2; derived when omitted
    omega_a: float | None = None  # rad/s; only detunings enter the dynamics

    def __post_init__(self) -> None:
        _require_positive(wavelength=self.wavelength, gamma=self.gamma)
        if self.sigma0 is None:
            object.__setattr__(self, "sigma0", 3.0 * self.wavelength**2 / TWO_PI)
        elif not math.isfinite(self.sigma0) or self.sigma0 <= 0.0:
            raise ParameterError(f"sigma0 must be finite and positive, got {self.sigma0!r}")


@dataclass(frozen=True)
class CavityGeometry:
    """Fabry-Perot geometry plus the mirror budget for the total loss rate.

    Mirror split fractions apportion kappa between the input mirror, the
    output mirror, and scattering loss; they must sum to 1. The default is
    impedance matched (f_in = f_out = 1/2, lossless).
    """

    length: float                # m
    waist: float                 # m
    finesse: float
    kind: str = "standing"       # "standing" | "travelling"
    f_in: float = 0.5
    f_out: float = 0.5
    f_loss: float = 0.0

    def __post_init__(self) -> None:
        _require_positive(length=self.length, waist=self.waist, finesse=self.finesse)
        if self.kind not in ("standing", "travelling"):
            raise ParameterError(f"geometry kind must be 'standing' or 'travelling', got {self.kind!r}")
        for name in ("f_in", "f_out", "f_loss"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0.0:
                raise ParameterError(f"{name} must be finite and nonnegative, got {value!r}")
        total = self.f_in + self.f_out + self.f_loss
        if abs(total - 1.0) > 1e-12:
            raise ParameterError(f"mirror split fractions must sum to 1, got {total!r}")


@dataclass(frozen=True)
class DerivedCavity:
    """All rates derived from a geometry: decay rates, mode volume, coupling."""

    kappa: float       # total field decay, rad/s (FWHM linewidth = 2*kappa)
    kappa_in: float    # rad/s
    kappa_out: float   # rad/s
    kappa_loss: float  # rad/s
    fsr: float         # free spectral range, rad/s
    mode_volume: float  # m^3
    g0: float          # maximal atom-field coupling, rad/s

    @property
    def out_photon_rate(self) -> float:
        """Rate at which one intracavity photon exits through the output mirror.

        Energy decays twice as fast as the field, so the photon flux through
        the output mirror is n * 2*kappa_out (= n * kappa when impedance
        matched). Detected-count formulas use this rate.
        """
        return 2.0 * self.kappa_out


@dataclass(frozen=True)
class CouplingRegime:
    """Dimensionless strong-coupling measures."""

    m0: float            # critical photon number, (gamma/2)^2 / (2 g0^2)
    N0: float            # critical atom number, gamma*kappa / g0^2
    cooperativity: float  # 1/N0


def mode_volume(geometry: CavityGeometry) -> float:
    """Effective mode volume: pi*w0^2*L/4 standing-wave, twice that travelling-wave."""
    v = math.pi * geometry.waist**2 * geometry.length / 4.0
    if geometry.kind == "travelling":
        v *= 2.0
    return v


def derive_cavity(
    geometry: CavityGeometry,
    atom: AtomSpec,
    g0_override: float | None = None,
) -> DerivedCavity:
    """Compute decay rates, mode volume, and coupling for a cavity geometry.

    kappa = pi*c/(2*L*F); mirror rates are kappa scaled by the split
    fractions. g0 is sqrt(sigma0*c*gamma/V) unless an override is given
    (the formula and the commonly quoted values differ by convention
    factors of order 2, so measured couplings are passed as overrides).
    """
    kappa = math.pi * C_LIGHT / (2.0 * geometry.length * geometry.finesse)
    v = mode_volume(geometry)
    if g0_override is not None:
        if not math.isfinite(g0_override) or g0_override <= 0.0:
            raise ParameterError(f"g0_override must be finite and positive, got {g0_override!r}")
        g0 = g0_override
    else:
        g0 = math.sqrt(atom.sigma0 * C_LIGHT * atom.gamma / v)
    return DerivedCavity(
        kappa=kappa,
        kappa_in=geometry.f_in * kappa,
        kappa_out=geometry.f_out * kappa,
        kappa_loss=geometry.f_loss * kappa,
        fsr=math.pi * C_LIGHT / geometry.length,
        mode_volume=v,
        g0=g0,
    )


def critical_numbers(g0: float, gamma: float, kappa: float) -> CouplingRegime:
    """Critical photon/atom numbers and cooperativity from the three rates."""
    _require_positive(g0=g0, gamma=gamma, kappa=kappa)
    n0_crit = gamma * kappa / g0**2
    return CouplingRegime(
        m0=(gamma / 2.0) ** 2 / (2.0 * g0**2),
        N0=n0_crit,
        cooperativity=1.0 / n0_crit,
    )


def mode_function(r: float, z: float, w0: float, wavelength: float) -> float:
    """Normalized Gaussian standing-wave mode amplitude at (r, z).

    cos(2*pi*z/lambda) * exp(-r^2/w0^2); the local coupling is g0 times this.
    """
    _require_positive(w0=w0, wavelength=wavelength)
    return math.cos(TWO_PI * z / wavelength) * math.exp(-(r**2) / w0**2)
