import math

import pytest

from cavisnr.params import AtomSpec, CavityGeometry, derive_cavity

TWO_PI = 2.0 * math.pi


@pytest.fixture(scope="session")
def rb_atom() -> AtomSpec:
    """Rubidium D2-like atom: 780 nm, gamma/2pi = 6 MHz."""
    return AtomSpec(wavelength=780e-9, gamma=TWO_PI * 6.0e6)


@pytest.fixture(scope="session")
def std_geometry() -> CavityGeometry:
    """100 um cavity, 20 um waist, finesse 1e4, impedance matched."""
    return CavityGeometry(length=100e-6, waist=20e-6, finesse=1e4)


@pytest.fixture(scope="session")
def std_cavity(std_geometry, rb_atom):
    """Standard cavity with the measured coupling g0/2pi = 26 MHz."""
    return derive_cavity(std_geometry, rb_atom, g0_override=TWO_PI * 26.0e6)
