import math

import pytest
from scipy.constants import c as c_light

from cavisnr.params import (
    AtomSpec,
    CavityGeometry,
    ParameterError,
    critical_numbers,
    derive_cavity,
    mode_function,
    mode_volume,
)

TWO_PI = 2.0 * math.pi


class TestAtomSpec:
    def test_sigma0_defaults_to_resonant_cross_section(self):
        atom = AtomSpec(wavelength=780e-9, gamma=TWO_PI * 6e6)
        assert atom.sigma0 == pytest.approx(3.0 * (780e-9) ** 2 / TWO_PI)

    def test_explicit_sigma0_kept(self):
        atom = AtomSpec(wavelength=780e-9, gamma=TWO_PI * 6e6, sigma0=1e-13)
        assert atom.sigma0 == 1e-13

    @pytest.mark.parametrize("kw", [
        dict(wavelength=-1e-9, gamma=1.0),
        dict(wavelength=780e-9, gamma=0.0),
        dict(wavelength=780e-9, gamma=1.0, sigma0=-1.0),
        dict(wavelength=float("nan"), gamma=1.0),
    ])
    def test_rejects_bad_values(self, kw):
        with pytest.raises(ParameterError):
            AtomSpec(**kw)


class TestCavityGeometry:
    def test_default_split_is_impedance_matched(self):
        geom = CavityGeometry(length=1e-4, waist=2e-5, finesse=1e4)
        assert geom.f_in == geom.f_out == 0.5
        assert geom.f_loss == 0.0

    def test_splits_must_sum_to_one(self):
        with pytest.raises(ParameterError, match="sum to 1"):
            CavityGeometry(length=1e-4, waist=2e-5, finesse=1e4,
                           f_in=0.5, f_out=0.4, f_loss=0.2)

    def test_lossy_split_accepted(self):
        geom = CavityGeometry(length=1e-4, waist=2e-5, finesse=1e4,
                              f_in=0.45, f_out=0.1, f_loss=0.45)
        assert geom.f_loss == 0.45

    def test_unknown_kind_rejected(self):
        with pytest.raises(ParameterError, match="standing"):
            CavityGeometry(length=1e-4, waist=2e-5, finesse=1e4, kind="ring")


class TestDeriveCavity:
    def test_kappa_from_finesse(self):
        # field decay kappa = pi*c/(2*L*F); linewidth (FWHM) = 2*kappa
        geom = CavityGeometry(length=100e-6, waist=20e-6, finesse=1e4)
        atom = AtomSpec(wavelength=780e-9, gamma=TWO_PI * 6e6)
        dc = derive_cavity(geom, atom)
        assert dc.kappa == pytest.approx(math.pi * c_light / (2 * 100e-6 * 1e4))
        assert dc.fsr == pytest.approx(math.pi * c_light / 100e-6)
        # FWHM / FSR = finesse
        assert dc.fsr / (2 * dc.kappa) == pytest.approx(1e4)

    def test_mirror_rates_split_total(self):
        geom = CavityGeometry(length=100e-6, waist=20e-6, finesse=1e4,
                              f_in=0.3, f_out=0.2, f_loss=0.5)
        atom = AtomSpec(wavelength=780e-9, gamma=TWO_PI * 6e6)
        dc = derive_cavity(geom, atom)
        assert dc.kappa_in + dc.kappa_out + dc.kappa_loss == pytest.approx(dc.kappa)
        assert dc.kappa_out == pytest.approx(0.2 * dc.kappa)
        assert dc.out_photon_rate == pytest.approx(2.0 * dc.kappa_out)

    def test_travelling_wave_doubles_mode_volume(self):
        base = dict(length=100e-6, waist=20e-6, finesse=1e4)
        standing = CavityGeometry(**base)
        travelling = CavityGeometry(**base, kind="travelling")
        assert mode_volume(travelling) == pytest.approx(2 * mode_volume(standing))
        assert mode_volume(standing) == pytest.approx(math.pi * (20e-6) ** 2 * 100e-6 / 4)

    def test_g0_override_wins(self):
        geom = CavityGeometry(length=100e-6, waist=20e-6, finesse=1e4)
        atom = AtomSpec(wavelength=780e-9, gamma=TWO_PI * 6e6)
        dc = derive_cavity(geom, atom, g0_override=TWO_PI * 26e6)
        assert dc.g0 == pytest.approx(TWO_PI * 26e6)

    def test_g0_formula_scaling(self):
        # g0 = sqrt(sigma0*c*gamma/V): halving the volume raises g0 by sqrt(2)
        atom = AtomSpec(wavelength=780e-9, gamma=TWO_PI * 6e6)
        long = derive_cavity(CavityGeometry(length=200e-6, waist=20e-6, finesse=1e4), atom)
        short = derive_cavity(CavityGeometry(length=100e-6, waist=20e-6, finesse=1e4), atom)
        assert short.g0 / long.g0 == pytest.approx(math.sqrt(2.0))
        assert short.g0 == pytest.approx(
            math.sqrt(atom.sigma0 * c_light * atom.gamma / short.mode_volume))


class TestCriticalNumbers:
    def test_values(self):
        g0, gamma, kappa = TWO_PI * 26e6, TWO_PI * 6e6, TWO_PI * 75e6
        regime = critical_numbers(g0, gamma, kappa)
        assert regime.m0 == pytest.approx((gamma / 2) ** 2 / (2 * g0**2))
        assert regime.N0 == pytest.approx(gamma * kappa / g0**2)
        assert regime.cooperativity == pytest.approx(1.0 / regime.N0)

    def test_strong_coupling_has_small_critical_numbers(self, std_cavity, rb_atom):
        regime = critical_numbers(std_cavity.g0, rb_atom.gamma, std_cavity.kappa)
        assert regime.m0 < 0.05
        assert regime.N0 < 1.0


class TestModeFunction:
    def test_antinode_is_unity(self):
        assert mode_function(0.0, 0.0, 25e-6, 780e-9) == pytest.approx(1.0)

    def test_node_vanishes(self):
        assert mode_function(0.0, 780e-9 / 4, 25e-6, 780e-9) == pytest.approx(0.0, abs=1e-12)

    def test_waist_rolloff(self):
        w0 = 25e-6
        assert mode_function(w0, 0.0, w0, 780e-9) == pytest.approx(math.exp(-1.0))
