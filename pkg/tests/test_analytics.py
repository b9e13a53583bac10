import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cavisnr.analytics import (
    dressed_energies,
    noise_susceptibility,
    probe_detuning_shift,
    saturable_absorber,
    transmission_spectrum,
    weak_drive_amplitude,
)
from cavisnr.params import ParameterError


class TestDressedEnergies:
    @given(n=st.integers(1, 40), g=st.floats(0.1, 10.0),
           delta=st.floats(-5.0, 5.0), theta=st.floats(-5.0, 5.0))
    @settings(max_examples=100, deadline=None)
    def test_splitting_formula(self, n, g, delta, theta):
        up, down = dressed_energies(n, g, delta, theta)
        split = math.sqrt(4.0 * g * g * n + (delta - theta) ** 2)
        assert up - down == pytest.approx(split, rel=1e-12)
        assert up == pytest.approx(-down, rel=1e-12)

    def test_resonant_vacuum_rabi(self):
        up, down = dressed_energies(1, 2.5, 0.0, 0.0)
        assert up == pytest.approx(2.5)
        assert down == pytest.approx(-2.5)

    def test_ground_state_has_no_partner(self):
        with pytest.raises(ParameterError):
            dressed_energies(0, 1.0, 0.0, 0.0)


class TestProbeDetuningShift:
    def test_vacuum_value(self):
        assert probe_detuning_shift(0, 3.0) == pytest.approx(3.0)

    def test_monotone_decreasing(self):
        g = 2.0
        shifts = [probe_detuning_shift(n, g) for n in range(30)]
        assert all(a > b for a, b in zip(shifts, shifts[1:]))

    def test_high_n_asymptote(self):
        g, n = 2.0, 10_000
        assert probe_detuning_shift(n, g) == pytest.approx(g / (2 * math.sqrt(n)), rel=1e-4)

    def test_negative_n_rejected(self):
        with pytest.raises(ParameterError):
            probe_detuning_shift(-1, 1.0)


class TestWeakDriveAmplitude:
    def test_reduces_to_empty_cavity_without_coupling(self):
        eps, delta, kappa = 0.3, 0.7, 1.0
        amp = weak_drive_amplitude(eps, delta, 5.0, 0.0, kappa, 0.4)
        assert amp == pytest.approx(-1j * eps / (kappa + 1j * delta), rel=1e-12)

    def test_resonant_suppression_factor(self):
        # on two-fold resonance the amplitude shrinks by 1/(1 + 2C)
        eps, kappa, gamma, g = 0.1, 1.0, 0.5, 2.0
        coop = g**2 / (kappa * gamma)
        amp = weak_drive_amplitude(eps, 0.0, 0.0, g, kappa, gamma)
        empty = -1j * eps / kappa
        assert amp / empty == pytest.approx(1.0 / (1.0 + 2.0 * coop), rel=1e-12)


class TestSaturableAbsorber:
    def test_sigma_halves_at_saturation(self):
        sigma, _ = saturable_absorber(1.0, 2e-13, 1e6, 1e-9)
        assert sigma == pytest.approx(1e-13)

    def test_scattering_ratio(self):
        _, s = saturable_absorber(0.0, 2e-13, 1e6, 1e-9)
        assert s == pytest.approx(1e6 * 2e-13 / 1e-9)

    def test_rejects_negative_intensity(self):
        with pytest.raises(ParameterError):
            saturable_absorber(-0.5, 1e-13, 1e6, 1e-9)


class TestTransmissionSpectrum:
    def test_empty_cavity_is_lorentzian(self, std_cavity, rb_atom):
        k = std_cavity.kappa
        deltas = np.linspace(-3 * k, 3 * k, 41)
        curve = transmission_spectrum(std_cavity, rb_atom.gamma, 5e6, deltas,
                                      with_atom=False)
        assert curve.valid.all()
        expected = k**2 / (k**2 + deltas**2)
        assert np.allclose(curve.transmission, expected, rtol=1e-7)
        assert curve.transmission.max() == pytest.approx(1.0, rel=1e-8)

    def test_vacuum_rabi_doublet(self, std_cavity, rb_atom):
        # weak probe through the coupled system: dip at 0, doublet peaks where
        # linear response puts them (outside +-g0 here, since kappa > g0)
        g0, k, gamma = std_cavity.g0, std_cavity.kappa, rb_atom.gamma
        deltas = np.linspace(-1.5 * g0, 1.5 * g0, 61)
        curve = transmission_spectrum(std_cavity, rb_atom.gamma, 1e6, deltas)
        mid = 30
        assert curve.deltas[mid] == 0.0
        t = curve.transmission
        assert t[mid] < 0.1 * t.max()
        linear = np.array([
            abs(weak_drive_amplitude(1.0, d, d, g0, k, gamma)) ** 2
            for d in deltas
        ])
        assert np.argmax(t) == np.argmax(linear)
        assert abs(curve.deltas[np.argmax(t)]) > g0

    def test_theta_tracks_delta_with_offset(self, std_cavity, rb_atom):
        offset = 2.0 * rb_atom.gamma
        deltas = np.linspace(-1e8, 1e8, 5)
        curve = transmission_spectrum(std_cavity, rb_atom.gamma, 1e6, deltas,
                                      atom_offset=offset)
        assert np.allclose(curve.thetas, deltas + offset)

    def test_capacity_failures_marked_invalid(self, std_cavity, rb_atom):
        # the resonant point needs a basis just over m_cap = 20 at this flux;
        # the detuned wings hold fewer photons and still fit
        k = std_cavity.kappa
        deltas = np.linspace(-5 * k, 5 * k, 9)
        curve = transmission_spectrum(std_cavity, rb_atom.gamma, 5e8, deltas,
                                      with_atom=False, m_cap=20)
        assert not curve.valid.all()
        assert np.isnan(curve.transmission[~curve.valid]).all()
        assert curve.valid[0]
        assert not curve.valid[4]  # the resonant point

    def test_n0_peak_is_resonant_empty_value(self, std_cavity, rb_atom):
        flux = 5e6
        deltas = np.linspace(-1e8, 1e8, 3)
        curve = transmission_spectrum(std_cavity, rb_atom.gamma, flux, deltas)
        assert curve.n0_peak == pytest.approx(flux / std_cavity.out_photon_rate)


@pytest.fixture(scope="module")
def empty_curve(std_cavity, rb_atom):
    k = std_cavity.kappa
    deltas = np.linspace(-2 * k, 2 * k, 21)
    return transmission_spectrum(std_cavity, rb_atom.gamma, 5e6, deltas,
                                 with_atom=False), std_cavity


class TestNoiseSusceptibility:
    def test_matches_analytic_lorentzian_slope(self, empty_curve):
        curve, cavity = empty_curve
        k = cavity.kappa
        delta_op = 0.5 * k
        jitter = 0.01 * k
        report = noise_susceptibility(curve, delta_op, jitter, 1e4)
        # T = k^2/(k^2 + d^2): |dT/dd| * jitter / T = 2*d*jitter/(k^2 + d^2)
        expected = 2 * delta_op * jitter / (k**2 + delta_op**2)
        assert report.fluctuation == pytest.approx(expected, rel=0.02)
        assert report.t_op == pytest.approx(0.8, rel=1e-6)

    def test_shot_noise_fraction(self, empty_curve):
        curve, cavity = empty_curve
        report = noise_susceptibility(curve, 0.5 * cavity.kappa, 1e5, 1e4)
        assert report.shot == pytest.approx(1e-2)
        assert report.ratio == pytest.approx(report.fluctuation / report.shot)

    def test_zero_jitter_means_zero_fluctuation(self, empty_curve):
        curve, cavity = empty_curve
        report = noise_susceptibility(curve, 0.5 * cavity.kappa, 0.0, 1e4)
        assert report.fluctuation == 0.0
        assert report.ratio == 0.0

    def test_operating_point_must_sit_inside_scan(self, empty_curve):
        curve, cavity = empty_curve
        with pytest.raises(ParameterError, match="scan range"):
            noise_susceptibility(curve, 2.0 * cavity.kappa, 1e5, 1e4)
        with pytest.raises(ParameterError, match="scan range"):
            noise_susceptibility(curve, -3.0 * cavity.kappa, 1e5, 1e4)

    def test_reference_count_must_be_positive(self, empty_curve):
        curve, cavity = empty_curve
        with pytest.raises(ParameterError):
            noise_susceptibility(curve, 0.5 * cavity.kappa, 1e5, 0.0)
