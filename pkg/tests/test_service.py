import math

import pytest

from cavisnr.config import RunConfig, apply_overrides
from cavisnr.service import _clean, build_system

TWO_PI = 2.0 * math.pi


class TestBuildSystem:
    def test_boundary_unit_conversions(self):
        cfg = apply_overrides(RunConfig(), [
            "cavity.length_um=178",
            "cavity.waist_um=25.5",
            "cavity.wavelength_nm=852",
            "cavity.gamma_mhz=5.2",
            "operating.flux=70",
            "operating.tau_us=1.0",
            "operating.delta_kappa=0.5",
            "operating.theta_gamma=3.0",
        ])
        sysd = build_system(cfg)
        assert sysd.geometry.length == pytest.approx(178e-6)
        assert sysd.geometry.waist == pytest.approx(25.5e-6)
        assert sysd.atom.wavelength == pytest.approx(852e-9)
        assert sysd.atom.gamma == pytest.approx(TWO_PI * 5.2e6)
        assert sysd.flux_in == pytest.approx(70e6)
        assert sysd.tau == pytest.approx(1e-6)
        assert sysd.delta == pytest.approx(0.5 * sysd.cavity.kappa)
        assert sysd.theta == pytest.approx(3.0 * sysd.atom.gamma)

    def test_g0_mhz_null_uses_geometry_formula(self):
        cfg = apply_overrides(RunConfig(), ["cavity.g0_mhz=null"])
        sysd = build_system(cfg)
        # formula value for the default geometry, not the 26 MHz override
        assert sysd.cavity.g0 / TWO_PI / 1e6 == pytest.approx(51.45, rel=1e-3)

    def test_detector_resolution(self):
        cfg = apply_overrides(RunConfig(), ["detector.kind=apd"])
        sysd = build_system(cfg)
        assert sysd.detector.eta == 0.5
        assert sysd.detector.saturation_flux == 20e6


class TestClean:
    def test_nan_and_inf_become_none(self):
        data = {
            "a": float("nan"),
            "b": [1.0, float("inf"), {"c": float("-inf")}],
            "d": "text",
            "e": 3,
            "f": True,
        }
        cleaned = _clean(data)
        assert cleaned["a"] is None
        assert cleaned["b"][1] is None
        assert cleaned["b"][2]["c"] is None
        assert cleaned["d"] == "text"
        assert cleaned["e"] == 3
        assert cleaned["f"] is True
