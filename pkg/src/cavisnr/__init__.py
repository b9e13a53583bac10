"""Single-atom detection SNR for driven optical cavities.

Core model: one two-level atom coupled to a driven, damped cavity mode
(Jaynes-Cummings with cavity decay and spontaneous emission), solved for
its steady state in a truncated Fock basis. On top of that sit detection
statistics (direct counting, APD realism, heterodyne), transmission
spectra with noise-susceptibility estimates, Poisson click discrimination,
and parameter-grid sweeps with ridge extraction.
"""

__version__ = "0.1.0"

from .analytics import (
    NoiseReport,
    SpectrumContext,
    SpectrumCurve,
    dressed_energies,
    noise_susceptibility,
    probe_detuning_shift,
    saturable_absorber,
    transmission_spectrum,
    weak_drive_amplitude,
)
from .config import ConfigError, RunConfig, apply_overrides, load_config
from .detect import (
    DetectorModel,
    OperatingPoint,
    SNRResult,
    calibrate_drive,
    direct_snr,
    empty_cavity_n,
    evaluate_point,
    heterodyne_snr,
)
from .discriminator import (
    CountModel,
    SeparationError,
    ThresholdChoice,
    choose_threshold,
    min_snr_for_sigma,
    qe_false_curves,
)
from .hilbert import (
    BasisError,
    CapacityError,
    FockBasis,
    Liouvillian,
    build_hamiltonian,
    build_liouvillian,
)
from .params import (
    AtomSpec,
    CavityGeometry,
    CouplingRegime,
    DerivedCavity,
    ParameterError,
    critical_numbers,
    derive_cavity,
    mode_function,
)
from .steadystate import (
    Observables,
    SolverError,
    SteadyState,
    TruncatedSolution,
    auto_truncate,
    expectations,
    solve_steady,
)
from .sweep import Axis, GridSpec, Optimum, SweepResult, find_optimum, ridge_max, run_grid

__all__ = [
    "__version__",
    "AtomSpec",
    "Axis",
    "BasisError",
    "CapacityError",
    "CavityGeometry",
    "ConfigError",
    "CountModel",
    "CouplingRegime",
    "DerivedCavity",
    "DetectorModel",
    "FockBasis",
    "GridSpec",
    "Liouvillian",
    "NoiseReport",
    "Observables",
    "OperatingPoint",
    "Optimum",
    "ParameterError",
    "RunConfig",
    "SNRResult",
    "SeparationError",
    "SolverError",
    "SpectrumContext",
    "SpectrumCurve",
    "SteadyState",
    "SweepResult",
    "ThresholdChoice",
    "TruncatedSolution",
    "apply_overrides",
    "auto_truncate",
    "build_hamiltonian",
    "build_liouvillian",
    "calibrate_drive",
    "choose_threshold",
    "critical_numbers",
    "derive_cavity",
    "direct_snr",
    "dressed_energies",
    "empty_cavity_n",
    "evaluate_point",
    "expectations",
    "find_optimum",
    "heterodyne_snr",
    "load_config",
    "min_snr_for_sigma",
    "mode_function",
    "noise_susceptibility",
    "probe_detuning_shift",
    "qe_false_curves",
    "ridge_max",
    "run_grid",
    "saturable_absorber",
    "solve_steady",
    "transmission_spectrum",
    "weak_drive_amplitude",
]
