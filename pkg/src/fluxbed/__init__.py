"""fluxbed: a desk-scale flux-qubit annealing testbed simulator.

Covers the full bring-up chain: device truth with hidden control crosstalk,
resonator transmission scans, automatic lattice calibration, coherence
characterization, dispersive single-shot readout, and transverse-field
Ising annealing with closed and open dynamics.
"""

from .device import (
    AnnealControlPoint,
    CurrentVector,
    DeviceConfig,
    DeviceTruth,
    FluxVector,
    NoiseConfig,
    QubitParams,
    build_device,
    effective_coherence,
    load_config,
    save_config,
    true_flux,
)
from .errors import (
    CalibrationInsufficientError,
    FluxbedError,
    NumericalError,
    ValidationError,
)
from .readout import (
    DiscriminationResult,
    ResonatorParams,
    ShotEnsemble,
    acquire_shots,
    discriminate,
    qubit_flux_into_squid,
    readout_backaction,
    resonator_transmission,
)
from .xtalk import (
    AcquisitionReport,
    AffineCorrection,
    AxisSpec,
    CalibrationResult,
    LatticeFit,
    ScanGrid2D,
    VerificationReport,
    calibrate_auto,
    detect_centers_auto,
    estimate_basis_fft,
    fit_affine,
    fit_lattice_auto,
    assign_lattice_indices,
    scan_transmission,
    simulate_acquisition_time,
    transmission_model,
    verify_orthogonality,
)
from .characterize import (
    CoherenceReport,
    DecayTrace,
    RamseyFit,
    T1Fit,
    characterize_qubit,
    fit_ramsey,
    fit_t1,
    ramsey_trace,
    t1_trace,
)
from . import anneal, fluxmap, formats, units

__version__ = "0.1.0"

__all__ = [
    "AnnealControlPoint", "CurrentVector", "DeviceConfig", "DeviceTruth",
    "FluxVector", "NoiseConfig", "QubitParams", "build_device",
    "effective_coherence", "load_config", "save_config", "true_flux",
    "CalibrationInsufficientError", "FluxbedError", "NumericalError",
    "ValidationError",
    "DiscriminationResult", "ResonatorParams", "ShotEnsemble", "acquire_shots",
    "discriminate", "qubit_flux_into_squid", "readout_backaction",
    "resonator_transmission",
    "AcquisitionReport", "AffineCorrection", "AxisSpec", "CalibrationResult",
    "LatticeFit", "ScanGrid2D", "VerificationReport", "calibrate_auto",
    "detect_centers_auto", "estimate_basis_fft", "fit_affine",
    "fit_lattice_auto", "assign_lattice_indices", "scan_transmission",
    "simulate_acquisition_time", "transmission_model", "verify_orthogonality",
    "CoherenceReport", "DecayTrace", "RamseyFit", "T1Fit", "characterize_qubit",
    "fit_ramsey", "fit_t1", "ramsey_trace", "t1_trace",
    "anneal", "fluxmap", "formats", "units",
    "__version__",
]
