"""Simulated flux-qubit device with a hidden ground truth.

The device holds the true control matrix (including crosstalk), stray flux
offsets and per-qubit coherence parameters. Everything downstream (scans,
calibration, readout, annealing) is supposed to learn about the device only
through measurement-like operations, so the truth object is immutable and
the generation is a pure function of the seed.

Conventions: loop flux in Phi0, control-line current in mA, persistent
current in nA. Qubit q owns loops/lines ``X{q}`` and ``Z{q}``.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .readout import ResonatorParams

_MATRIX_RETRIES = 8


@dataclass(frozen=True)
class QubitParams:
    """Effective two-level qubit parameters.

    Junction critical currents and the shunt capacitance are carried as
    metadata only; the qubit itself is modeled as a tunable two-level
    system. Coherence scales with the operating persistent current as
    T1 ~ 1/Ip^2 and Tphi ~ 1/Ip relative to the reference point.
    """

    persistent_current_na: float = 100.0
    x_junction_critical_current_na: float = 90.0
    z_junction_critical_current_na: float = 186.0
    shunt_capacitance_ff: float = 45.0
    base_t1_us: float = 3.5
    base_tphi_ns: float = 130.0
    ref_ip_na: float = 100.0
    f01_ghz: float = 4.2

    def __post_init__(self):
        for name in ("persistent_current_na", "x_junction_critical_current_na",
                     "z_junction_critical_current_na", "ref_ip_na"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive")
        if self.base_t1_us <= 0 or self.base_tphi_ns <= 0:
            raise ValidationError("base coherence times must be positive")
        # physicality check: T2 <= 2*T1 (Tphi here is the Ramsey-style
        # dephasing time, so the bound applies with both in ns)
        if self.base_tphi_ns > 2.0 * self.base_t1_us * 1e3:
            warnings.warn(
                f"base_tphi_ns={self.base_tphi_ns} exceeds 2*T1="
                f"{2.0 * self.base_t1_us * 1e3} ns; unphysical pair",
                stacklevel=2,
            )

    def effective_t1_us(self, ip_na: float) -> float:
        if ip_na <= 0:
            raise ValidationError("operating persistent current must be positive")
        return self.base_t1_us * (self.ref_ip_na / ip_na) ** 2

    def effective_tphi_ns(self, ip_na: float) -> float:
        if ip_na <= 0:
            raise ValidationError("operating persistent current must be positive")
        return self.base_tphi_ns * (self.ref_ip_na / ip_na)


@dataclass(frozen=True)
class FluxVector:
    """Loop fluxes in Phi0 with one label per loop."""

    values: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.values.ndim != 1 or len(self.labels) != self.values.size:
            raise ValidationError("flux vector length must match label count")
        if len(set(self.labels)) != len(self.labels):
            raise ValidationError("flux labels must be unique")

    def __getitem__(self, label: str) -> float:
        return float(self.values[self.labels.index(label)])


@dataclass(frozen=True)
class CurrentVector:
    """Control-line currents in mA with one label per line."""

    values: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.values.ndim != 1 or len(self.labels) != self.values.size:
            raise ValidationError("current vector length must match label count")
        if len(set(self.labels)) != len(self.labels):
            raise ValidationError("current labels must be unique")


@dataclass(frozen=True)
class AnnealControlPoint:
    """Per-qubit (phi_x, phi_z) bias point in mPhi0."""

    phi_x_mphi0: float
    phi_z_mphi0: float


@dataclass
class NoiseConfig:
    """Measurement-noise knobs for simulated acquisition."""

    scan_noise_sigma: float = 0.02
    trace_noise_sigma: float = 0.02

    def __post_init__(self):
        if self.scan_noise_sigma < 0 or self.trace_noise_sigma < 0:
            raise ValidationError("noise sigmas must be nonnegative")


@dataclass
class DeviceConfig:
    """Declarative description from which a device truth is generated.

    ``designed_mutuals`` is the intended (diagonal) line-to-loop coupling in
    Phi0/mA, one entry per line, or a scalar applied to every line.
    """

    n_qubits: int = 1
    designed_mutuals: float | list[float] = 1.0
    crosstalk_fraction: float = 0.3
    seed: int = 0
    random_offsets: bool = True
    qubits: list[QubitParams] = field(default_factory=list)
    resonators: list[ResonatorParams] = field(default_factory=list)
    noise: NoiseConfig = field(default_factory=NoiseConfig)

    def __post_init__(self):
        if not 1 <= self.n_qubits <= 8:
            raise ValidationError("n_qubits must be in 1..8")
        if not 0.0 <= self.crosstalk_fraction <= 0.5:
            raise ValidationError("crosstalk_fraction must be in [0, 0.5]")
        mut = self.designed_mutuals
        if np.isscalar(mut):
            if mut <= 0:
                raise ValidationError("designed mutual must be positive")
        else:
            if len(mut) != 2 * self.n_qubits:
                raise ValidationError("need one designed mutual per line (2 per qubit)")
            if any(m <= 0 for m in mut):
                raise ValidationError("designed mutuals must be positive")
        if self.qubits and len(self.qubits) != self.n_qubits:
            raise ValidationError("qubit params list must match n_qubits")
        if self.resonators and len(self.resonators) != self.n_qubits:
            raise ValidationError("resonator params list must match n_qubits")

    def mutuals_per_line(self) -> np.ndarray:
        n_lines = 2 * self.n_qubits
        if np.isscalar(self.designed_mutuals):
            return np.full(n_lines, float(self.designed_mutuals))
        return np.asarray(self.designed_mutuals, dtype=float)


def loop_labels(n_qubits: int) -> tuple[str, ...]:
    out = []
    for q in range(n_qubits):
        out += [f"X{q}", f"Z{q}"]
    return tuple(out)


@dataclass(frozen=True)
class DeviceTruth:
    """Hidden ground truth of the simulated device.

    ``true_control_matrix`` maps line currents (mA) to loop fluxes (Phi0);
    off-diagonal entries are the crosstalk the calibration must remove.
    ``pattern_fractional_offset`` locates the transmission-feature lattice
    within each unit cell.
    """

    true_control_matrix: np.ndarray
    flux_offsets: np.ndarray
    qubits: tuple[QubitParams, ...]
    resonators: tuple[ResonatorParams, ...]
    pattern_fractional_offset: np.ndarray
    rng_seed: int
    config: DeviceConfig

    def __post_init__(self):
        m = np.asarray(self.true_control_matrix, dtype=float)
        off = np.asarray(self.flux_offsets, dtype=float)
        pat = np.asarray(self.pattern_fractional_offset, dtype=float)
        if m.ndim != 2 or off.shape != (m.shape[0],) or pat.shape != (m.shape[0],):
            raise ValidationError("inconsistent device truth shapes")
        if np.linalg.matrix_rank(m) < m.shape[0]:
            raise ValidationError("true control matrix must have full row rank")
        for a in (m, off, pat):
            a.setflags(write=False)
        object.__setattr__(self, "true_control_matrix", m)
        object.__setattr__(self, "flux_offsets", off)
        object.__setattr__(self, "pattern_fractional_offset", pat)

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)

    @property
    def n_loops(self) -> int:
        return self.true_control_matrix.shape[0]

    @property
    def n_lines(self) -> int:
        return self.true_control_matrix.shape[1]

    @property
    def loop_labels(self) -> tuple[str, ...]:
        return loop_labels(self.n_qubits)

    @property
    def line_labels(self) -> tuple[str, ...]:
        # one line per loop, same naming
        return loop_labels(self.n_qubits)

    def line_index(self, label: str) -> int:
        try:
            return self.line_labels.index(label)
        except ValueError:
            raise ValidationError(f"unknown control line {label!r}") from None

    def qubit_of_line(self, label: str) -> int:
        return self.line_index(label) // 2

    def loop_indices_of_qubit(self, q: int) -> tuple[int, int]:
        if not 0 <= q < self.n_qubits:
            raise ValidationError(f"qubit index {q} out of range")
        return 2 * q, 2 * q + 1


def build_device(config: DeviceConfig) -> DeviceTruth:
    """Generate the hidden device truth deterministically from the config seed.

    Off-diagonal control-matrix entries are drawn uniformly within
    +/- crosstalk_fraction times the row's designed diagonal; flux offsets
    uniformly in [-0.5, 0.5) Phi0. If a draw happens to be singular the
    draw is retried with a perturbed stream a bounded number of times.
    """
    rng = np.random.default_rng(config.seed)
    n = 2 * config.n_qubits
    diag = config.mutuals_per_line()

    matrix = None
    for _ in range(_MATRIX_RETRIES):
        m = np.diag(diag).astype(float)
        if config.crosstalk_fraction > 0:
            off = rng.uniform(-1.0, 1.0, size=(n, n))
            np.fill_diagonal(off, 0.0)
            m = m + off * config.crosstalk_fraction * diag[:, None]
        if np.linalg.matrix_rank(m) == n:
            matrix = m
            break
    if matrix is None:
        raise ValidationError(
            f"could not generate an invertible control matrix in {_MATRIX_RETRIES} draws"
        )

    if config.random_offsets:
        offsets = rng.uniform(-0.5, 0.5, size=n)
    else:
        offsets = np.zeros(n)
        rng.uniform(-0.5, 0.5, size=n)  # keep stream position independent of flag
    pattern = rng.uniform(0.0, 1.0, size=n)

    qubits = tuple(config.qubits) if config.qubits else tuple(
        QubitParams() for _ in range(config.n_qubits)
    )
    resonators = tuple(config.resonators) if config.resonators else tuple(
        ResonatorParams() for _ in range(config.n_qubits)
    )
    return DeviceTruth(
        true_control_matrix=matrix,
        flux_offsets=offsets,
        qubits=qubits,
        resonators=resonators,
        pattern_fractional_offset=pattern,
        rng_seed=config.seed,
        config=config,
    )


def true_flux(device: DeviceTruth, currents: CurrentVector) -> FluxVector:
    """Exact linear map Phi = M_true * I + offsets (Phi0)."""
    if len(currents.labels) != device.n_lines:
        raise ValidationError(
            f"expected {device.n_lines} line currents, got {len(currents.labels)}"
        )
    # reorder to canonical line order in case labels are permuted
    idx = [currents.labels.index(lbl) for lbl in device.line_labels]
    vals = currents.values[idx]
    phi = device.true_control_matrix @ vals + device.flux_offsets
    return FluxVector(values=phi, labels=device.loop_labels)


def effective_coherence(device: DeviceTruth, qubit: int, ip_operating_na: float
                        ) -> tuple[float, float]:
    """(T1 in us, Tphi in ns) at the given operating persistent current."""
    if not 0 <= qubit < device.n_qubits:
        raise ValidationError(f"qubit index {qubit} out of range")
    qp = device.qubits[qubit]
    return qp.effective_t1_us(ip_operating_na), qp.effective_tphi_ns(ip_operating_na)


# --- config serialization (lossless JSON round-trip) ---

def config_to_dict(config: DeviceConfig) -> dict:
    d = asdict(config)
    return d


def config_from_dict(d: dict) -> DeviceConfig:
    d = dict(d)
    if "qubits" in d and d["qubits"]:
        d["qubits"] = [QubitParams(**q) for q in d["qubits"]]
    if "resonators" in d and d["resonators"]:
        d["resonators"] = [ResonatorParams(**r) for r in d["resonators"]]
    if "noise" in d and d["noise"] is not None:
        d["noise"] = NoiseConfig(**d["noise"])
    return DeviceConfig(**d)


def save_config(path: str | Path, config: DeviceConfig) -> None:
    Path(path).write_text(json.dumps(config_to_dict(config), indent=2, sort_keys=True) + "\n")


def load_config(path: str | Path) -> DeviceConfig:
    return config_from_dict(json.loads(Path(path).read_text()))
