"""Persistent-current readout through an rf-SQUID-terminated resonator.

The qubit's persistent-current state shifts the resonator frequency by a
fixed amount; probing at the un-shifted resonance gives low transmission
for |down> and high transmission for |up>. A single shot integrates the
transmitted voltage for a configurable time, with white noise averaging
down as 1/sqrt(t). Discrimination fits one Gaussian per prepared state and
thresholds at the equal-likelihood crossing.

Readout is modeled as classical discrimination of a settled persistent
current; there is no measurement backaction on the qubit state itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .errors import ValidationError
from .units import flux_wb, wb_to_mphi0


@dataclass(frozen=True)
class ResonatorParams:
    """Readout-resonator model parameters.

    The default loaded Q is chosen so that the 15 MHz state shift equals
    14 resonator linewidths at the 6.003 GHz operating point. ``flux_pull_mhz``
    sets how far the resonance moves across one flux unit cell and only
    matters for flux-map scans, not for state discrimination.
    """

    f_down_ghz: float = 6.003
    state_shift_mhz: float = 15.0
    loaded_q: float = 6.003e3 * 14.0 / 15.0  # shift == 14 linewidths
    notch_depth: float = 0.25
    qubit_flux_signal_mphi0: float = 2.418
    mutual_to_squid_ph: float = 50.0
    coupler_engaged: bool = False
    coupler_penalty_factor: float = 10.0
    flux_pull_mhz: float = 10.0

    def __post_init__(self):
        if self.loaded_q <= 0:
            raise ValidationError("loaded_q must be positive")
        if not 0.0 < self.notch_depth <= 1.0:
            raise ValidationError("notch_depth must be in (0, 1]")
        if self.coupler_penalty_factor < 1.0:
            raise ValidationError("coupler penalty factor must be >= 1")

    @property
    def kappa_ghz(self) -> float:
        """Resonator linewidth f/Q."""
        return self.f_down_ghz / self.loaded_q

    @property
    def shift_in_linewidths(self) -> float:
        return self.state_shift_mhz * 1e-3 / self.kappa_ghz


@dataclass(frozen=True)
class ShotEnsemble:
    """Integrated single-shot voltages for one prepared state."""

    voltages: np.ndarray
    integration_time_us: float
    prepared_state: str
    seed: int

    def __post_init__(self):
        v = np.asarray(self.voltages, dtype=float)
        if v.size == 0:
            raise ValidationError("shot ensemble must be nonempty")
        if self.integration_time_us <= 0:
            raise ValidationError("integration time must be positive")
        if self.prepared_state not in ("up", "down"):
            raise ValidationError("prepared_state must be 'up' or 'down'")
        v.setflags(write=False)
        object.__setattr__(self, "voltages", v)


@dataclass(frozen=True)
class DiscriminationResult:
    threshold: float
    mean_down: float
    mean_up: float
    sigma_down: float
    sigma_up: float
    separation_sigma: float
    fidelity_estimate: float
    analytic_error: float
    n_misclassified: int
    low_confidence: bool


def qubit_flux_into_squid(ip_na: float, mutual_ph: float) -> float:
    """Flux signal Ip * M coupled into the readout SQUID, in mPhi0."""
    if ip_na <= 0 or mutual_ph <= 0:
        raise ValidationError("persistent current and mutual must be positive")
    return wb_to_mphi0(flux_wb(ip_na, mutual_ph))


def resonator_transmission(params: ResonatorParams, qubit_state: str,
                           probe_frequency_ghz: float) -> float:
    """Notch-filter transmission magnitude at the probe frequency.

    |S| = 1 - depth / sqrt(1 + (2 (f - f_r) / kappa)^2), where the resonance
    f_r sits at f_down for |down> and f_down + shift for |up>.
    """
    if qubit_state not in ("up", "down"):
        raise ValidationError("qubit_state must be 'up' or 'down'")
    f_r = params.f_down_ghz
    if qubit_state == "up":
        f_r = f_r + params.state_shift_mhz * 1e-3
    detune = 2.0 * (probe_frequency_ghz - f_r) / params.kappa_ghz
    return 1.0 - params.notch_depth / np.sqrt(1.0 + detune * detune)


def _default_state_contrast() -> float:
    p = ResonatorParams()
    return resonator_transmission(p, "up", p.f_down_ghz) - resonator_transmission(
        p, "down", p.f_down_ghz)


SIGMA_UNIT = _default_state_contrast() * np.sqrt(10.0) / 11.0
"""Voltage noise for a 1 us integration, calibrated once so the default
resonator probed at f_down for 10 us separates the two states by 11 sigma."""


def shot_noise_sigma(integration_time_us: float, sigma_unit: float = SIGMA_UNIT) -> float:
    if integration_time_us <= 0:
        raise ValidationError("integration time must be positive")
    return sigma_unit / np.sqrt(integration_time_us)


def single_shot(params: ResonatorParams, prepared_state: str,
                probe_frequency_ghz: float, integration_time_us: float,
                seed: int, sigma_unit: float = SIGMA_UNIT) -> float:
    """One integrated readout voltage: mean transmission plus seeded noise."""
    mean = resonator_transmission(params, prepared_state, probe_frequency_ghz)
    sigma = shot_noise_sigma(integration_time_us, sigma_unit)
    rng = np.random.default_rng(seed)
    return float(mean + sigma * rng.standard_normal())


def acquire_shots(params: ResonatorParams, prepared_state: str, n_shots: int,
                  probe_frequency_ghz: float | None = None,
                  integration_time_us: float = 10.0, seed: int = 0,
                  sigma_unit: float = SIGMA_UNIT) -> ShotEnsemble:
    """Seeded ensemble of single shots for one prepared state."""
    if n_shots < 1:
        raise ValidationError("need at least one shot")
    if probe_frequency_ghz is None:
        probe_frequency_ghz = params.f_down_ghz
    mean = resonator_transmission(params, prepared_state, probe_frequency_ghz)
    sigma = shot_noise_sigma(integration_time_us, sigma_unit)
    rng = np.random.default_rng(seed)
    v = mean + sigma * rng.standard_normal(n_shots)
    return ShotEnsemble(voltages=v, integration_time_us=integration_time_us,
                        prepared_state=prepared_state, seed=seed)


def _equal_likelihood_threshold(mu_a: float, s_a: float, mu_b: float, s_b: float) -> float:
    """Crossing point of two Gaussian densities, between the two means.

    Reduces to the midpoint for equal sigmas; degenerate (zero-sigma)
    inputs also fall back to the midpoint.
    """
    if s_a <= 0 or s_b <= 0 or abs(s_a - s_b) < 1e-12 * max(s_a, s_b):
        return 0.5 * (mu_a + mu_b)
    a = 1.0 / s_a**2 - 1.0 / s_b**2
    b = -2.0 * (mu_a / s_a**2 - mu_b / s_b**2)
    c = mu_a**2 / s_a**2 - mu_b**2 / s_b**2 + 2.0 * np.log(s_a / s_b)
    disc = b * b - 4.0 * a * c
    if disc < 0:
        return 0.5 * (mu_a + mu_b)
    roots = np.array([(-b - np.sqrt(disc)) / (2 * a), (-b + np.sqrt(disc)) / (2 * a)])
    lo, hi = sorted((mu_a, mu_b))
    inside = roots[(roots >= lo) & (roots <= hi)]
    if inside.size:
        return float(inside[0])
    return float(roots[np.argmin(np.abs(roots - 0.5 * (mu_a + mu_b)))])


def discriminate(down_shots: ShotEnsemble, up_shots: ShotEnsemble,
                 min_shots: int = 1000) -> DiscriminationResult:
    """Fit per-state Gaussians, threshold, and estimate readout fidelity.

    analytic_error is the overlap error of the fitted Gaussians,
    0.5 * erfc(separation / (2 sqrt(2))); fidelity_estimate counts actual
    misclassified shots against the threshold. Separations under one sigma
    set the low-confidence flag but still return a result.
    """
    if down_shots.prepared_state != "down" or up_shots.prepared_state != "up":
        raise ValidationError("pass (down, up) ensembles in that order")
    if down_shots.voltages.size < min_shots or up_shots.voltages.size < min_shots:
        raise ValidationError(f"need at least {min_shots} shots per state")

    mean_down = float(np.mean(down_shots.voltages))
    mean_up = float(np.mean(up_shots.voltages))
    sigma_down = float(np.std(down_shots.voltages, ddof=1))
    sigma_up = float(np.std(up_shots.voltages, ddof=1))

    avg_sigma = 0.5 * (sigma_up + sigma_down)
    separation = abs(mean_up - mean_down) / avg_sigma if avg_sigma > 0 else np.inf

    threshold = _equal_likelihood_threshold(mean_down, sigma_down, mean_up, sigma_up)

    # orientation: up is the high-transmission side with the default probe
    if mean_up >= mean_down:
        n_bad = int(np.sum(down_shots.voltages >= threshold)
                    + np.sum(up_shots.voltages < threshold))
    else:
        n_bad = int(np.sum(down_shots.voltages < threshold)
                    + np.sum(up_shots.voltages >= threshold))
    n_total = down_shots.voltages.size + up_shots.voltages.size

    analytic_error = float(0.5 * erfc(separation / (2.0 * np.sqrt(2.0)))) \
        if np.isfinite(separation) else 0.0
    return DiscriminationResult(
        threshold=threshold,
        mean_down=mean_down,
        mean_up=mean_up,
        sigma_down=sigma_down,
        sigma_up=sigma_up,
        separation_sigma=float(separation) if np.isfinite(separation) else np.inf,
        fidelity_estimate=1.0 - n_bad / n_total,
        analytic_error=analytic_error,
        n_misclassified=n_bad,
        low_confidence=separation < 1.0,
    )


def readout_backaction(params: ResonatorParams, anneal_t1_us: float) -> float:
    """Effective T1 during the anneal given the coupler state.

    With the tunable coupler disengaged the qubit is isolated from the lossy
    resonator and keeps its anneal T1; engaged, T1 drops by the configured
    penalty factor. Pure bookkeeping that feeds the anneal-engine noise rates.
    """
    if anneal_t1_us <= 0:
        raise ValidationError("anneal T1 must be positive")
    if params.coupler_engaged:
        return anneal_t1_us / params.coupler_penalty_factor
    return anneal_t1_us
