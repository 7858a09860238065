"""Time-domain coherence characterization: relaxation and Ramsey traces.

Synthetic traces are drawn from the device's hidden coherence parameters at
the requested operating persistent current; the fitters recover T1 and T2*
from the noisy traces alone, as an instrument would.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

from .device import DeviceTruth, effective_coherence
from .errors import NumericalError, ValidationError

DEFAULT_RAMSEY_DETUNING_MHZ = 8.0
"""Default artificial detuning. With the default 60-point window of three
decay times this yields >3 visible oscillation periods, enough to pin the
frequency and envelope independently."""


# ---------------------------------------------------------------------------
# containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecayTrace:
    """One measured population-vs-delay trace."""

    times_ns: np.ndarray
    values: np.ndarray
    kind: str  # "t1" | "ramsey"
    qubit: int
    ip_na: float
    detuning_mhz: float = 0.0
    seed: int = 0

    def __post_init__(self):
        t = np.asarray(self.times_ns, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape:
            raise ValidationError("times and values must be matching 1D arrays")
        if np.any(np.diff(t) <= 0) or t[0] < 0:
            raise ValidationError("times must be nonnegative and strictly increasing")
        if self.kind not in ("t1", "ramsey"):
            raise ValidationError(f"unknown trace kind {self.kind!r}")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "times_ns", t)
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class T1Fit:
    t1_us: float
    amplitude: float
    offset: float
    residual_rms: float
    n_points: int


@dataclass(frozen=True)
class RamseyFit:
    t2_star_ns: float
    detuning_mhz: float
    amplitude: float
    offset: float
    phase_rad: float
    residual_rms: float
    n_points: int


@dataclass(frozen=True)
class CoherenceReport:
    qubit: int
    ip_na: float
    t1_trace: DecayTrace
    ramsey_trace: DecayTrace
    t1_fit: T1Fit
    ramsey_fit: RamseyFit


# ---------------------------------------------------------------------------
# trace synthesis
# ---------------------------------------------------------------------------

def default_t1_times_ns(t1_ns: float, n_points: int = 25) -> np.ndarray:
    return np.geomspace(t1_ns / 50.0, 4.0 * t1_ns, n_points)


def default_ramsey_times_ns(t2_ns: float, n_points: int = 60) -> np.ndarray:
    # start slightly above zero to keep the grid strictly increasing from 0
    return np.linspace(0.0, 3.0 * t2_ns, n_points)


def _resolve_ip(device: DeviceTruth, qubit: int, ip_na: float | None) -> float:
    if ip_na is None:
        return device.qubits[qubit].persistent_current_na
    if ip_na <= 0:
        raise ValidationError("operating persistent current must be positive")
    return float(ip_na)


def t1_trace(device: DeviceTruth, qubit: int = 0, ip_na: float | None = None,
             times_ns: np.ndarray | None = None, noise_sigma: float | None = None,
             seed: int = 0) -> DecayTrace:
    """Excited-population relaxation trace P(t) = exp(-t/T1) plus noise."""
    ip = _resolve_ip(device, qubit, ip_na)
    t1_us, _ = effective_coherence(device, qubit, ip)
    t1_ns = t1_us * 1e3
    if times_ns is None:
        times_ns = default_t1_times_ns(t1_ns)
    times_ns = np.asarray(times_ns, dtype=float)
    if times_ns.size < 6:
        raise ValidationError("relaxation trace needs at least 6 delay points")
    if noise_sigma is None:
        noise_sigma = device.config.noise.trace_noise_sigma
    rng = np.random.default_rng(seed)
    values = np.exp(-times_ns / t1_ns) + noise_sigma * rng.standard_normal(times_ns.size)
    return DecayTrace(times_ns=times_ns, values=values, kind="t1", qubit=qubit,
                      ip_na=ip, seed=seed)


def ramsey_trace(device: DeviceTruth, qubit: int = 0, ip_na: float | None = None,
                 detuning_mhz: float = DEFAULT_RAMSEY_DETUNING_MHZ,
                 times_ns: np.ndarray | None = None,
                 noise_sigma: float | None = None, seed: int = 0) -> DecayTrace:
    """Ramsey fringe 1/2 + 1/2 exp(-t/T2*) cos(2 pi f t) plus noise.

    The delay window must span at least 3 detuning periods with at least
    4 samples per period; otherwise the frequency and the envelope are not
    independently constrained and the request is rejected.
    """
    ip = _resolve_ip(device, qubit, ip_na)
    _, t2_ns = effective_coherence(device, qubit, ip)
    if detuning_mhz <= 0:
        raise ValidationError("detuning must be positive")
    if times_ns is None:
        times_ns = default_ramsey_times_ns(t2_ns)
    times_ns = np.asarray(times_ns, dtype=float)
    if times_ns.size < 12:
        raise ValidationError("Ramsey trace needs at least 12 delay points")

    f_ghz = detuning_mhz * 1e-3
    span = times_ns[-1] - times_ns[0]
    if span * f_ghz < 3.0:
        raise ValidationError(
            f"delay window spans {span * f_ghz:.2f} detuning periods; need >= 3")
    if np.max(np.diff(times_ns)) > 0.25 / f_ghz:
        raise ValidationError("sampling coarser than 4 points per detuning period")

    if noise_sigma is None:
        noise_sigma = device.config.noise.trace_noise_sigma
    rng = np.random.default_rng(seed)
    values = (0.5 + 0.5 * np.exp(-times_ns / t2_ns)
              * np.cos(2.0 * np.pi * f_ghz * times_ns)
              + noise_sigma * rng.standard_normal(times_ns.size))
    return DecayTrace(times_ns=times_ns, values=values, kind="ramsey", qubit=qubit,
                      ip_na=ip, detuning_mhz=detuning_mhz, seed=seed)


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------

def _exp_model(t, amp, tau, off):
    return amp * np.exp(-t / tau) + off


def _ramsey_model(t, amp, tau, f, phase, off):
    return off + amp * np.exp(-t / tau) * np.cos(2.0 * np.pi * f * t + phase)


def fit_t1(trace: DecayTrace) -> T1Fit:
    """Exponential fit of a relaxation trace; raises on non-convergence."""
    if trace.kind != "t1":
        raise ValidationError("fit_t1 expects a relaxation trace")
    t, y = trace.times_ns, trace.values
    off0 = float(np.mean(y[-max(3, y.size // 8):]))
    amp0 = float(y[0] - off0)
    if amp0 <= 0:
        amp0 = max(float(np.max(y) - off0), 0.1)
    # log-linear slope on the early, clearly-decaying part of the trace
    mask = (y - off0) > 0.1 * amp0
    if mask.sum() >= 3:
        slope = np.polyfit(t[mask], np.log(y[mask] - off0), 1)[0]
        tau0 = -1.0 / slope if slope < 0 else t[-1] / 2.0
    else:
        tau0 = t[-1] / 2.0
    tau0 = float(np.clip(tau0, t[1] / 10.0, t[-1] * 10.0))

    bounds = ([0.0, t[1] / 100.0, -0.5], [2.0, t[-1] * 100.0, 0.5])
    attempts = []
    for scale in (1.0, 0.3, 3.0, 10.0):
        p0 = [amp0, tau0 * scale, off0]
        try:
            popt, _ = curve_fit(_exp_model, t, y, p0=p0, bounds=bounds, maxfev=20000)
        except (RuntimeError, ValueError) as exc:
            attempts.append(str(exc))
            continue
        resid = y - _exp_model(t, *popt)
        return T1Fit(t1_us=float(popt[1]) / 1e3, amplitude=float(popt[0]),
                     offset=float(popt[2]),
                     residual_rms=float(np.sqrt(np.mean(resid**2))),
                     n_points=y.size)
    raise NumericalError(
        "relaxation fit did not converge",
        diagnostic={"model": "amp*exp(-t/tau)+off", "initial_tau_ns": tau0,
                    "n_restarts": len(attempts), "errors": attempts})


def _fft_frequency_guess(t: np.ndarray, y: np.ndarray) -> float:
    """Dominant oscillation frequency (GHz) from a resampled periodogram."""
    n = 256
    tu = np.linspace(t[0], t[-1], n)
    yu = np.interp(tu, t, y - np.mean(y))
    spec = np.abs(np.fft.rfft(yu * np.hanning(n)))
    freqs = np.fft.rfftfreq(n, d=tu[1] - tu[0])
    k = int(np.argmax(spec[1:])) + 1
    if 1 <= k < spec.size - 1:
        lm, l0, lp = np.log(spec[k - 1] + 1e-300), np.log(spec[k] + 1e-300), \
            np.log(spec[k + 1] + 1e-300)
        denom = lm - 2 * l0 + lp
        if abs(denom) > 1e-12:
            k = k + float(np.clip(0.5 * (lm - lp) / denom, -0.5, 0.5))
    return float(k * (freqs[1] - freqs[0]))


def fit_ramsey(trace: DecayTrace) -> RamseyFit:
    """Damped-cosine fit of a Ramsey trace; raises on non-convergence."""
    if trace.kind != "ramsey":
        raise ValidationError("fit_ramsey expects a Ramsey trace")
    t, y = trace.times_ns, trace.values
    off0 = float(np.mean(y))
    amp0 = float(0.5 * (np.max(y) - np.min(y)))
    f0 = _fft_frequency_guess(t, y)
    span = t[-1] - t[0]
    if f0 <= 0.5 / span:
        f0 = 3.0 / span
    tau0 = span / 3.0

    dt_min = float(np.min(np.diff(t)))
    bounds = ([0.05, t[1] / 100.0 if t[0] == 0 else t[0] / 10.0, 0.5 / span,
               -np.pi, 0.0],
              [1.0, span * 100.0, 0.5 / dt_min, np.pi, 1.0])
    attempts = []
    best = None
    best_rms = np.inf
    for fs in (1.0, 0.5, 2.0):
        for ph0 in (0.0, 1.5):
            p0 = [amp0, tau0, f0 * fs, ph0, off0]
            p0[2] = float(np.clip(p0[2], bounds[0][2], bounds[1][2]))
            try:
                popt, _ = curve_fit(_ramsey_model, t, y, p0=p0, bounds=bounds,
                                    maxfev=20000)
            except (RuntimeError, ValueError) as exc:
                attempts.append(str(exc))
                continue
            resid = y - _ramsey_model(t, *popt)
            rms = float(np.sqrt(np.mean(resid**2)))
            if rms < best_rms:
                best, best_rms = popt, rms
            if rms < 0.25 * amp0:
                break
        if best_rms < 0.25 * amp0:
            break
    # a fit that leaves less than half the fringe amplitude unexplained is
    # usable; anything worse means the optimizer never found the oscillation
    if best is not None and best_rms < 0.5 * amp0:
        return RamseyFit(t2_star_ns=float(best[1]), detuning_mhz=float(best[2]) * 1e3,
                         amplitude=float(best[0]), offset=float(best[4]),
                         phase_rad=float(best[3]), residual_rms=best_rms,
                         n_points=y.size)
    raise NumericalError(
        "Ramsey fit did not converge",
        diagnostic={"model": "off+amp*exp(-t/tau)*cos(2*pi*f*t+phase)",
                    "initial_frequency_ghz": f0, "n_restarts": len(attempts),
                    "errors": attempts})


def characterize_qubit(device: DeviceTruth, qubit: int = 0,
                       ip_na: float | None = None,
                       detuning_mhz: float = DEFAULT_RAMSEY_DETUNING_MHZ,
                       noise_sigma: float | None = None,
                       seed: int = 0) -> CoherenceReport:
    """Acquire and fit both coherence traces for one qubit."""
    tr1 = t1_trace(device, qubit, ip_na=ip_na, noise_sigma=noise_sigma, seed=seed)
    tr2 = ramsey_trace(device, qubit, ip_na=ip_na, detuning_mhz=detuning_mhz,
                       noise_sigma=noise_sigma, seed=seed + 1)
    return CoherenceReport(qubit=qubit, ip_na=tr1.ip_na, t1_trace=tr1,
                           ramsey_trace=tr2, t1_fit=fit_t1(tr1),
                           ramsey_fit=fit_ramsey(tr2))
