"""Closed and open anneal dynamics.

Schroedinger / Lindblad integration with H in GHz and time in ns; the RHS
carries the 2*pi conversion so phases are f*t cycles. Open evolution
supports pure dephasing in either the instantaneous energy eigenbasis or
the computational basis, plus thermal relaxation between instantaneous
eigenstates with detailed balance.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from ..errors import NumericalError, ValidationError
from .ising import (
    MAX_QUBITS_OPEN,
    IsingProblem,
    ground_states,
    problem_hz_diag,
    sum_sigma_x,
)
from .schedules import AnnealSchedule

_TWO_PI = 2.0 * np.pi
_DEGEN_TOL = 1e-7  # GHz; eigenvalues closer than this form one subspace


@dataclass(frozen=True)
class DephasingSpec:
    """Pure dephasing channel.

    basis "eigen": projectors onto instantaneous energy eigenspaces; kills
    inter-level coherence but never moves population between levels.
    basis "computational": sigma_z on every qubit at a rate chosen so a
    single-qubit superposition loses coherence at the same rate_per_ns.
    """

    basis: str
    rate_per_ns: float

    def __post_init__(self):
        if self.basis not in ("eigen", "computational"):
            raise ValidationError("dephasing basis must be 'eigen' or 'computational'")
        if self.rate_per_ns < 0:
            raise ValidationError("dephasing rate must be nonnegative")


@dataclass(frozen=True)
class RelaxationSpec:
    """Thermal relaxation between instantaneous eigenstates.

    Transition m -> k proceeds at coupling_rate_per_ns * (w / cutoff_ghz) /
    (1 - exp(-w / T)) with w = E_m - E_k in GHz and T = temperature_ghz
    (temperature expressed as k_B T / h). Upward and downward rates obey
    detailed balance exactly.
    """

    coupling_rate_per_ns: float
    temperature_ghz: float
    cutoff_ghz: float = 1.0

    def __post_init__(self):
        if self.coupling_rate_per_ns < 0:
            raise ValidationError("coupling rate must be nonnegative")
        if self.temperature_ghz < 0:
            raise ValidationError("temperature must be nonnegative")
        if self.cutoff_ghz <= 0:
            raise ValidationError("cutoff must be positive")

    def rate(self, omega_ghz) -> np.ndarray:
        """Transition rate (1/ns) for energy drop omega (absorption if < 0)."""
        w = np.asarray(omega_ghz, dtype=float)
        c = self.coupling_rate_per_ns / self.cutoff_ghz
        if self.temperature_ghz == 0.0:
            return np.where(w > 0, c * w, 0.0)
        x = w / self.temperature_ghz
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            out = np.where(np.abs(x) < 1e-10,
                           c * self.temperature_ghz,
                           c * w / (-np.expm1(-x)))
        return np.nan_to_num(out, nan=c * self.temperature_ghz, posinf=0.0)


@dataclass(frozen=True)
class ClosedResult:
    times_ns: np.ndarray
    s_values: np.ndarray
    populations: np.ndarray  # (n_store, dim) computational-basis probabilities
    low_level_population: np.ndarray  # population in the lowest-g levels vs time
    psi_final: np.ndarray
    ground_space_population: float
    ground_degeneracy: int
    norm_error: float

    @property
    def success_probability(self) -> float:
        return self.ground_space_population


@dataclass(frozen=True)
class OpenResult:
    times_ns: np.ndarray
    s_values: np.ndarray
    populations: np.ndarray
    low_level_population: np.ndarray
    rho_final: np.ndarray
    ground_space_population: float
    ground_degeneracy: int
    trace_error: float
    purity_final: float

    @property
    def success_probability(self) -> float:
        return self.ground_space_population


def _linear_s(t: float, t_total: float) -> float:
    return t / t_total


def ground_state(problem: IsingProblem, schedule: AnnealSchedule, s: float
                 ) -> np.ndarray:
    """Instantaneous ground state of H(s); warns if it is degenerate."""
    sx = sum_sigma_x(problem.n)
    hz = problem_hz_diag(problem)
    h = -0.5 * float(schedule.a(s)) * sx
    h[np.diag_indices_from(h)] += 0.5 * float(schedule.b(s)) * hz
    vals, vecs = np.linalg.eigh(h)
    if vals.size > 1 and vals[1] - vals[0] < _DEGEN_TOL:
        warnings.warn(f"ground state at s={s} is degenerate; returning one "
                      "eigenvector of the ground space", stacklevel=2)
    return vecs[:, 0].astype(complex)


def thermal_state(problem: IsingProblem, schedule: AnnealSchedule, s: float,
                  temperature_ghz: float) -> np.ndarray:
    """Gibbs state of H(s) at the given temperature (k_B T / h in GHz)."""
    if temperature_ghz <= 0:
        raise ValidationError("temperature must be positive for a Gibbs state")
    sx = sum_sigma_x(problem.n)
    hz = problem_hz_diag(problem)
    h = -0.5 * float(schedule.a(s)) * sx
    h[np.diag_indices_from(h)] += 0.5 * float(schedule.b(s)) * hz
    vals, vecs = np.linalg.eigh(h)
    w = np.exp(-(vals - vals[0]) / temperature_ghz)
    w /= w.sum()
    return (vecs * w) @ vecs.conj().T


def _low_level_population_state(h: np.ndarray, psi: np.ndarray, g: int) -> float:
    vals, vecs = np.linalg.eigh(h)
    amps = vecs[:, :g].conj().T @ psi
    return float(np.real(np.sum(np.abs(amps) ** 2)))


def _low_level_population_rho(h: np.ndarray, rho: np.ndarray, g: int) -> float:
    vals, vecs = np.linalg.eigh(h)
    sub = vecs[:, :g]
    return float(np.real(np.trace(sub.conj().T @ rho @ sub)))


def evolve_closed(problem: IsingProblem, schedule: AnnealSchedule,
                  t_total_ns: float, s_of_t=None,
                  psi0: np.ndarray | None = None,
                  rtol: float = 1e-9, atol: float = 1e-12,
                  n_store: int = 51) -> ClosedResult:
    """Integrate the Schroedinger equation along the anneal.

    The state starts in the instantaneous ground state at s(0) unless psi0
    is given. low_level_population tracks the weight in the lowest-g
    instantaneous levels, g being the classical ground degeneracy, so its
    final value is the anneal success probability.
    """
    if t_total_ns <= 0:
        raise ValidationError("anneal time must be positive")
    if n_store < 2:
        raise ValidationError("need at least 2 stored points")
    s_fun = (lambda t: _linear_s(t, t_total_ns)) if s_of_t is None else s_of_t

    sx = sum_sigma_x(problem.n)
    hz = problem_hz_diag(problem)
    dim = problem.dim
    _, gs = ground_states(problem)
    g = len(gs)

    def h_at(s: float) -> np.ndarray:
        h = -0.5 * float(schedule.a(s)) * sx
        h[np.diag_indices_from(h)] += 0.5 * float(schedule.b(s)) * hz
        return h

    if psi0 is None:
        vals, vecs = np.linalg.eigh(h_at(s_fun(0.0)))
        psi0 = vecs[:, 0].astype(complex)
    else:
        psi0 = np.asarray(psi0, dtype=complex)
        if psi0.shape != (dim,):
            raise ValidationError(f"initial state must have shape ({dim},)")
        nrm = np.linalg.norm(psi0)
        if abs(nrm - 1.0) > 1e-6:
            raise ValidationError("initial state must be normalized")

    def rhs(t, y):
        s = s_fun(t)
        a = float(schedule.a(s))
        b = float(schedule.b(s))
        hy = -0.5 * a * (sx @ y) + 0.5 * b * (hz * y)
        return -1j * _TWO_PI * hy

    t_eval = np.linspace(0.0, t_total_ns, n_store)
    sol = solve_ivp(rhs, (0.0, t_total_ns), psi0, method="DOP853",
                    t_eval=t_eval, rtol=rtol, atol=atol)
    if not sol.success:
        raise NumericalError("closed evolution failed",
                             diagnostic={"message": sol.message, "rtol": rtol,
                                         "t_total_ns": t_total_ns})

    states = sol.y.T  # (n_store, dim)
    norm_err = float(abs(np.linalg.norm(states[-1]) - 1.0))
    if norm_err > 1e-3:
        raise NumericalError("norm drift exceeds 1e-3; tighten tolerances",
                             diagnostic={"norm_error": norm_err, "rtol": rtol})

    s_values = np.array([s_fun(t) for t in t_eval])
    populations = np.abs(states) ** 2
    low = np.array([_low_level_population_state(h_at(sv), st, g)
                    for sv, st in zip(s_values, states)])
    psi_final = states[-1] / np.linalg.norm(states[-1])
    ground_pop = float(np.sum(np.abs(psi_final[gs]) ** 2)) if abs(
        s_values[-1] - 1.0) < 1e-9 else float(low[-1])
    return ClosedResult(times_ns=t_eval, s_values=s_values,
                        populations=populations, low_level_population=low,
                        psi_final=psi_final, ground_space_population=ground_pop,
                        ground_degeneracy=g, norm_error=norm_err)


def _sigma_z_outer_sum(n: int) -> np.ndarray:
    """W[j,k] = sum_i z_i[j] z_i[k]; the computational dephasing mask."""
    k = np.arange(2 ** n)
    bits = (k[None, :] >> (n - 1 - np.arange(n)[:, None])) & 1
    z = 1.0 - 2.0 * bits
    return z.T @ z


def _group_starts(vals: np.ndarray) -> np.ndarray:
    """Boolean group id per eigenvalue, splitting where gaps exceed tolerance."""
    return np.concatenate([[0], np.cumsum(np.diff(vals) > _DEGEN_TOL)])


def evolve_open(problem: IsingProblem, schedule: AnnealSchedule,
                t_total_ns: float, dephasing: DephasingSpec | None = None,
                relaxation: RelaxationSpec | None = None, s_of_t=None,
                rho0: np.ndarray | None = None,
                rtol: float = 1e-8, atol: float = 1e-10,
                n_store: int = 31) -> OpenResult:
    """Integrate the Lindblad equation along the anneal.

    Eigenbasis dephasing uses projectors onto the instantaneous eigenspaces
    (degenerate levels are grouped, so the channel is basis-independent
    within each subspace and moves no population between levels).
    Relaxation jumps act between instantaneous eigenstates regardless of the
    dephasing basis choice.
    """
    if problem.n > MAX_QUBITS_OPEN:
        raise ValidationError(f"open dynamics limited to {MAX_QUBITS_OPEN} qubits")
    if t_total_ns <= 0:
        raise ValidationError("anneal time must be positive")
    s_fun = (lambda t: _linear_s(t, t_total_ns)) if s_of_t is None else s_of_t

    sx = sum_sigma_x(problem.n)
    hz = problem_hz_diag(problem)
    dim = problem.dim
    _, gs = ground_states(problem)
    g = len(gs)
    w_mask = _sigma_z_outer_sum(problem.n) if (
        dephasing is not None and dephasing.basis == "computational") else None
    need_eigh = relaxation is not None or (
        dephasing is not None and dephasing.basis == "eigen")

    def h_at(s: float) -> np.ndarray:
        h = -0.5 * float(schedule.a(s)) * sx
        h[np.diag_indices_from(h)] += 0.5 * float(schedule.b(s)) * hz
        return h

    if rho0 is None:
        vals, vecs = np.linalg.eigh(h_at(s_fun(0.0)))
        psi = vecs[:, 0].astype(complex)
        rho0 = np.outer(psi, psi.conj())
    else:
        rho0 = np.asarray(rho0, dtype=complex)
        if rho0.shape != (dim, dim):
            raise ValidationError(f"initial density matrix must be ({dim},{dim})")
        if abs(np.trace(rho0).real - 1.0) > 1e-9 or not np.allclose(
                rho0, rho0.conj().T, atol=1e-9):
            raise ValidationError("initial density matrix must be Hermitian "
                                  "with unit trace")

    def rhs(t, y):
        s = s_fun(t)
        h = h_at(s)
        rho = y.reshape(dim, dim)
        drho = -1j * _TWO_PI * (h @ rho - rho @ h)

        if w_mask is not None:
            # gamma/2 sum_i (Z rho Z - rho), elementwise in this basis
            drho = drho + 0.5 * dephasing.rate_per_ns * (w_mask - problem.n) * rho

        if need_eigh:
            vals, vecs = np.linalg.eigh(h)
            rho_e = vecs.conj().T @ rho @ vecs
            d_e = np.zeros_like(rho_e)
            if dephasing is not None and dephasing.basis == "eigen":
                groups = _group_starts(vals)
                same = groups[:, None] == groups[None, :]
                d_e += dephasing.rate_per_ns * (np.where(same, rho_e, 0.0) - rho_e)
            if relaxation is not None:
                omega = vals[:, None] - vals[None, :]  # E_m - E_k
                rates = relaxation.rate(omega)
                np.fill_diagonal(rates, 0.0)
                gamma_out = rates.sum(axis=1)
                gain = rates.T @ np.real(np.diag(rho_e))
                d_e += np.diag(gain) - 0.5 * (
                    gamma_out[:, None] + gamma_out[None, :]) * rho_e
            drho = drho + vecs @ d_e @ vecs.conj().T

        return drho.reshape(-1)

    t_eval = np.linspace(0.0, t_total_ns, n_store)
    sol = solve_ivp(rhs, (0.0, t_total_ns), rho0.reshape(-1), method="DOP853",
                    t_eval=t_eval, rtol=rtol, atol=atol)
    if not sol.success:
        raise NumericalError("open evolution failed",
                             diagnostic={"message": sol.message, "rtol": rtol,
                                         "t_total_ns": t_total_ns})

    rhos = sol.y.T.reshape(n_store, dim, dim)
    rho_final = 0.5 * (rhos[-1] + rhos[-1].conj().T)
    trace_err = float(abs(np.trace(rho_final).real - 1.0))
    if trace_err > 1e-4:
        raise NumericalError("trace drift exceeds 1e-4; tighten tolerances",
                             diagnostic={"trace_error": trace_err, "rtol": rtol})

    s_values = np.array([s_fun(t) for t in t_eval])
    populations = np.real(np.diagonal(rhos, axis1=1, axis2=2))
    low = np.array([_low_level_population_rho(h_at(sv), r, g)
                    for sv, r in zip(s_values, rhos)])
    ground_pop = float(np.real(np.sum(populations[-1][gs]))) if abs(
        s_values[-1] - 1.0) < 1e-9 else float(low[-1])
    purity = float(np.real(np.trace(rho_final @ rho_final)))
    return OpenResult(times_ns=t_eval, s_values=s_values, populations=populations,
                      low_level_population=low, rho_final=rho_final,
                      ground_space_population=ground_pop, ground_degeneracy=g,
                      trace_error=trace_err, purity_final=purity)
