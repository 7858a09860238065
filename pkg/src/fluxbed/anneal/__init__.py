"""Transverse-field Ising annealing: problems, schedules, spectra, dynamics."""

from .ising import (
    IsingProblem,
    afm_chain,
    classical_energy,
    ground_states,
    k3_afm,
    k3_afm_split,
    named_problem,
    problem_hz_diag,
    single_spin,
    sum_sigma_x,
)
from .schedules import AnnealSchedule, linear_schedule, lz_crossing_schedule
from .spectrum import GapResult, hamiltonian, instantaneous_spectrum, min_gap
from .dynamics import (
    ClosedResult,
    DephasingSpec,
    OpenResult,
    RelaxationSpec,
    evolve_closed,
    evolve_open,
    ground_state,
    thermal_state,
)

__all__ = [
    "IsingProblem", "afm_chain", "classical_energy", "ground_states", "k3_afm",
    "k3_afm_split", "named_problem", "problem_hz_diag", "single_spin",
    "sum_sigma_x",
    "AnnealSchedule", "linear_schedule", "lz_crossing_schedule",
    "GapResult", "hamiltonian", "instantaneous_spectrum", "min_gap",
    "ClosedResult", "DephasingSpec", "OpenResult", "RelaxationSpec",
    "evolve_closed", "evolve_open", "ground_state", "thermal_state",
]
