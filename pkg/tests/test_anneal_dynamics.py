"""Closed and open anneal dynamics against matrix-exponential and Gibbs oracles."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from fluxbed import ValidationError
from fluxbed.anneal import (
    AnnealSchedule,
    DephasingSpec,
    RelaxationSpec,
    afm_chain,
    evolve_closed,
    evolve_open,
    ground_state,
    k3_afm,
    linear_schedule,
    lz_crossing_schedule,
    single_spin,
    thermal_state,
)

from _oracles import kron_hamiltonian


def _constant_schedule(a, b):
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # deliberately non-standard envelope
        return AnnealSchedule(np.array([0.0, 1.0]), np.array([a, a]),
                              np.array([b, b]))


def lz_excitation(gap_ghz, sweep_ghz, t_ns):
    """Two-level crossing formula for the engineered linear sweep."""
    return float(np.exp(-np.pi**2 * gap_ghz**2 * t_ns / (2.0 * sweep_ghz)))


# ---------------------------------------------------------------------------
# closed dynamics
# ---------------------------------------------------------------------------

def test_closed_matches_matrix_exponential():
    """Constant H: the integrator must reproduce expm(-i 2 pi H t) exactly."""
    problem = afm_chain(2)
    sch = _constant_schedule(1.3, 0.9)
    t_ns = 2.0
    psi0 = np.zeros(4, dtype=complex)
    psi0[0] = 1.0
    res = evolve_closed(problem, sch, t_ns, psi0=psi0)
    h = kron_hamiltonian(problem, 1.3, 0.9)
    psi_ref = expm(-1j * 2.0 * np.pi * h * t_ns) @ psi0
    assert np.allclose(np.abs(res.psi_final) ** 2, np.abs(psi_ref) ** 2,
                       atol=1e-8)
    # global phase aside, the full amplitudes agree
    phase = psi_ref[np.argmax(np.abs(psi_ref))] / res.psi_final[
        np.argmax(np.abs(psi_ref))]
    assert np.allclose(res.psi_final * phase, psi_ref, atol=1e-7)
    assert res.norm_error < 1e-9


def test_closed_rabi_oscillation():
    """Pure driver on one qubit: P(|0>) = cos^2(pi A t) from |0>."""
    sch = _constant_schedule(0.25, 0.0)
    psi0 = np.array([1.0, 0.0], dtype=complex)
    for t_ns in (0.5, 1.0, 1.7):
        res = evolve_closed(single_spin(), sch, t_ns, psi0=psi0, n_store=3)
        assert res.populations[-1, 0] == pytest.approx(
            np.cos(np.pi * 0.25 * t_ns) ** 2, abs=1e-7)


def test_closed_adiabatic_k3():
    res = evolve_closed(k3_afm(), linear_schedule(), 50.0)
    assert res.ground_degeneracy == 6
    assert res.success_probability > 0.99
    assert res.norm_error < 1e-6
    # population never leaves the lowest 6 instantaneous levels by much
    assert res.low_level_population.min() > 0.95


def test_closed_stores_trajectory():
    res = evolve_closed(single_spin(), linear_schedule(), 10.0, n_store=21)
    assert res.times_ns.shape == (21,)
    assert res.s_values[0] == 0.0 and res.s_values[-1] == 1.0
    assert res.populations.shape == (21, 2)
    sums = res.populations.sum(axis=1)
    assert np.allclose(sums, 1.0, atol=1e-6)


def test_closed_landau_zener_formula():
    gap, sweep = 0.1, 2.0
    sch = lz_crossing_schedule(gap_ghz=gap, sweep_ghz=sweep)
    prev = 1.0
    for t_ns in (10.0, 40.0):
        res = evolve_closed(single_spin(), sch, t_ns)
        p_exc = 1.0 - res.success_probability
        assert p_exc < prev
        prev = p_exc
        assert p_exc == pytest.approx(lz_excitation(gap, sweep, t_ns), rel=0.02)


def test_closed_validation():
    with pytest.raises(ValidationError):
        evolve_closed(single_spin(), linear_schedule(), -1.0)
    with pytest.raises(ValidationError):
        evolve_closed(single_spin(), linear_schedule(), 1.0, n_store=1)
    with pytest.raises(ValidationError):
        evolve_closed(single_spin(), linear_schedule(), 1.0,
                      psi0=np.ones(3, dtype=complex))


def test_ground_state_helper():
    psi = ground_state(single_spin(), linear_schedule(), 0.0)
    # driver ground state is the uniform superposition
    assert np.allclose(np.abs(psi) ** 2, 0.5, atol=1e-12)
    with pytest.warns(UserWarning, match="degenerate"):
        ground_state(k3_afm(), linear_schedule(), 1.0)


# ---------------------------------------------------------------------------
# open dynamics
# ---------------------------------------------------------------------------

def test_open_reduces_to_closed_without_channels():
    problem = afm_chain(2)
    closed = evolve_closed(problem, linear_schedule(), 20.0)
    open_res = evolve_open(problem, linear_schedule(), 20.0)
    assert open_res.success_probability == pytest.approx(
        closed.success_probability, abs=1e-6)
    assert open_res.purity_final == pytest.approx(1.0, abs=1e-6)
    assert open_res.trace_error < 1e-8


def test_open_size_limit():
    with pytest.raises(ValidationError):
        evolve_open(afm_chain(7), linear_schedule(), 1.0)


def test_open_initial_state_validation():
    bad = np.eye(2, dtype=complex)  # trace 2
    with pytest.raises(ValidationError):
        evolve_open(single_spin(), linear_schedule(), 1.0, rho0=bad)


def test_eigenbasis_dephasing_is_innocuous():
    """Dephasing diagonal in the instantaneous basis does not move population."""
    problem = afm_chain(2)
    closed = evolve_closed(problem, linear_schedule(), 20.0)
    res = evolve_open(problem, linear_schedule(), 20.0,
                      dephasing=DephasingSpec("eigen", 0.05))
    assert res.success_probability == pytest.approx(
        closed.success_probability, abs=1e-3)


def test_computational_dephasing_destroys_success():
    problem = afm_chain(2)
    eigen = evolve_open(problem, linear_schedule(), 20.0,
                        dephasing=DephasingSpec("eigen", 0.05))
    comp = evolve_open(problem, linear_schedule(), 20.0,
                       dephasing=DephasingSpec("computational", 0.05))
    assert comp.success_probability < eigen.success_probability - 0.01
    assert comp.purity_final < eigen.purity_final


def test_dephasing_spec_validation():
    with pytest.raises(ValidationError):
        DephasingSpec("fourier", 0.1)
    with pytest.raises(ValidationError):
        DephasingSpec("eigen", -0.1)


# ---------------------------------------------------------------------------
# relaxation and thermodynamics
# ---------------------------------------------------------------------------

@given(omega=st.floats(0.05, 20.0, allow_nan=False),
       temp=st.floats(0.05, 20.0, allow_nan=False))
def test_relaxation_detailed_balance(omega, temp):
    spec = RelaxationSpec(coupling_rate_per_ns=0.1, temperature_ghz=temp)
    down = float(spec.rate(omega))
    up = float(spec.rate(-omega))
    assert down > 0
    assert up / down == pytest.approx(float(np.exp(-omega / temp)), rel=1e-9)


def test_relaxation_rate_limits():
    spec = RelaxationSpec(coupling_rate_per_ns=0.1, temperature_ghz=5.0)
    # omega -> 0: rate approaches c * T / cutoff
    assert float(spec.rate(1e-13)) == pytest.approx(0.1 * 5.0, rel=1e-6)
    cold = RelaxationSpec(coupling_rate_per_ns=0.1, temperature_ghz=0.0)
    assert float(cold.rate(2.0)) == pytest.approx(0.2)
    assert float(cold.rate(-2.0)) == 0.0
    with pytest.raises(ValidationError):
        RelaxationSpec(coupling_rate_per_ns=-0.1, temperature_ghz=1.0)
    with pytest.raises(ValidationError):
        RelaxationSpec(coupling_rate_per_ns=0.1, temperature_ghz=-1.0)
    with pytest.raises(ValidationError):
        RelaxationSpec(coupling_rate_per_ns=0.1, temperature_ghz=1.0,
                       cutoff_ghz=0.0)


def test_thermal_state_is_gibbs():
    problem = afm_chain(2)
    sch = linear_schedule()
    temp = 2.0
    rho = thermal_state(problem, sch, 1.0, temp)
    # at s = 1 the Hamiltonian is diagonal: populations follow exp(-E/T)
    from fluxbed.anneal import problem_hz_diag
    e = 0.5 * float(sch.b(1.0)) * problem_hz_diag(problem)
    w = np.exp(-(e - e.min()) / temp)
    w /= w.sum()
    assert np.allclose(np.real(np.diag(rho)), w, atol=1e-12)
    assert np.trace(rho).real == pytest.approx(1.0)
    with pytest.raises(ValidationError):
        thermal_state(problem, sch, 1.0, 0.0)


def test_relaxation_drives_to_gibbs():
    """Holding at s = 1 with thermal jumps equilibrates to the Gibbs state."""
    problem = k3_afm()
    sch = linear_schedule()
    temp = 5.0
    rho0 = np.eye(8, dtype=complex) / 8.0
    res = evolve_open(problem, sch, 200.0,
                      relaxation=RelaxationSpec(0.02, temp),
                      s_of_t=lambda t: 1.0, rho0=rho0)
    gibbs = np.real(np.diag(thermal_state(problem, sch, 1.0, temp)))
    assert np.max(np.abs(res.populations[-1] - gibbs)) < 1e-6
    assert res.trace_error < 1e-6


def test_relaxation_cools_toward_ground_space():
    """Cold bath during the anneal repairs diabatic errors instead of adding them."""
    problem = single_spin()
    sch = lz_crossing_schedule(gap_ghz=0.1, sweep_ghz=2.0)
    t_ns = 10.0
    closed = evolve_closed(problem, sch, t_ns)
    cold = evolve_open(problem, sch, t_ns,
                       relaxation=RelaxationSpec(0.5, 0.01))
    assert cold.success_probability > closed.success_probability
