"""Acceptance gate: one test per headline requirement, one PASS/FAIL line each.

Each test times its own work, checks the stated tolerances, and prints a
single summary line that bypasses capture so the verdicts are visible in any
pytest run. A FAIL line is always accompanied by a failing assertion.
"""

import time

import numpy as np
import pytest

from fluxbed import (
    DeviceConfig,
    QubitParams,
    ResonatorParams,
    acquire_shots,
    build_device,
    calibrate_auto,
    characterize_qubit,
    discriminate,
    qubit_flux_into_squid,
    simulate_acquisition_time,
)
from fluxbed.anneal import (
    IsingProblem,
    afm_chain,
    evolve_closed,
    evolve_open,
    ground_states,
    instantaneous_spectrum,
    k3_afm,
    k3_afm_split,
    linear_schedule,
    lz_crossing_schedule,
    single_spin,
    DephasingSpec,
    RelaxationSpec,
)
from fluxbed.units import flux_wb, wb_to_mphi0

from _oracles import brute_force_ground_states, kron_hamiltonian


def _verdict(capsys, name: str, ok: bool, detail: str):
    with capsys.disabled():
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def test_calibration_round_trip(capsys):
    """Hidden 30% crosstalk and random offsets are removed automatically."""
    t0 = time.perf_counter()
    device = build_device(DeviceConfig(n_qubits=1, crosstalk_fraction=0.3,
                                       random_offsets=True, seed=12))
    result = calibrate_auto(device, seed=12)
    elapsed = time.perf_counter() - t0

    offdiag = result.verification.residual_offdiag_fraction
    center_rms = result.lattice_fit.residual_rms
    ok = offdiag < 0.01 and center_rms < 0.02 and elapsed < 30.0
    _verdict(capsys, "calibration round-trip",
             ok, f"residual off-diagonal {offdiag:.4f} (< 0.01), center rms "
                 f"{center_rms:.4f} flux units (< 0.02), {elapsed:.1f} s (< 30)")


def test_acquisition_speedup(capsys):
    """Ramped acquisition beats point-by-point rastering by >= 1000x."""
    t0 = time.perf_counter()
    raster = simulate_acquisition_time(101, 101, "raster", dwell_us=2.0,
                                       settle_ms=1000.0)
    sawtooth = simulate_acquisition_time(101, 101, "sawtooth", dwell_us=2.0,
                                         ramp_hz=500.0, n_averages=1000,
                                         n_lines_scanned=2, frame_overhead_s=2.0)
    elapsed = time.perf_counter() - t0

    # exact closed-form accounting for both modes
    raster_expect = 101 * 101 * (1000.0 * 1e-3 + 2.0 * 1e-6)
    sawtooth_expect = 2 * 1000 / 500.0 + 2.0
    speedup = raster.total_time_s / sawtooth.total_time_s
    hours = raster.total_time_s / 3600.0

    ok = (raster.total_time_s == pytest.approx(raster_expect, rel=1e-12)
          and sawtooth.total_time_s == pytest.approx(sawtooth_expect, rel=1e-12)
          and 2.5 < hours < 3.5
          and speedup >= 1000.0
          and 1.0 <= sawtooth.per_point_dwell_us <= 5.0
          and 100.0 <= sawtooth.ramp_frequency_hz <= 1000.0
          and elapsed < 1.0)
    _verdict(capsys, "acquisition speedup",
             ok, f"raster {hours:.2f} h vs sawtooth {sawtooth.total_time_s:.1f} s, "
                 f"speedup {speedup:.0f}x (>= 1000), exact formulas, "
                 f"{elapsed * 1e3:.0f} ms (< 1 s)")


def test_readout_fidelity(capsys):
    """Default operating point separates the states by 11 sigma."""
    t0 = time.perf_counter()
    params = ResonatorParams()
    n = 100_000
    down = acquire_shots(params, "down", n, probe_frequency_ghz=6.003,
                         integration_time_us=10.0, seed=0)
    up = acquire_shots(params, "up", n, probe_frequency_ghz=6.003,
                       integration_time_us=10.0, seed=1)
    res = discriminate(down, up)
    elapsed = time.perf_counter() - t0

    shift_lw = params.shift_in_linewidths
    ok = (abs(shift_lw - 14.0) < 1e-9
          and abs(res.separation_sigma - 11.0) <= 1.1
          and res.n_misclassified == 0
          and res.analytic_error < 1e-4
          and res.fidelity_estimate > 0.9999
          and elapsed < 10.0)
    _verdict(capsys, "readout fidelity",
             ok, f"shift {shift_lw:.1f} linewidths, separation "
                 f"{res.separation_sigma:.2f} sigma (11 +/- 10%), "
                 f"{res.n_misclassified}/{2 * n} misclassified, analytic error "
                 f"{res.analytic_error:.2e} (< 1e-4), fidelity "
                 f"{res.fidelity_estimate:.6f} (> 0.9999), {elapsed:.1f} s (< 10)")


def test_flux_signal_arithmetic(capsys):
    """100 nA through 50 pH couples 5.000e-18 Wb = 2.418 mPhi0 into the SQUID."""
    wb = flux_wb(100.0, 50.0)
    mphi0 = wb_to_mphi0(wb)
    via_helper = qubit_flux_into_squid(100.0, 50.0)
    ok = (wb == pytest.approx(5.000e-18, rel=1e-12)
          and mphi0 == pytest.approx(2.418, abs=5e-4)
          and via_helper == pytest.approx(mphi0, rel=1e-12))
    _verdict(capsys, "flux-signal arithmetic",
             ok, f"{wb:.3e} Wb = {mphi0:.3f} mPhi0 (expect 5.000e-18 Wb = 2.418)")


def test_characterization_fits(capsys):
    """Planted T1 = 3.5 us and T2* = 130 ns recovered at measurement noise."""
    t0 = time.perf_counter()
    device = build_device(DeviceConfig(n_qubits=1, seed=1))
    t1_errors, t2_errors = [], []
    for seed in range(100):
        rep = characterize_qubit(device, seed=seed, noise_sigma=0.02)
        t1_errors.append(abs(rep.t1_fit.t1_us - 3.5) / 3.5)
        t2_errors.append(abs(rep.ramsey_fit.t2_star_ns - 130.0) / 130.0)
    elapsed = time.perf_counter() - t0

    t1_med = float(np.median(t1_errors))
    t2_med = float(np.median(t2_errors))
    ok = t1_med < 0.05 and t2_med < 0.05 and elapsed < 10.0
    _verdict(capsys, "characterization fits",
             ok, f"median relative error over 100 seeds: T1 {t1_med:.3%}, "
                 f"T2* {t2_med:.3%} (both < 5%), {elapsed:.1f} s (< 10)")


def test_coherence_scaling(capsys):
    """T1 scales as 1/Ip^2 and Tphi as 1/Ip, exactly."""
    qp = QubitParams()
    checks = []
    for k in (2.0, 3.0, 10.0):
        t1_ratio = qp.effective_t1_us(100.0) / qp.effective_t1_us(100.0 * k)
        tphi_ratio = qp.effective_tphi_ns(100.0) / qp.effective_tphi_ns(100.0 * k)
        checks.append(t1_ratio == pytest.approx(k**2, rel=1e-12))
        checks.append(tphi_ratio == pytest.approx(k, rel=1e-12))
    ok = all(checks)
    _verdict(capsys, "coherence scaling",
             ok, "T1 ~ 1/Ip^2 and Tphi ~ 1/Ip exact at k = 2, 3, 10")


def test_anneal_engine_oracles(capsys):
    """Spectra and ground spaces of every small instance match brute force."""
    t0 = time.perf_counter()
    corpus = [
        single_spin(),
        single_spin(h=-0.7),
        afm_chain(2),
        afm_chain(3),
        k3_afm(),
        k3_afm_split(),
        IsingProblem(n=2, h=np.array([0.3, -0.8]), couplings={(0, 1): -0.5}),
        IsingProblem(n=3, h=np.array([0.1, 0.0, -0.2]),
                     couplings={(0, 2): 0.9, (1, 2): -0.4}),
    ]
    sch = linear_schedule()
    worst = 0.0
    ground_ok = True
    for problem in corpus:
        for s in (0.0, 0.25, 0.5, 0.75, 1.0):
            e = instantaneous_spectrum(problem, sch, s)
            ref = np.linalg.eigvalsh(
                kron_hamiltonian(problem, float(sch.a(s)), float(sch.b(s))))
            worst = max(worst, float(np.max(np.abs(e - ref))))
        e0, gs = ground_states(problem)
        e0_ref, gs_ref = brute_force_ground_states(problem)
        ground_ok = ground_ok and gs == gs_ref and abs(e0 - e0_ref) < 1e-12
    _, k3_gs = ground_states(k3_afm())
    elapsed = time.perf_counter() - t0

    ok = worst < 1e-10 and ground_ok and len(k3_gs) == 6 and elapsed < 5.0
    _verdict(capsys, "anneal engine oracles",
             ok, f"{len(corpus)} instances: worst spectrum deviation "
                 f"{worst:.1e} (< 1e-10), ground spaces exact, frustrated "
                 f"triangle degeneracy {len(k3_gs)} (= 6), {elapsed:.1f} s (< 5)")


def test_adiabatic_and_landau_zener(capsys):
    """Slow anneals succeed; the engineered crossing follows the closed form."""
    t0 = time.perf_counter()
    adiabatic = evolve_closed(k3_afm(), linear_schedule(), 100.0)

    gap, sweep = 0.1, 2.0
    sch = lz_crossing_schedule(gap_ghz=gap, sweep_ghz=sweep)
    t_futures = (5.0, 10.0, 20.0, 40.0, 80.0)
    excitations = []
    rel_errors = []
    for t_ns in t_futures:
        res = evolve_closed(single_spin(), sch, t_ns)
        p_exc = 1.0 - res.success_probability
        excitations.append(p_exc)
        # asymptotic formula assumes an unbounded sweep; past ~40 ns the
        # residual excitation is small enough that the finite window matters
        if t_ns <= 40.0:
            expect = float(np.exp(-np.pi**2 * gap**2 * t_ns / (2.0 * sweep)))
            rel_errors.append(abs(p_exc - expect) / expect)
    elapsed = time.perf_counter() - t0

    monotone = all(b < a for a, b in zip(excitations, excitations[1:]))
    ok = (adiabatic.success_probability >= 0.99
          and monotone
          and max(rel_errors) < 0.10
          and elapsed < 60.0)
    _verdict(capsys, "adiabatic and Landau-Zener",
             ok, f"closed success {adiabatic.success_probability:.4f} (>= 0.99), "
                 f"excitation monotone in t_f, worst deviation from the "
                 f"crossing formula {max(rel_errors):.2%} (< 10%), "
                 f"{elapsed:.1f} s (< 60)")


def test_decoherence_basis_property(capsys):
    """Dephasing hurts only when its basis differs from the instantaneous one."""
    t0 = time.perf_counter()
    problem = k3_afm()
    sch = linear_schedule()
    t_ns = 100.0
    rate = 0.02

    closed = evolve_closed(problem, sch, t_ns)
    eigen = evolve_open(problem, sch, t_ns,
                        dephasing=DephasingSpec("eigen", rate))
    comp = evolve_open(problem, sch, t_ns,
                       dephasing=DephasingSpec("computational", rate))

    temps = (0.5, 1.0, 2.0, 4.0)
    thermal = [evolve_open(problem, sch, 50.0,
                           relaxation=RelaxationSpec(0.02, temp)
                           ).success_probability for temp in temps]
    elapsed = time.perf_counter() - t0

    eigen_gap = abs(eigen.success_probability - closed.success_probability)
    comp_drop = eigen.success_probability - comp.success_probability
    nonincreasing = all(b <= a + 1e-3 for a, b in zip(thermal, thermal[1:]))
    ok = (eigen_gap < 1e-3
          and comp_drop > 1e-3
          and nonincreasing
          and elapsed < 120.0)
    _verdict(capsys, "decoherence-basis property",
             ok, f"matched rate {rate}/ns: |eigen - closed| = {eigen_gap:.1e} "
                 f"(< 1e-3), computational lower by {comp_drop:.4f} (> 0), "
                 f"thermal sweep {[f'{x:.4f}' for x in thermal]} nonincreasing, "
                 f"{elapsed:.1f} s (< 120)")
