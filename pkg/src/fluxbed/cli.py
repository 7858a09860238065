"""Command line interface.

Every command reads plain files, writes plain files, and emits a run
record alongside non-JSON artifacts, so whole bring-up workflows can be
scripted and replayed. Exit codes: 0 success, 1 usage or validation
problem, 2 numerical failure (diagnostic goes to stderr as JSON).
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from .anneal import (
    DephasingSpec,
    RelaxationSpec,
    evolve_closed,
    evolve_open,
    linear_schedule,
    min_gap,
    named_problem,
)
from .characterize import characterize_qubit
from .device import DeviceConfig, build_device, load_config, save_config
from .errors import NumericalError, ValidationError
from .formats import (
    load_correction,
    load_problem,
    load_schedule,
    run_record,
    save_correction,
    save_scan,
    save_shots,
    save_trace,
    write_json,
)
from .readout import ResonatorParams, acquire_shots, discriminate
from .xtalk import (
    DEFAULT_POINTS,
    DEFAULT_SPAN_PERIODS,
    AxisSpec,
    calibrate_auto,
    scan_transmission,
    simulate_acquisition_time,
    verify_orthogonality,
)


def _record_for(artifact: Path, command: str, params: dict, outputs: dict,
                seed: int | None) -> None:
    write_json(artifact.with_suffix(artifact.suffix + ".record.json"),
               run_record(command, params, outputs, seed=seed))


def _load_device(path: str):
    config = load_config(path)
    return config, build_device(config)


def _load_problem_arg(problem: str):
    if Path(problem).exists():
        return load_problem(problem)
    return named_problem(problem)


def _load_schedule_arg(schedule: str | None):
    if schedule is None:
        return linear_schedule()
    return load_schedule(schedule)


@click.group()
def cli():
    """Flux-qubit annealing testbed simulator."""


# ---------------------------------------------------------------------------
# device
# ---------------------------------------------------------------------------

@cli.group()
def device():
    """Create and inspect device configurations."""


@device.command("new")
@click.option("--qubits", default=1, show_default=True)
@click.option("--crosstalk", default=0.3, show_default=True,
              help="Crosstalk fraction bound (0 to 0.5).")
@click.option("--seed", default=0, show_default=True)
@click.option("--out", default="device.json", show_default=True,
              type=click.Path(dir_okay=False))
def device_new(qubits, crosstalk, seed, out):
    """Write a device configuration with hidden per-seed crosstalk."""
    config = DeviceConfig(n_qubits=qubits, crosstalk_fraction=crosstalk, seed=seed)
    build_device(config)  # fail fast if the configuration is unbuildable
    save_config(out, config)
    click.echo(f"wrote {out}: {qubits} qubit(s), crosstalk <= {crosstalk}, "
               f"seed {seed}")


@device.command("show")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
def device_show(path):
    """Print the public view of a device configuration."""
    config, dev = _load_device(path)
    click.echo(json.dumps({
        "n_qubits": config.n_qubits,
        "line_labels": list(dev.line_labels),
        "crosstalk_fraction_bound": config.crosstalk_fraction,
        "seed": config.seed,
        "scan_noise_sigma": config.noise.scan_noise_sigma,
        "trace_noise_sigma": config.noise.trace_noise_sigma,
    }, indent=2, sort_keys=True))


# ---------------------------------------------------------------------------
# scanning and calibration
# ---------------------------------------------------------------------------

@cli.command()
@click.option("--device", "device_path", default="device.json", show_default=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--axes", nargs=2, default=("X0", "Z0"), show_default=True)
@click.option("--span", default=DEFAULT_SPAN_PERIODS, show_default=True,
              help="Window width in nominal flux units, centered on zero.")
@click.option("--points", default=DEFAULT_POINTS, show_default=True)
@click.option("--mode", type=click.Choice(["raster", "sawtooth"]),
              default="sawtooth", show_default=True)
@click.option("--correction", "correction_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="Apply this correction; the grid is then in lattice units.")
@click.option("--seed", default=0, show_default=True)
@click.option("--out", default="scan.txt", show_default=True,
              type=click.Path(dir_okay=False))
def scan(device_path, axes, span, points, mode, correction_path, seed, out):
    """Acquire a 2D transmission scan."""
    _, dev = _load_device(device_path)
    corr = load_correction(correction_path) if correction_path else None
    half = span / 2.0
    ax = AxisSpec(label=axes[0], start=-half, stop=half, n_points=points)
    ay = AxisSpec(label=axes[1], start=-half, stop=half, n_points=points)
    grid = scan_transmission(dev, ax, ay, mode=mode, correction=corr, seed=seed)
    save_scan(out, grid)
    _record_for(Path(out), "scan",
                {"device": device_path, "axes": list(axes), "span": span,
                 "points": points, "mode": mode,
                 "correction": correction_path},
                {"total_time_s": grid.acquisition.total_time_s}, seed)
    click.echo(f"wrote {out}: {points}x{points} {mode} scan, simulated "
               f"acquisition {grid.acquisition.total_time_s:.1f} s")


@cli.command("acquisition-time")
@click.option("--points", default=DEFAULT_POINTS, show_default=True)
@click.option("--mode", type=click.Choice(["raster", "sawtooth"]), required=True)
@click.option("--dwell-us", default=2.0, show_default=True)
@click.option("--settle-ms", default=1000.0, show_default=True)
@click.option("--ramp-hz", default=500.0, show_default=True)
@click.option("--averages", default=1000, show_default=True)
def acquisition_time(points, mode, dwell_us, settle_ms, ramp_hz, averages):
    """Report the simulated wall time of a scan without running it."""
    rep = simulate_acquisition_time(points, points, mode, dwell_us=dwell_us,
                                    settle_ms=settle_ms, ramp_hz=ramp_hz,
                                    n_averages=averages)
    click.echo(f"{mode} {points}x{points}: {rep.total_time_s:.1f} s "
               f"({rep.total_time_s / 3600:.2f} h)")


@cli.command()
@click.option("--device", "device_path", default="device.json", show_default=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--axes", nargs=2, default=("X0", "Z0"), show_default=True)
@click.option("--span", default=DEFAULT_SPAN_PERIODS, show_default=True)
@click.option("--points", default=DEFAULT_POINTS, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", default="correction.json", show_default=True,
              type=click.Path(dir_okay=False))
@click.option("--scan-out", default=None, type=click.Path(dir_okay=False),
              help="Also save the calibration scan.")
@click.option("--verify/--no-verify", default=True, show_default=True)
def calibrate(device_path, axes, span, points, seed, out, scan_out, verify):
    """Scan, detect the lattice, fit the affine correction, verify."""
    _, dev = _load_device(device_path)
    result = calibrate_auto(dev, axes=tuple(axes), span=span, n_points=points,
                            seed=seed, verify=verify)
    save_correction(out, result.correction)
    if scan_out:
        save_scan(scan_out, result.scan)
    outputs = {
        "n_centers": len(result.centers),
        "residual_rms": result.lattice_fit.residual_rms,
    }
    if result.verification is not None:
        outputs["residual_offdiag_fraction"] = \
            result.verification.residual_offdiag_fraction
        outputs["axis_angle_errors_deg"] = \
            list(result.verification.axis_angle_errors_deg)
    _record_for(Path(out), "calibrate",
                {"device": device_path, "axes": list(axes), "span": span,
                 "points": points}, outputs, seed)
    click.echo(f"wrote {out}: {len(result.centers)} centers, "
               f"fit rms {result.lattice_fit.residual_rms:.4f}")
    if result.verification is not None:
        v = result.verification
        click.echo(f"verified: residual off-diagonal "
                   f"{v.residual_offdiag_fraction:.4f}, axis angles "
                   f"({v.axis_angle_errors_deg[0]:+.3f}, "
                   f"{v.axis_angle_errors_deg[1]:+.3f}) deg")


@cli.command()
@click.option("--device", "device_path", default="device.json", show_default=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--correction", "correction_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", default=1, show_default=True)
@click.option("--out", default="verification.json", show_default=True,
              type=click.Path(dir_okay=False))
def verify(device_path, correction_path, seed, out):
    """Re-scan with a correction applied and measure residual crosstalk."""
    _, dev = _load_device(device_path)
    corr = load_correction(correction_path)
    report = verify_orthogonality(dev, corr, seed=seed)
    write_json(out, run_record("verify",
                               {"device": device_path,
                                "correction": correction_path},
                               {"axis_angle_errors_deg":
                                list(report.axis_angle_errors_deg),
                                "residual_offdiag_fraction":
                                report.residual_offdiag_fraction}, seed))
    click.echo(f"residual off-diagonal {report.residual_offdiag_fraction:.4f}")


# ---------------------------------------------------------------------------
# characterization and readout
# ---------------------------------------------------------------------------

@cli.command()
@click.option("--device", "device_path", default="device.json", show_default=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--qubit", default=0, show_default=True)
@click.option("--ip-na", default=None, type=float,
              help="Operating persistent current; defaults to the device value.")
@click.option("--seed", default=0, show_default=True)
@click.option("--out", default="coherence.json", show_default=True,
              type=click.Path(dir_okay=False))
@click.option("--trace-prefix", default=None,
              help="Also save the raw traces as <prefix>-t1.txt / -ramsey.txt.")
def characterize(device_path, qubit, ip_na, seed, out, trace_prefix):
    """Measure and fit T1 and Ramsey traces for one qubit."""
    _, dev = _load_device(device_path)
    report = characterize_qubit(dev, qubit=qubit, ip_na=ip_na, seed=seed)
    if trace_prefix:
        save_trace(f"{trace_prefix}-t1.txt", report.t1_trace)
        save_trace(f"{trace_prefix}-ramsey.txt", report.ramsey_trace)
    write_json(out, run_record(
        "characterize",
        {"device": device_path, "qubit": qubit, "ip_na": report.ip_na},
        {"t1_us": report.t1_fit.t1_us,
         "t2_star_ns": report.ramsey_fit.t2_star_ns,
         "detuning_mhz": report.ramsey_fit.detuning_mhz,
         "t1_residual_rms": report.t1_fit.residual_rms,
         "ramsey_residual_rms": report.ramsey_fit.residual_rms}, seed))
    click.echo(f"qubit {qubit} at {report.ip_na:.0f} nA: "
               f"T1 = {report.t1_fit.t1_us:.2f} us, "
               f"T2* = {report.ramsey_fit.t2_star_ns:.1f} ns")


@cli.command()
@click.option("--n-shots", default=20000, show_default=True)
@click.option("--integration-us", default=10.0, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", default="readout.json", show_default=True,
              type=click.Path(dir_okay=False))
@click.option("--shots-prefix", default=None,
              help="Also save raw shot records as <prefix>-down.txt / -up.txt.")
def readout(n_shots, integration_us, seed, out, shots_prefix):
    """Acquire single-shot ensembles for both states and discriminate."""
    params = ResonatorParams()
    down = acquire_shots(params, "down", n_shots,
                         integration_time_us=integration_us, seed=seed)
    up = acquire_shots(params, "up", n_shots,
                       integration_time_us=integration_us, seed=seed + 1)
    result = discriminate(down, up)
    if shots_prefix:
        save_shots(f"{shots_prefix}-down.txt", down)
        save_shots(f"{shots_prefix}-up.txt", up)
    write_json(out, run_record(
        "readout", {"n_shots": n_shots, "integration_us": integration_us},
        {"separation_sigma": result.separation_sigma,
         "fidelity_estimate": result.fidelity_estimate,
         "analytic_error": result.analytic_error,
         "n_misclassified": result.n_misclassified,
         "threshold": result.threshold,
         "low_confidence": result.low_confidence}, seed))
    click.echo(f"separation {result.separation_sigma:.1f} sigma, "
               f"fidelity {result.fidelity_estimate:.6f}, "
               f"{result.n_misclassified} of {2 * n_shots} misclassified")


# ---------------------------------------------------------------------------
# annealing
# ---------------------------------------------------------------------------

@cli.command()
@click.option("--problem", default="k3_afm", show_default=True,
              help="Named problem or path to a problem file.")
@click.option("--schedule", "schedule_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--tf-ns", default=100.0, show_default=True)
@click.option("--open", "open_system", is_flag=True,
              help="Lindblad evolution instead of closed.")
@click.option("--dephasing-basis", default=None,
              type=click.Choice(["eigen", "computational"]))
@click.option("--dephasing-rate", default=0.02, show_default=True,
              help="Dephasing rate per ns (open only).")
@click.option("--relaxation-rate", default=None, type=float,
              help="Thermal coupling rate per ns (open only).")
@click.option("--temperature-ghz", default=0.25, show_default=True)
@click.option("--out", default="anneal.json", show_default=True,
              type=click.Path(dir_okay=False))
def anneal(problem, schedule_path, tf_ns, open_system, dephasing_basis,
           dephasing_rate, relaxation_rate, temperature_ghz, out):
    """Anneal a problem and report the ground-space success probability."""
    prob = _load_problem_arg(problem)
    sched = _load_schedule_arg(schedule_path)
    if open_system:
        deph = (DephasingSpec(dephasing_basis, dephasing_rate)
                if dephasing_basis else None)
        relax = (RelaxationSpec(relaxation_rate, temperature_ghz)
                 if relaxation_rate is not None else None)
        res = evolve_open(prob, sched, tf_ns, dephasing=deph, relaxation=relax)
        extras = {"purity_final": res.purity_final,
                  "trace_error": res.trace_error}
    else:
        res = evolve_closed(prob, sched, tf_ns)
        extras = {"norm_error": res.norm_error}
    write_json(out, run_record(
        "anneal",
        {"problem": prob.name or problem, "n": prob.n, "tf_ns": tf_ns,
         "open": open_system, "dephasing_basis": dephasing_basis,
         "dephasing_rate": dephasing_rate if dephasing_basis else None,
         "relaxation_rate": relaxation_rate,
         "temperature_ghz": temperature_ghz if relaxation_rate else None,
         "schedule": sched.name},
        {"success_probability": res.ground_space_population,
         "ground_degeneracy": res.ground_degeneracy,
         "low_level_population": res.low_level_population.tolist(),
         "s_values": res.s_values.tolist(), **extras}, None))
    click.echo(f"{prob.name or problem}, tf = {tf_ns} ns: success probability "
               f"{res.ground_space_population:.4f} "
               f"(ground degeneracy {res.ground_degeneracy})")


@cli.command("search-gaps")
@click.option("--problem", default="k3_afm_split", show_default=True)
@click.option("--schedule", "schedule_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--grid", default=256, show_default=True)
@click.option("--out", default="gaps.json", show_default=True,
              type=click.Path(dir_okay=False))
def search_gaps(problem, schedule_path, grid, out):
    """Locate the minimum degeneracy-aware gap along the anneal."""
    prob = _load_problem_arg(problem)
    sched = _load_schedule_arg(schedule_path)
    result = min_gap(prob, sched, n_grid=grid)
    write_json(out, run_record(
        "search-gaps",
        {"problem": prob.name or problem, "schedule": sched.name, "grid": grid},
        {"s_min": result.s_min, "gap_ghz": result.gap_ghz,
         "ground_degeneracy": result.ground_degeneracy,
         "grid_s": result.grid_s.tolist(),
         "grid_gap_ghz": result.grid_gap_ghz.tolist()}, None))
    click.echo(f"minimum gap {result.gap_ghz:.4f} GHz at s = {result.s_min:.4f} "
               f"(ground degeneracy {result.ground_degeneracy})")


# ---------------------------------------------------------------------------
# service
# ---------------------------------------------------------------------------

@cli.command()
@click.option("--port", default=None, type=int,
              help="Port to bind (default: FLUXBED_PORT or 8756).")
@click.option("--data-dir", default=None,
              help="Session directory (default: FLUXBED_DATA_DIR or ./fluxbed-data).")
def serve(port, data_dir):
    """Run the REST service."""
    from .service import main as service_main

    service_main(port=port, data_dir=data_dir)


def main(argv=None) -> int:
    """Entry point with stable exit codes."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.UsageError as exc:
        exc.show()
        return 1
    except ValidationError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except NumericalError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        click.echo(json.dumps(exc.diagnostic, default=str), err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
