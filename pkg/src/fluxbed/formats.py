"""Plain-file persistence for scans, traces, shots, corrections and problems.

Matrix-like data (scans, traces, shot records) goes to whitespace-separated
text with '# key: value' header lines; structured small objects
(corrections, schedules as dicts, run records) go to JSON with sorted keys.
All writers round-trip bit-exactly through their paired loader.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .characterize import DecayTrace
from .errors import ValidationError
from .readout import ShotEnsemble
from .xtalk import AcquisitionReport, AffineCorrection, AxisSpec, ScanGrid2D

_FLOAT_FMT = "%.17g"


def _format_value(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, bool):
        return "1" if v else "0"
    if v is None:
        return "none"
    return str(v)


def _write_header(fh, meta: dict) -> None:
    for key, val in meta.items():
        fh.write(f"# {key}: {_format_value(val)}\n")


def _read_header(path: Path) -> dict:
    meta = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            body = line[1:].strip()
            if ":" not in body:
                continue
            key, _, val = body.partition(":")
            meta[key.strip()] = val.strip()
    return meta


def _meta_float(meta: dict, key: str) -> float | None:
    raw = meta.get(key, "none")
    return None if raw == "none" else float(raw)


def _require(meta: dict, key: str) -> str:
    if key not in meta:
        raise ValidationError(f"malformed file: missing header key {key!r}")
    return meta[key]


# ---------------------------------------------------------------------------
# scans
# ---------------------------------------------------------------------------

def save_scan(path, scan: ScanGrid2D) -> None:
    path = Path(path)
    acq = scan.acquisition
    meta = {
        "axis_x_label": scan.axis_x.label, "axis_x_start": scan.axis_x.start,
        "axis_x_stop": scan.axis_x.stop, "axis_x_n": scan.axis_x.n_points,
        "axis_y_label": scan.axis_y.label, "axis_y_start": scan.axis_y.start,
        "axis_y_stop": scan.axis_y.stop, "axis_y_n": scan.axis_y.n_points,
        "corrected": scan.corrected,
        "probe_frequency_ghz": scan.probe_frequency_ghz,
        "seed": scan.seed,
        "acq_mode": acq.mode, "acq_dwell_us": acq.per_point_dwell_us,
        "acq_n_averages": acq.n_averages, "acq_total_s": acq.total_time_s,
        "acq_settle_ms": acq.settle_time_ms,
        "acq_ramp_hz": acq.ramp_frequency_hz,
        "acq_n_lines": acq.n_lines_scanned,
        "acq_overhead_s": acq.frame_overhead_s,
    }
    with open(path, "w") as fh:
        _write_header(fh, meta)
        np.savetxt(fh, scan.values, fmt=_FLOAT_FMT)


def load_scan(path) -> ScanGrid2D:
    path = Path(path)
    meta = _read_header(path)
    try:
        axis_x = AxisSpec(label=_require(meta, "axis_x_label"),
                          start=float(_require(meta, "axis_x_start")),
                          stop=float(_require(meta, "axis_x_stop")),
                          n_points=int(_require(meta, "axis_x_n")))
        axis_y = AxisSpec(label=_require(meta, "axis_y_label"),
                          start=float(_require(meta, "axis_y_start")),
                          stop=float(_require(meta, "axis_y_stop")),
                          n_points=int(_require(meta, "axis_y_n")))
        acq = AcquisitionReport(
            mode=_require(meta, "acq_mode"),
            per_point_dwell_us=float(_require(meta, "acq_dwell_us")),
            n_averages=int(_require(meta, "acq_n_averages")),
            total_time_s=float(_require(meta, "acq_total_s")),
            settle_time_ms=_meta_float(meta, "acq_settle_ms"),
            ramp_frequency_hz=_meta_float(meta, "acq_ramp_hz"),
            n_lines_scanned=int(meta.get("acq_n_lines", "2")),
            frame_overhead_s=float(meta.get("acq_overhead_s", "0")))
        values = np.loadtxt(path, ndmin=2)
        seed_raw = meta.get("seed", "none")
        probe = _meta_float(meta, "probe_frequency_ghz")
    except (ValueError, KeyError) as exc:
        raise ValidationError(f"malformed scan file {path}: {exc}") from exc
    return ScanGrid2D(axis_x=axis_x, axis_y=axis_y, values=values,
                      acquisition=acq, corrected=meta.get("corrected") == "1",
                      probe_frequency_ghz=probe,
                      seed=None if seed_raw == "none" else int(seed_raw))


# ---------------------------------------------------------------------------
# coherence traces
# ---------------------------------------------------------------------------

def save_trace(path, trace: DecayTrace) -> None:
    meta = {"kind": trace.kind, "qubit": trace.qubit, "ip_na": trace.ip_na,
            "detuning_mhz": trace.detuning_mhz, "seed": trace.seed,
            "columns": "time_ns value"}
    with open(Path(path), "w") as fh:
        _write_header(fh, meta)
        np.savetxt(fh, np.column_stack([trace.times_ns, trace.values]),
                   fmt=_FLOAT_FMT)


def load_trace(path) -> DecayTrace:
    path = Path(path)
    meta = _read_header(path)
    try:
        data = np.loadtxt(path, ndmin=2)
        return DecayTrace(times_ns=data[:, 0], values=data[:, 1],
                          kind=_require(meta, "kind"),
                          qubit=int(_require(meta, "qubit")),
                          ip_na=float(_require(meta, "ip_na")),
                          detuning_mhz=float(meta.get("detuning_mhz", "0")),
                          seed=int(meta.get("seed", "0")))
    except (ValueError, IndexError) as exc:
        raise ValidationError(f"malformed trace file {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# readout shots
# ---------------------------------------------------------------------------

def save_shots(path, shots: ShotEnsemble) -> None:
    meta = {"prepared_state": shots.prepared_state,
            "integration_time_us": shots.integration_time_us,
            "seed": shots.seed, "columns": "voltage"}
    with open(Path(path), "w") as fh:
        _write_header(fh, meta)
        np.savetxt(fh, shots.voltages, fmt=_FLOAT_FMT)


def load_shots(path) -> ShotEnsemble:
    path = Path(path)
    meta = _read_header(path)
    try:
        return ShotEnsemble(
            voltages=np.loadtxt(path),
            integration_time_us=float(_require(meta, "integration_time_us")),
            prepared_state=_require(meta, "prepared_state"),
            seed=int(meta.get("seed", "0")))
    except ValueError as exc:
        raise ValidationError(f"malformed shots file {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# corrections
# ---------------------------------------------------------------------------

def correction_to_dict(corr: AffineCorrection) -> dict:
    return {"T": corr.T.tolist(), "offset": corr.offset.tolist(),
            "axes": list(corr.axes)}


def correction_from_dict(d: dict) -> AffineCorrection:
    try:
        return AffineCorrection.from_matrix(
            np.asarray(d["T"], dtype=float),
            np.asarray(d["offset"], dtype=float),
            axes=(str(d["axes"][0]), str(d["axes"][1])))
    except (KeyError, IndexError, TypeError) as exc:
        raise ValidationError(f"malformed correction payload: {exc}") from exc


def save_correction(path, corr: AffineCorrection) -> None:
    write_json(path, correction_to_dict(corr))


def load_correction(path) -> AffineCorrection:
    return correction_from_dict(read_json(path))


# ---------------------------------------------------------------------------
# problems and schedules
# ---------------------------------------------------------------------------

def save_problem(path, problem) -> None:
    with open(Path(path), "w") as fh:
        _write_header(fh, {"name": problem.name or "custom"})
        fh.write(f"n {problem.n}\n")
        for i, hi in enumerate(problem.h):
            fh.write(f"h {i} {float(hi):.17g}\n")
        for (i, j), val in sorted(problem.couplings.items()):
            fh.write(f"J {i} {j} {float(val):.17g}\n")


def load_problem(path):
    from .anneal.ising import IsingProblem

    path = Path(path)
    meta = _read_header(path)
    n = None
    h = None
    couplings = {}
    try:
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split()
                if parts[0] == "n":
                    n = int(parts[1])
                    h = np.zeros(n)
                elif parts[0] == "h":
                    h[int(parts[1])] = float(parts[2])
                elif parts[0] == "J":
                    couplings[(int(parts[1]), int(parts[2]))] = float(parts[3])
                else:
                    raise ValidationError(f"unknown line kind {parts[0]!r}")
        if n is None:
            raise ValidationError("missing 'n' line")
    except (ValueError, IndexError, TypeError) as exc:
        raise ValidationError(f"malformed problem file {path}: {exc}") from exc
    return IsingProblem(n=n, h=h, couplings=couplings,
                        name=meta.get("name", "custom"))


def save_schedule(path, schedule) -> None:
    with open(Path(path), "w") as fh:
        _write_header(fh, {"name": schedule.name, "columns": "s a_ghz b_ghz"})
        np.savetxt(fh, np.column_stack([schedule.s_knots, schedule.a_ghz,
                                        schedule.b_ghz]), fmt=_FLOAT_FMT)


def load_schedule(path):
    from .anneal.schedules import AnnealSchedule

    path = Path(path)
    meta = _read_header(path)
    try:
        data = np.loadtxt(path, ndmin=2)
        return AnnealSchedule(s_knots=data[:, 0], a_ghz=data[:, 1],
                              b_ghz=data[:, 2], name=meta.get("name", "custom"))
    except (ValueError, IndexError) as exc:
        raise ValidationError(f"malformed schedule file {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# JSON helpers and run records
# ---------------------------------------------------------------------------

def write_json(path, payload: dict) -> None:
    with open(Path(path), "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path) -> dict:
    try:
        with open(Path(path)) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON file {path}: {exc}") from exc


def run_record(command: str, parameters: dict, outputs: dict,
               seed: int | None = None) -> dict:
    """Reproducibility record: what ran, with what, producing what."""
    from . import __version__

    return {"command": command, "parameters": parameters, "outputs": outputs,
            "seed": seed, "package_version": __version__,
            "created_utc": datetime.now(timezone.utc).isoformat()}
