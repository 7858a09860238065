"""Instrument sessions: on-disk state shared by the REST service and CLI.

A session owns one simulated device plus everything measured against it:
scans, fits, the active correction. State lives in a directory of plain
files so a session survives process restarts and can be inspected with
ordinary tools. Every mutation bumps a monotone revision counter.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from .device import DeviceConfig, DeviceTruth, build_device, config_from_dict, \
    config_to_dict
from .errors import ValidationError
from .formats import (
    correction_from_dict,
    correction_to_dict,
    load_scan,
    read_json,
    run_record,
    save_correction,
    save_scan,
    write_json,
)
from .xtalk import AffineCorrection, AxisSpec, ScanGrid2D, scan_transmission


@dataclass
class ScanJob:
    """One scan request and, eventually, its data."""

    scan_id: str
    status: str = "pending"  # pending | running | done | failed
    params: dict = field(default_factory=dict)
    scan: ScanGrid2D | None = None
    error: str | None = None
    requested_utc: float = 0.0
    finished_utc: float = 0.0


class Session:
    """One device bring-up session; thread-safe for a single service process."""

    def __init__(self, session_id: str, root: Path, config: DeviceConfig):
        self.session_id = session_id
        self.dir = root / session_id
        self.dir.mkdir(parents=True, exist_ok=True)
        (self.dir / "scans").mkdir(exist_ok=True)
        self.config = config
        self.device: DeviceTruth = build_device(config)
        self.revision = 0
        self.correction: AffineCorrection | None = None
        self.scans: dict[str, ScanJob] = {}
        self._scan_counter = 0
        self._lock = threading.RLock()
        write_json(self.dir / "config.json", config_to_dict(config))
        self._bump("session created", {})

    # -- bookkeeping --------------------------------------------------------

    def _bump(self, action: str, detail: dict) -> int:
        with self._lock:
            self.revision += 1
            write_json(self.dir / "meta.json",
                       {"session_id": self.session_id, "revision": self.revision,
                        "last_action": action})
            write_json(self.dir / f"record-{self.revision:05d}.json",
                       run_record(action, detail, {}, seed=self.config.seed))
            return self.revision

    def summary(self) -> dict:
        with self._lock:
            return {
                "session_id": self.session_id,
                "revision": self.revision,
                "n_qubits": self.config.n_qubits,
                "line_labels": list(self.device.line_labels),
                "seed": self.config.seed,
                "has_correction": self.correction is not None,
                "scans": {sid: job.status for sid, job in self.scans.items()},
            }

    # -- scans ---------------------------------------------------------------

    def scan_in_flight(self) -> bool:
        with self._lock:
            return any(j.status in ("pending", "running")
                       for j in self.scans.values())

    def start_scan(self, axis_x: AxisSpec, axis_y: AxisSpec, mode: str,
                   use_correction: bool, noise_sigma: float | None,
                   seed: int | None, time_compression: float,
                   probe_frequency_ghz: float | None = None) -> ScanJob:
        """Launch a scan in a worker thread; one scan per session at a time."""
        with self._lock:
            if self.scan_in_flight():
                raise ScanBusyError("a scan is already in flight for this session")
            correction = self.correction if use_correction else None
            if use_correction and correction is None:
                raise ValidationError("no active correction to apply")
            self._scan_counter += 1
            scan_id = f"scan-{self._scan_counter:04d}"
            if seed is None:
                seed = self.config.seed * 1000 + self._scan_counter
            job = ScanJob(scan_id=scan_id, requested_utc=time.time(),
                          params={"axis_x": vars(axis_x) | {},
                                  "axis_y": vars(axis_y) | {},
                                  "mode": mode, "corrected": use_correction,
                                  "seed": seed})
            self.scans[scan_id] = job
            self._bump("scan requested", job.params)

        def work():
            job.status = "running"
            try:
                scan = scan_transmission(
                    self.device, axis_x, axis_y, mode=mode,
                    correction=correction, noise_sigma=noise_sigma, seed=seed,
                    probe_frequency_ghz=probe_frequency_ghz)
                if time_compression > 0:
                    time.sleep(scan.acquisition.total_time_s * time_compression)
                with self._lock:
                    job.scan = scan
                    job.status = "done"
                    job.finished_utc = time.time()
                    save_scan(self.dir / "scans" / f"{scan_id}.txt", scan)
                    self._bump("scan finished", {"scan_id": scan_id})
            except Exception as exc:  # report, don't kill the worker silently
                with self._lock:
                    job.status = "failed"
                    job.error = str(exc)
                    job.finished_utc = time.time()
                    self._bump("scan failed", {"scan_id": scan_id,
                                               "error": str(exc)})

        threading.Thread(target=work, daemon=True).start()
        return job

    def get_scan(self, scan_id: str) -> ScanJob:
        with self._lock:
            if scan_id not in self.scans:
                raise KeyError(scan_id)
            return self.scans[scan_id]

    # -- correction ----------------------------------------------------------

    def set_correction(self, correction: AffineCorrection) -> int:
        with self._lock:
            self.correction = correction
            save_correction(self.dir / "correction.json", correction)
            return self._bump("correction set",
                              correction_to_dict(correction))

    def clear_correction(self) -> int:
        with self._lock:
            self.correction = None
            path = self.dir / "correction.json"
            if path.exists():
                path.unlink()
            return self._bump("correction cleared", {})


class ScanBusyError(ValidationError):
    """A scan is already in flight for this session."""


class SessionStore:
    """All sessions under one data directory."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self._hydrate()

    def _hydrate(self) -> None:
        """Recover sessions persisted by an earlier process."""
        for meta_path in sorted(self.root.glob("*/meta.json")):
            sdir = meta_path.parent
            try:
                meta = read_json(meta_path)
                config = config_from_dict(read_json(sdir / "config.json"))
                session = Session.__new__(Session)
                session.session_id = meta["session_id"]
                session.dir = sdir
                session.config = config
                session.device = build_device(config)
                session.revision = int(meta["revision"])
                session.correction = None
                corr_path = sdir / "correction.json"
                if corr_path.exists():
                    session.correction = correction_from_dict(read_json(corr_path))
                session.scans = {}
                session._scan_counter = 0
                session._lock = threading.RLock()
                for scan_path in sorted((sdir / "scans").glob("scan-*.txt")):
                    scan_id = scan_path.stem
                    session._scan_counter = max(session._scan_counter,
                                                int(scan_id.split("-")[1]))
                    session.scans[scan_id] = ScanJob(
                        scan_id=scan_id, status="done", scan=load_scan(scan_path))
                self._sessions[session.session_id] = session
            except (ValidationError, KeyError, ValueError):
                continue  # partially written session directory; skip it

    def create(self, config: DeviceConfig | None = None) -> Session:
        config = config or DeviceConfig()
        session_id = f"s-{uuid.uuid4().hex[:12]}"
        session = Session(session_id, self.root, config)
        with self._lock:
            self._sessions[session_id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            if session_id not in self._sessions:
                raise KeyError(session_id)
            return self._sessions[session_id]

    def ids(self) -> list[str]:
        with self._lock:
            return sorted(self._sessions)
