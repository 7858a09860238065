"""REST interface to instrument sessions.

The service is the only path a remote client (for example the calibration
console) has to the simulated hardware: it can request scans, read data,
fit lattices from clicked or detected centers, and manage the active
correction. Hidden device truth never crosses this boundary.
"""

from __future__ import annotations

import os
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field

from . import __version__
from .device import DeviceConfig, config_from_dict
from .errors import CalibrationInsufficientError, NumericalError, ValidationError
from .formats import correction_from_dict, correction_to_dict
from .session import ScanBusyError, Session, SessionStore
from .xtalk import (
    DEFAULT_POINTS,
    DEFAULT_SPAN_PERIODS,
    AxisSpec,
    assign_lattice_indices,
    estimate_basis_fft,
    fit_affine,
    fit_lattice_auto,
    verify_orthogonality,
)

DEFAULT_DATA_DIR = "fluxbed-data"
DEFAULT_PORT = 8756


# ---------------------------------------------------------------------------
# request models
# ---------------------------------------------------------------------------

class AxisModel(BaseModel):
    model_config = ConfigDict(extra="forbid")
    label: str
    start: float
    stop: float
    n_points: int = DEFAULT_POINTS


class SessionCreateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    config: dict | None = None


class ScanRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    axis_x: AxisModel | None = None
    axis_y: AxisModel | None = None
    mode: str = "sawtooth"
    use_correction: bool = False
    noise_sigma: float | None = None
    seed: int | None = None
    probe_frequency_ghz: float | None = None


class FitRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    scan_id: str
    centers: list[list[float]] = Field(default_factory=list)
    indices: list[list[int]] | None = None


class CorrectionRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    T: list[list[float]]
    offset: list[float]
    axes: list[str] = Field(default_factory=lambda: ["X0", "Z0"])


# ---------------------------------------------------------------------------
# app factory
# ---------------------------------------------------------------------------

def _provenance() -> dict:
    return {"package_version": __version__,
            "created_utc": datetime.now(timezone.utc).isoformat()}


def _envelope(session: Session | None, **payload) -> dict:
    out = {"provenance": _provenance()}
    if session is not None:
        out["session_id"] = session.session_id
        out["revision"] = session.revision
    out.update(payload)
    return out


def _fit_payload(fit, correction, indexed) -> dict:
    return {
        "fit": {
            "primitive_vectors": fit.primitive_vectors.tolist(),
            "origin": fit.origin.tolist(),
            "residual_rms": fit.residual_rms,
            "n_centers_used": fit.n_centers_used,
            "center_source": fit.center_source,
        },
        "correction": correction_to_dict(correction),
        "indexed_centers": [
            {"center": list(map(float, c)), "index": [int(i), int(j)]}
            for c, (i, j) in indexed
        ],
    }


def create_app(data_dir: str | Path | None = None,
               time_compression: float | None = None) -> FastAPI:
    if data_dir is None:
        data_dir = os.environ.get("FLUXBED_DATA_DIR", DEFAULT_DATA_DIR)
    if time_compression is None:
        time_compression = float(os.environ.get("FLUXBED_TIME_COMPRESSION", "0"))

    store = SessionStore(data_dir)
    app = FastAPI(title="fluxbed", version=__version__)
    app.state.store = store
    app.state.time_compression = time_compression

    # local unauthenticated desk tool; the console page is served from a
    # different origin than the API
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])

    # -- error mapping -------------------------------------------------------

    @app.exception_handler(ScanBusyError)
    async def busy_handler(request: Request, exc: ScanBusyError):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.exception_handler(CalibrationInsufficientError)
    async def insufficient_handler(request: Request,
                                   exc: CalibrationInsufficientError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(ValidationError)
    async def validation_handler(request: Request, exc: ValidationError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(NumericalError)
    async def numerical_handler(request: Request, exc: NumericalError):
        return JSONResponse(status_code=500, content={
            "detail": str(exc), "diagnostic": exc.diagnostic})

    @app.exception_handler(KeyError)
    async def missing_handler(request: Request, exc: KeyError):
        return JSONResponse(status_code=404,
                            content={"detail": f"not found: {exc.args[0]}"})

    # -- sessions -------------------------------------------------------------

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.get("/sessions")
    def list_sessions():
        return _envelope(None, sessions=store.ids())

    @app.post("/sessions", status_code=201)
    def create_session(req: SessionCreateRequest):
        config = config_from_dict(req.config) if req.config else DeviceConfig()
        session = store.create(config)
        return _envelope(session, summary=session.summary())

    @app.get("/sessions/{sid}")
    def get_session(sid: str):
        session = store.get(sid)
        return _envelope(session, summary=session.summary())

    # -- scans ----------------------------------------------------------------

    def _default_axes(session: Session, corrected: bool) -> tuple[AxisSpec, AxisSpec]:
        half = DEFAULT_SPAN_PERIODS / 2.0
        if corrected and session.correction is not None:
            lx, ly = session.correction.axes
        else:
            lx, ly = session.device.line_labels[0], session.device.line_labels[1]
        return (AxisSpec(label=lx, start=-half, stop=half, n_points=DEFAULT_POINTS),
                AxisSpec(label=ly, start=-half, stop=half, n_points=DEFAULT_POINTS))

    @app.post("/sessions/{sid}/scans", status_code=202)
    def request_scan(sid: str, req: ScanRequest):
        session = store.get(sid)
        ax_default, ay_default = _default_axes(session, req.use_correction)
        ax = AxisSpec(**req.axis_x.model_dump()) if req.axis_x else ax_default
        ay = AxisSpec(**req.axis_y.model_dump()) if req.axis_y else ay_default
        job = session.start_scan(ax, ay, mode=req.mode,
                                 use_correction=req.use_correction,
                                 noise_sigma=req.noise_sigma, seed=req.seed,
                                 time_compression=app.state.time_compression,
                                 probe_frequency_ghz=req.probe_frequency_ghz)
        return _envelope(session, scan_id=job.scan_id, status=job.status)

    @app.get("/sessions/{sid}/scans/{scan_id}")
    def scan_status(sid: str, scan_id: str):
        session = store.get(sid)
        job = session.get_scan(scan_id)
        payload = {"scan_id": scan_id, "status": job.status,
                   "params": job.params, "error": job.error}
        if job.scan is not None:
            acq = job.scan.acquisition
            payload["acquisition"] = {
                "mode": acq.mode, "total_time_s": acq.total_time_s,
                "per_point_dwell_us": acq.per_point_dwell_us,
                "n_averages": acq.n_averages,
                "settle_time_ms": acq.settle_time_ms,
                "ramp_frequency_hz": acq.ramp_frequency_hz,
            }
        return _envelope(session, **payload)

    @app.get("/sessions/{sid}/scans/{scan_id}/data")
    def scan_data(sid: str, scan_id: str):
        session = store.get(sid)
        job = session.get_scan(scan_id)
        if job.status != "done":
            return JSONResponse(status_code=409, content={
                "detail": f"scan {scan_id} is {job.status}"})
        scan = job.scan
        return _envelope(session, scan_id=scan_id, data={
            "axis_x": {"label": scan.axis_x.label, "start": scan.axis_x.start,
                       "stop": scan.axis_x.stop, "n_points": scan.axis_x.n_points},
            "axis_y": {"label": scan.axis_y.label, "start": scan.axis_y.start,
                       "stop": scan.axis_y.stop, "n_points": scan.axis_y.n_points},
            "values": scan.values.tolist(),
            "corrected": scan.corrected,
            "probe_frequency_ghz": scan.probe_frequency_ghz,
            "seed": scan.seed,
        })

    @app.get("/sessions/{sid}/scans/{scan_id}/proposal")
    def scan_proposal(sid: str, scan_id: str):
        """Automatic center detection and fit, for seeding the console."""
        session = store.get(sid)
        job = session.get_scan(scan_id)
        if job.status != "done":
            return JSONResponse(status_code=409, content={
                "detail": f"scan {scan_id} is {job.status}"})
        fit, corr, centers = fit_lattice_auto(job.scan)
        indexed = assign_lattice_indices(centers, fit.primitive_vectors,
                                         reference=fit.origin)
        return _envelope(session, scan_id=scan_id,
                         centers=[list(map(float, c)) for c in centers],
                         **_fit_payload(fit, corr, indexed))

    # -- fitting and correction ------------------------------------------------

    @app.post("/sessions/{sid}/fit")
    def fit_centers(sid: str, req: FitRequest):
        session = store.get(sid)
        job = session.get_scan(req.scan_id)
        if job.status != "done":
            return JSONResponse(status_code=409, content={
                "detail": f"scan {req.scan_id} is {job.status}"})
        scan = job.scan
        centers = np.asarray(req.centers, dtype=float)
        if centers.ndim != 2 or centers.shape[0] < 3 or centers.shape[1] != 2:
            raise ValidationError("need at least 3 centers, each [x, y]")
        axes = (scan.axis_x.label, scan.axis_y.label)
        if req.indices is not None:
            if len(req.indices) != len(req.centers):
                raise ValidationError("indices must match centers one to one")
            indexed = [(c, (int(i), int(j)))
                       for c, (i, j) in zip(centers, req.indices)]
        else:
            basis = estimate_basis_fft(scan)
            indexed = assign_lattice_indices(centers, basis)
            if len(indexed) < 3:
                raise CalibrationInsufficientError(
                    "could not index enough of the supplied centers")
        fit, corr = fit_affine(indexed, center_source="manual", axes=axes)
        session._bump("fit", {"scan_id": req.scan_id,
                              "n_centers": int(centers.shape[0])})
        return _envelope(session, scan_id=req.scan_id,
                         **_fit_payload(fit, corr, indexed))

    @app.post("/sessions/{sid}/correction")
    def set_correction(sid: str, req: CorrectionRequest):
        session = store.get(sid)
        corr = correction_from_dict(req.model_dump())
        session.set_correction(corr)
        return _envelope(session, correction=correction_to_dict(corr))

    @app.delete("/sessions/{sid}/correction")
    def clear_correction(sid: str):
        session = store.get(sid)
        session.clear_correction()
        return _envelope(session, correction=None)

    @app.get("/sessions/{sid}/correction")
    def get_correction(sid: str):
        session = store.get(sid)
        corr = session.correction
        return _envelope(session, correction=None if corr is None
                         else correction_to_dict(corr))

    @app.get("/sessions/{sid}/verification")
    def verification(sid: str):
        session = store.get(sid)
        if session.correction is None:
            return JSONResponse(status_code=409, content={
                "detail": "no active correction to verify"})
        report = verify_orthogonality(session.device, session.correction,
                                      seed=session.config.seed + 999)
        session._bump("verification", {})
        return _envelope(session, verification={
            "axis_angle_errors_deg": list(report.axis_angle_errors_deg),
            "residual_offdiag_fraction": report.residual_offdiag_fraction,
            "refit": {
                "primitive_vectors": report.refit.primitive_vectors.tolist(),
                "origin": report.refit.origin.tolist(),
                "residual_rms": report.refit.residual_rms,
                "n_centers_used": report.refit.n_centers_used,
            },
        })

    return app


def main(port: int | None = None, data_dir: str | None = None) -> None:
    """Run the service under uvicorn (blocking)."""
    import uvicorn

    if port is None:
        port = int(os.environ.get("FLUXBED_PORT", str(DEFAULT_PORT)))
    uvicorn.run(create_app(data_dir=data_dir), host="127.0.0.1", port=port,
                log_level="warning")
