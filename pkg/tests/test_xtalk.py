"""Crosstalk calibration: scans, lattice detection, affine fits, verification."""

import warnings

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from fluxbed import (
    AffineCorrection,
    AxisSpec,
    CalibrationInsufficientError,
    DeviceConfig,
    FluxVector,
    ScanGrid2D,
    ValidationError,
    assign_lattice_indices,
    build_device,
    calibrate_auto,
    detect_centers_auto,
    estimate_basis_fft,
    fit_affine,
    fit_lattice_auto,
    scan_transmission,
    simulate_acquisition_time,
    transmission_model,
    verify_orthogonality,
)
from fluxbed.xtalk import DEFAULT_POINTS, DEFAULT_SPAN_PERIODS


def _true_lattice(device, axes=("X0", "Z0")):
    """Ground-truth affine map u = A z + b for feature centers, from the truth.

    The features sit where both loop fluxes hit the device's fractional
    pattern offset modulo 1; in nominal coordinates that is the lattice
    A = (M_block / mutual)^-1 with origin A (pattern - offsets).
    """
    la = device.line_index(axes[0])
    lb = device.line_index(axes[1])
    lx, lz = device.loop_indices_of_qubit(la // 2)
    m = device.true_control_matrix
    mut = device.config.mutuals_per_line()
    g = np.array([[m[lx, la] / mut[la], m[lx, lb] / mut[lb]],
                  [m[lz, la] / mut[la], m[lz, lb] / mut[lb]]])
    a = np.linalg.inv(g)
    rhs = np.array([device.pattern_fractional_offset[lx] - device.flux_offsets[lx],
                    device.pattern_fractional_offset[lz] - device.flux_offsets[lz]])
    return a, a @ rhs


def _nearest_lattice_distance(points, a, b):
    """Max distance from each point to its nearest exact lattice node."""
    z = np.linalg.solve(a, (points - b).T)
    resid = (points - b).T - a @ np.round(z)
    return float(np.max(np.linalg.norm(resid, axis=0)))


# ---------------------------------------------------------------------------
# acquisition timing
# ---------------------------------------------------------------------------

def test_raster_time_exact_formula():
    rep = simulate_acquisition_time(101, 101, "raster", dwell_us=2.0,
                                    settle_ms=1000.0)
    assert rep.total_time_s == pytest.approx(101 * 101 * (1.0 + 2e-6), rel=1e-12)
    assert rep.mode == "raster"
    assert rep.n_averages == 1


def test_sawtooth_time_exact_formula():
    rep = simulate_acquisition_time(101, 101, "sawtooth", dwell_us=2.0,
                                    ramp_hz=500.0, n_averages=1000,
                                    n_lines_scanned=2, frame_overhead_s=2.0)
    assert rep.total_time_s == pytest.approx(2 * 1000 / 500.0 + 2.0, rel=1e-12)
    assert rep.ramp_frequency_hz == 500.0


def test_sawtooth_parameter_bounds():
    with pytest.raises(ValidationError):
        simulate_acquisition_time(101, 101, "sawtooth", dwell_us=0.5)
    with pytest.raises(ValidationError):
        simulate_acquisition_time(101, 101, "sawtooth", dwell_us=6.0)
    with pytest.raises(ValidationError):
        simulate_acquisition_time(101, 101, "sawtooth", ramp_hz=50.0)
    with pytest.raises(ValidationError):
        simulate_acquisition_time(101, 101, "sawtooth", ramp_hz=2000.0)
    # 300 points at 5 us do not fit in a 1 kHz ramp period
    with pytest.raises(ValidationError):
        simulate_acquisition_time(300, 300, "sawtooth", dwell_us=5.0,
                                  ramp_hz=1000.0)
    with pytest.raises(ValidationError):
        simulate_acquisition_time(101, 101, "spiral")


def test_axis_spec_validation():
    with pytest.raises(ValidationError):
        AxisSpec("X0", 0.0, 1.0, 4)
    with pytest.raises(ValidationError):
        AxisSpec("X0", 1.0, 1.0, 32)
    ax = AxisSpec("X0", -2.0, 2.0, 101)
    assert ax.step == pytest.approx(0.04)
    assert ax.extent == pytest.approx(4.0)
    assert ax.values[0] == -2.0 and ax.values[-1] == 2.0


# ---------------------------------------------------------------------------
# transmission model and scans
# ---------------------------------------------------------------------------

def test_transmission_periodic_in_phi0(device_1q):
    probe = device_1q.resonators[0].f_down_ghz
    base = transmission_model(
        device_1q, FluxVector(np.array([0.13, 0.27]), ("X0", "Z0")), probe)
    shifted = transmission_model(
        device_1q, FluxVector(np.array([2.13, -0.73]), ("X0", "Z0")), probe)
    assert shifted == pytest.approx(base, rel=1e-9)


def test_transmission_peak_at_pattern_offset(device_1q):
    probe = device_1q.resonators[0].f_down_ghz
    pat = device_1q.pattern_fractional_offset[:2]
    on = transmission_model(device_1q, FluxVector(pat, ("X0", "Z0")), probe)
    off = transmission_model(device_1q, FluxVector(pat + 0.5, ("X0", "Z0")), probe)
    assert on > off + 0.1  # the feature is a clear bump over the background
    assert 0.0 <= off <= on <= 1.0


def test_scan_shape_seeding_and_bounds(device_1q):
    ax = AxisSpec("X0", -1.5, 1.5, 61)
    ay = AxisSpec("Z0", -1.5, 1.5, 41)
    s1 = scan_transmission(device_1q, ax, ay, seed=5, mode="sawtooth")
    s2 = scan_transmission(device_1q, ax, ay, seed=5, mode="sawtooth")
    assert s1.values.shape == (41, 61)
    assert np.array_equal(s1.values, s2.values)
    assert s1.values.min() >= 0.0 and s1.values.max() <= 1.0
    assert not s1.corrected
    with pytest.raises(ValueError):
        s1.values[0, 0] = 2.0  # read-only


def test_scan_rejects_duplicate_axes(device_1q):
    ax = AxisSpec("X0", -1.0, 1.0, 31)
    with pytest.raises(ValidationError):
        scan_transmission(device_1q, ax, ax)


def test_scan_warns_when_probe_out_of_band(device_1q):
    ax = AxisSpec("X0", -1.0, 1.0, 31)
    ay = AxisSpec("Z0", -1.0, 1.0, 31)
    with pytest.warns(UserWarning, match="outside resonator band"):
        scan_transmission(device_1q, ax, ay, probe_frequency_ghz=6.5)


def test_grid_validation():
    ax = AxisSpec("X0", 0.0, 1.0, 16)
    ay = AxisSpec("Z0", 0.0, 1.0, 16)
    acq = simulate_acquisition_time(16, 16, "sawtooth")
    with pytest.raises(ValidationError):
        ScanGrid2D(ax, ay, np.zeros((8, 16)), acq)
    with pytest.raises(ValidationError):
        ScanGrid2D(ax, ay, np.full((16, 16), 1.5), acq)


# ---------------------------------------------------------------------------
# affine correction algebra
# ---------------------------------------------------------------------------

@st.composite
def _well_conditioned_affine(draw):
    """2x2 basis within 40% of the identity plus an offset."""
    eps = st.floats(-0.4, 0.4, allow_nan=False)
    t = np.array([[1.0 + draw(eps), draw(eps)],
                  [draw(eps), 1.0 + draw(eps)]])
    assume(abs(np.linalg.det(t)) > 0.3)
    off = np.array([draw(st.floats(-2, 2)), draw(st.floats(-2, 2))])
    return t, off


@given(_well_conditioned_affine(),
       st.floats(-3, 3, allow_nan=False), st.floats(-3, 3, allow_nan=False))
def test_correction_roundtrip(affine, wx, wy):
    t, off = affine
    corr = AffineCorrection.from_matrix(t, off)
    w = np.array([wx, wy])
    u = corr.corrected_to_nominal(w)
    assert np.allclose(corr.nominal_to_corrected(u), w, atol=1e-9)
    assert np.allclose(u, t @ w + off, atol=1e-12)


def test_correction_batch_shape():
    corr = AffineCorrection.from_matrix(np.eye(2) * 2.0, np.array([1.0, -1.0]))
    w = np.arange(10.0).reshape(2, 5)
    u = corr.corrected_to_nominal(w)
    assert u.shape == (2, 5)
    assert np.allclose(corr.nominal_to_corrected(u), w)


def test_correction_compose_is_function_composition():
    a = AffineCorrection.from_matrix(np.array([[1.0, 0.2], [0.1, 1.0]]),
                                     np.array([0.3, -0.2]))
    b = AffineCorrection.from_matrix(np.array([[1.05, -0.02], [0.03, 0.98]]),
                                     np.array([0.01, 0.02]))
    w = np.array([0.7, -1.3])
    composed = a.compose(b)
    assert np.allclose(composed.corrected_to_nominal(w),
                       a.corrected_to_nominal(b.corrected_to_nominal(w)),
                       atol=1e-12)


def test_correction_requires_consistent_inverse():
    with pytest.raises(ValidationError):
        AffineCorrection(T=np.eye(2), T_inv=2 * np.eye(2),
                         offset=np.zeros(2))


# ---------------------------------------------------------------------------
# lattice fitting primitives
# ---------------------------------------------------------------------------

@given(_well_conditioned_affine())
def test_fit_affine_exact_on_noiseless_lattice(affine):
    a_true, b_true = affine
    indexed = [(a_true @ np.array([m, n], dtype=float) + b_true, (m, n))
               for m in range(-2, 3) for n in range(-2, 3)]
    fit, corr = fit_affine(indexed)
    assert np.allclose(fit.primitive_vectors, a_true, atol=1e-10)
    assert np.allclose(fit.origin, b_true, atol=1e-10)
    assert fit.residual_rms < 1e-10
    assert np.allclose(corr.T, a_true, atol=1e-10)


def test_fit_affine_rejects_degenerate_input():
    a = np.eye(2)
    line = [(a @ np.array([k, 0.0]), (k, 0)) for k in range(5)]
    with pytest.raises(ValidationError, match="collinear"):
        fit_affine(line)
    with pytest.raises(ValidationError, match="at least 3"):
        fit_affine(line[:2])


def test_assign_indices_rejects_outliers():
    a = np.eye(2)
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.02, 1.01],
                    [0.4, 0.6]])  # last point sits mid-cell
    indexed = assign_lattice_indices(pts, a, reference=np.zeros(2))
    kept = {idx for _, idx in indexed}
    assert kept == {(0, 0), (1, 0), (0, 1), (1, 1)}
    with pytest.raises(ValidationError):
        assign_lattice_indices(pts, np.zeros((2, 2)))
    with pytest.raises(ValidationError):
        assign_lattice_indices(np.zeros((3,)), a)


def test_assign_indices_reference_shifts_origin():
    a = np.eye(2)
    pts = np.array([[5.0, 5.0], [6.0, 5.0], [5.0, 6.0]])
    indexed = assign_lattice_indices(pts, a, reference=np.array([5.0, 5.0]))
    assert dict((tuple(c), i) for c, i in indexed)[(5.0, 5.0)] == (0, 0)


# ---------------------------------------------------------------------------
# spectral basis estimation
# ---------------------------------------------------------------------------

def _synthetic_scan(a_true, b_true, span=4.0, n=121, noise=0.0, seed=0):
    """Noise-free bump lattice with a known affine frame."""
    ax = AxisSpec("X0", -span / 2, span / 2, n)
    ay = AxisSpec("Z0", -span / 2, span / 2, n)
    xg, yg = np.meshgrid(ax.values, ay.values)
    pts = np.stack([xg.ravel(), yg.ravel()])
    z = np.linalg.solve(a_true, pts - b_true[:, None])
    d = z - np.round(z)
    vals = 0.7 + 0.25 * np.exp(-0.5 * (np.hypot(d[0], d[1]) / 0.12) ** 2)
    vals = vals.reshape(n, n)
    if noise:
        vals = vals + noise * np.random.default_rng(seed).standard_normal(vals.shape)
    acq = simulate_acquisition_time(n, n, "sawtooth")
    return ScanGrid2D(ax, ay, np.clip(vals, 0, 1), acq)


def test_estimate_basis_on_known_lattice():
    a_true = np.array([[1.0, -0.22], [0.15, 0.95]])
    scan = _synthetic_scan(a_true, np.array([0.3, -0.1]))
    est = estimate_basis_fft(scan)
    # canonical columns approximate the true primitive vectors
    assert np.allclose(est, a_true, atol=0.12)
    # each column points along its own axis (the canonical cone)
    assert est[0, 0] > abs(est[1, 0])
    assert est[1, 1] > abs(est[0, 1])


def test_estimate_basis_needs_two_periods():
    a_true = np.eye(2)
    scan = _synthetic_scan(a_true, np.zeros(2), span=1.5, n=61)
    with pytest.raises(CalibrationInsufficientError):
        estimate_basis_fft(scan)


def test_detect_centers_on_true_lattice(device_1q):
    half = DEFAULT_SPAN_PERIODS / 2
    ax = AxisSpec("X0", -half, half, DEFAULT_POINTS)
    ay = AxisSpec("Z0", -half, half, DEFAULT_POINTS)
    scan = scan_transmission(device_1q, ax, ay, noise_sigma=0.0, mode="sawtooth")
    centers = detect_centers_auto(scan)
    a_true, b_true = _true_lattice(device_1q)
    assert len(centers) >= 8
    # every detected center sits on the hidden lattice to a fraction of a pixel
    assert _nearest_lattice_distance(centers, a_true, b_true) < 0.25 * ax.step


def test_fit_lattice_auto_recovers_truth(device_1q):
    half = DEFAULT_SPAN_PERIODS / 2
    ax = AxisSpec("X0", -half, half, DEFAULT_POINTS)
    ay = AxisSpec("Z0", -half, half, DEFAULT_POINTS)
    scan = scan_transmission(device_1q, ax, ay, noise_sigma=0.0, mode="sawtooth")
    fit, corr, centers = fit_lattice_auto(scan)
    a_true, b_true = _true_lattice(device_1q)
    assert np.allclose(fit.primitive_vectors, a_true, atol=0.01)
    # fitted origin lies on the true lattice (any node is equivalent)
    z = np.linalg.solve(a_true, fit.origin - b_true)
    assert np.allclose(z, np.round(z), atol=0.02)
    assert fit.residual_rms < 0.01
    assert fit.center_source == "automatic"


def test_calibration_insufficient_span(device_1q):
    with pytest.raises(CalibrationInsufficientError):
        calibrate_auto(device_1q, span=1.2, n_points=41, verify=False)


# ---------------------------------------------------------------------------
# end-to-end calibration with noise
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("seed", [3, 17])
def test_calibrate_auto_meets_budget(seed):
    device = build_device(DeviceConfig(n_qubits=1, crosstalk_fraction=0.3,
                                       seed=seed))
    result = calibrate_auto(device, seed=seed)
    assert result.lattice_fit.residual_rms < 0.02
    assert result.verification is not None
    assert result.verification.residual_offdiag_fraction < 0.01
    for ang in result.verification.axis_angle_errors_deg:
        assert abs(ang) < 1.0
    # the correction matrix reproduces the hidden lattice frame
    a_true, _ = _true_lattice(device)
    assert np.allclose(result.correction.T, a_true, atol=0.02)


def test_corrected_scan_axes_are_orthogonal(device_1q):
    result = calibrate_auto(device_1q, seed=1, verify=False)
    report = verify_orthogonality(device_1q, result.correction, seed=2)
    refit = report.refit.primitive_vectors
    # in corrected coordinates the basis is the identity to within a percent
    assert np.allclose(refit, np.eye(2), atol=0.01)


def test_corrected_scan_flag_and_mapping(device_1q):
    result = calibrate_auto(device_1q, seed=1, verify=False)
    ax = AxisSpec("X0", -1.5, 1.5, 61)
    ay = AxisSpec("Z0", -1.5, 1.5, 61)
    with warnings.catch_warnings():
        warnings.simplefilter("error")  # corrected scan must stay in band
        scan = scan_transmission(device_1q, ax, ay, correction=result.correction,
                                 noise_sigma=0.0, mode="sawtooth")
    assert scan.corrected
    # feature nearest the origin sits at an integer corrected coordinate
    centers = detect_centers_auto(scan)
    nearest = centers[np.argmin(np.linalg.norm(centers, axis=1))]
    assert np.allclose(nearest, np.round(nearest), atol=0.05)
