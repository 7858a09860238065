"""Crosstalk calibration: scan, detect, fit, correct, verify.

A 2D transmission scan over two nominal flux coordinates shows a periodic
lattice of bright features. Crosstalk shears the lattice away from the
coordinate axes; fitting the lattice as an affine map (primitive vectors
plus origin) yields the correction that restores orthogonal control.

Nominal coordinates are "designed flux" units: the flux a line would apply
through its own loop per the designed mutual, so a perfectly orthogonal
device has unit lattice period on both axes. Corrected coordinates are
lattice units, i.e. features sit on the integer grid once the correction
is applied.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.ndimage import gaussian_filter, maximum_filter

from .device import DeviceTruth, FluxVector
from .errors import CalibrationInsufficientError, ValidationError

BUMP_WIDTH_PHI0 = 0.08
"""Width of the wrapped-Gaussian feature at each lattice center."""

DEFAULT_SPAN_PERIODS = 4.0
DEFAULT_POINTS = 121

_MIN_CYCLES = 1.9  # visible-period floor for basis estimation


# ---------------------------------------------------------------------------
# grid, acquisition and fit containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AxisSpec:
    """One scan axis: a control line (or corrected coordinate) and its grid."""

    label: str
    start: float
    stop: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 8:
            raise ValidationError("need at least 8 points per axis")
        if not self.stop > self.start:
            raise ValidationError("axis must be strictly increasing")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.n_points)

    @property
    def step(self) -> float:
        return (self.stop - self.start) / (self.n_points - 1)

    @property
    def extent(self) -> float:
        return self.stop - self.start


@dataclass(frozen=True)
class AcquisitionReport:
    """Time accounting for one 2D scan."""

    mode: str
    per_point_dwell_us: float
    n_averages: int
    total_time_s: float
    settle_time_ms: float | None = None
    ramp_frequency_hz: float | None = None
    n_lines_scanned: int = 2
    frame_overhead_s: float = 0.0


@dataclass(frozen=True)
class ScanGrid2D:
    """2D map of transmission magnitude vs two control coordinates.

    ``values[iy, ix]`` is the transmission at (axis_x.values[ix],
    axis_y.values[iy]).
    """

    axis_x: AxisSpec
    axis_y: AxisSpec
    values: np.ndarray
    acquisition: AcquisitionReport
    corrected: bool = False
    probe_frequency_ghz: float | None = None
    seed: int | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.axis_y.n_points, self.axis_x.n_points):
            raise ValidationError("scan values shape must be (n_y, n_x)")
        if v.min() < 0.0 or v.max() > 1.0:
            raise ValidationError("transmission values must lie in [0, 1]")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class LatticeFit:
    """Affine lattice u = A z + b fitted to detected/clicked centers."""

    primitive_vectors: np.ndarray  # 2x2, columns are the basis vectors
    origin: np.ndarray
    residual_rms: float
    n_centers_used: int
    center_source: str  # "manual" | "automatic"

    def __post_init__(self):
        a = np.asarray(self.primitive_vectors, dtype=float)
        b = np.asarray(self.origin, dtype=float)
        if a.shape != (2, 2) or b.shape != (2,):
            raise ValidationError("lattice fit needs a 2x2 basis and a 2-vector origin")
        if abs(np.linalg.det(a)) < 1e-12:
            raise ValidationError("lattice basis is singular")
        if not np.isfinite(self.residual_rms):
            raise ValidationError("residual must be finite")
        if self.n_centers_used < 3:
            raise ValidationError("need at least 3 centers")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "primitive_vectors", a)
        object.__setattr__(self, "origin", b)


@dataclass(frozen=True)
class AffineCorrection:
    """Correction mapping between nominal and corrected (lattice) coordinates.

    corrected -> nominal: u = T w + offset; nominal -> corrected:
    w = T_inv (u - offset). Applying the correction to a fitted center
    therefore lands on its integer lattice index.
    """

    T: np.ndarray
    T_inv: np.ndarray
    offset: np.ndarray
    axes: tuple[str, str] = ("X0", "Z0")

    def __post_init__(self):
        t = np.asarray(self.T, dtype=float)
        tinv = np.asarray(self.T_inv, dtype=float)
        off = np.asarray(self.offset, dtype=float)
        if t.shape != (2, 2) or tinv.shape != (2, 2) or off.shape != (2,):
            raise ValidationError("correction needs 2x2 matrices and a 2-vector offset")
        if not np.allclose(t @ tinv, np.eye(2), atol=1e-10):
            raise ValidationError("T * T_inv must be identity within 1e-10")
        for a in (t, tinv, off):
            a.setflags(write=False)
        object.__setattr__(self, "T", t)
        object.__setattr__(self, "T_inv", tinv)
        object.__setattr__(self, "offset", off)

    @classmethod
    def from_matrix(cls, t: np.ndarray, offset: np.ndarray,
                    axes: tuple[str, str] = ("X0", "Z0")) -> "AffineCorrection":
        t = np.asarray(t, dtype=float)
        return cls(T=t, T_inv=np.linalg.inv(t), offset=np.asarray(offset, dtype=float),
                   axes=axes)

    def corrected_to_nominal(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        return (self.T @ w.reshape(2, -1) + self.offset[:, None]).reshape(w.shape)

    def nominal_to_corrected(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return (self.T_inv @ (u.reshape(2, -1) - self.offset[:, None])).reshape(u.shape)

    def compose(self, refinement: "AffineCorrection") -> "AffineCorrection":
        """Fold a second-pass correction (fitted in corrected coords) into this one."""
        t = self.T @ refinement.T
        off = self.T @ refinement.offset + self.offset
        return AffineCorrection.from_matrix(t, off, axes=self.axes)


@dataclass(frozen=True)
class VerificationReport:
    """Result of re-scanning and re-fitting with a correction applied."""

    axis_angle_errors_deg: tuple[float, float]
    residual_offdiag_fraction: float
    refit: LatticeFit


@dataclass(frozen=True)
class CalibrationResult:
    scan: ScanGrid2D
    centers: np.ndarray
    lattice_fit: LatticeFit
    correction: AffineCorrection
    verification: VerificationReport | None = None


# ---------------------------------------------------------------------------
# synthetic transmission model
# ---------------------------------------------------------------------------

def _wrapped_gaussian(delta: np.ndarray, width: float) -> np.ndarray:
    """Unit-period bump: Gaussian of the distance to the nearest integer."""
    d = delta - np.round(delta)
    return np.exp(-0.5 * (d / width) ** 2)


def _pair_transmission(device: DeviceTruth, resonator: int, flux_x, flux_z,
                       probe_frequency_ghz: float) -> np.ndarray:
    res = device.resonators[resonator]
    lx, lz = device.loop_indices_of_qubit(resonator)
    ox = device.pattern_fractional_offset[lx]
    oz = device.pattern_fractional_offset[lz]
    bump = (_wrapped_gaussian(np.asarray(flux_x) - ox, BUMP_WIDTH_PHI0)
            * _wrapped_gaussian(np.asarray(flux_z) - oz, BUMP_WIDTH_PHI0))
    f_r = res.f_down_ghz + res.flux_pull_mhz * 1e-3 * bump
    detune = 2.0 * (probe_frequency_ghz - f_r) / res.kappa_ghz
    return 1.0 - res.notch_depth / np.sqrt(1.0 + detune * detune)


def transmission_model(device: DeviceTruth, flux: FluxVector,
                       probe_frequency_ghz: float, resonator: int = 0) -> float:
    """Noiseless resonator transmission at the given loop fluxes.

    Periodic with period 1 Phi0 in each loop flux; one bump per unit cell
    centered at the device's fractional pattern offset, feeding a Lorentzian
    line in the probe frequency.
    """
    if len(flux.labels) != device.n_loops:
        raise ValidationError("flux vector must cover all loops")
    lx, lz = device.loop_indices_of_qubit(resonator)
    return float(_pair_transmission(device, resonator, flux.values[lx],
                                    flux.values[lz], probe_frequency_ghz))


def simulate_acquisition_time(n_points_x: int, n_points_y: int, mode: str,
                              dwell_us: float = 2.0,
                              settle_ms: float = 1000.0,
                              ramp_hz: float = 500.0,
                              n_averages: int = 1000,
                              n_lines_scanned: int = 2,
                              frame_overhead_s: float = 2.0) -> AcquisitionReport:
    """Exact time accounting for raster vs sawtooth acquisition.

    raster:   total = n_x * n_y * (settle + dwell), stepping point by point
              with a per-point settle wait.
    sawtooth: total = n_lines_scanned * n_averages / ramp_hz + frame overhead;
              all sample points along a ramp are captured within one ramp
              period and averaged over many ramp cycles on the digitizer.
    """
    if dwell_us <= 0:
        raise ValidationError("dwell must be positive")
    if mode == "raster":
        if settle_ms <= 0:
            raise ValidationError("settle time must be positive")
        total = n_points_x * n_points_y * (settle_ms * 1e-3 + dwell_us * 1e-6)
        return AcquisitionReport(mode="raster", per_point_dwell_us=dwell_us,
                                 n_averages=1, total_time_s=total,
                                 settle_time_ms=settle_ms)
    if mode == "sawtooth":
        if not 1.0 <= dwell_us <= 5.0:
            raise ValidationError("sawtooth dwell must be 1-5 us")
        if not 100.0 <= ramp_hz <= 1000.0:
            raise ValidationError("ramp frequency must be 100 Hz - 1 kHz")
        if n_averages < 1:
            raise ValidationError("need at least one average")
        if max(n_points_x, n_points_y) * dwell_us * 1e-6 > 1.0 / ramp_hz:
            raise ValidationError("samples do not fit within one ramp period")
        total = n_lines_scanned * n_averages / ramp_hz + frame_overhead_s
        return AcquisitionReport(mode="sawtooth", per_point_dwell_us=dwell_us,
                                 n_averages=n_averages, total_time_s=total,
                                 ramp_frequency_hz=ramp_hz,
                                 n_lines_scanned=n_lines_scanned,
                                 frame_overhead_s=frame_overhead_s)
    raise ValidationError(f"unknown acquisition mode {mode!r}")


def scan_transmission(device: DeviceTruth, axis_x: AxisSpec, axis_y: AxisSpec,
                      probe_frequency_ghz: float | None = None,
                      mode: str = "raster",
                      correction: AffineCorrection | None = None,
                      noise_sigma: float | None = None,
                      seed: int = 0,
                      resonator: int | None = None,
                      **acq_kwargs) -> ScanGrid2D:
    """Sweep two control coordinates and record resonator transmission.

    Without a correction the axis labels name control lines and the grid is
    in nominal flux units. With a correction the grid is in corrected
    (lattice) coordinates, which are mapped through the correction to
    nominal drives before hitting the device.
    """
    if correction is None:
        line_a = device.line_index(axis_x.label)
        line_b = device.line_index(axis_y.label)
    else:
        line_a = device.line_index(correction.axes[0])
        line_b = device.line_index(correction.axes[1])
    if line_a == line_b:
        raise ValidationError("scan axes must be two distinct control lines")
    if resonator is None:
        resonator = line_a // 2
    res = device.resonators[resonator]
    if probe_frequency_ghz is None:
        probe_frequency_ghz = res.f_down_ghz

    wx, wy = np.meshgrid(axis_x.values, axis_y.values)
    if correction is not None:
        ux = correction.T[0, 0] * wx + correction.T[0, 1] * wy + correction.offset[0]
        uy = correction.T[1, 0] * wx + correction.T[1, 1] * wy + correction.offset[1]
    else:
        ux, uy = wx, wy

    mutuals = device.config.mutuals_per_line()
    i_a = ux / mutuals[line_a]
    i_b = uy / mutuals[line_b]

    m = device.true_control_matrix
    lx, lz = device.loop_indices_of_qubit(resonator)
    flux_x = m[lx, line_a] * i_a + m[lx, line_b] * i_b + device.flux_offsets[lx]
    flux_z = m[lz, line_a] * i_a + m[lz, line_b] * i_b + device.flux_offsets[lz]

    band = abs(probe_frequency_ghz - res.f_down_ghz)
    if band > 25.0 * res.kappa_ghz + res.flux_pull_mhz * 1e-3:
        warnings.warn("probe frequency outside resonator band; scan will be flat",
                      stacklevel=2)

    values = _pair_transmission(device, resonator, flux_x, flux_z, probe_frequency_ghz)
    if noise_sigma is None:
        noise_sigma = device.config.noise.scan_noise_sigma
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        values = values + noise_sigma * rng.standard_normal(values.shape)
    values = np.clip(values, 0.0, 1.0)

    acq = simulate_acquisition_time(axis_x.n_points, axis_y.n_points, mode, **acq_kwargs)
    return ScanGrid2D(axis_x=axis_x, axis_y=axis_y, values=values, acquisition=acq,
                      corrected=correction is not None,
                      probe_frequency_ghz=probe_frequency_ghz, seed=seed)


# ---------------------------------------------------------------------------
# lattice detection
# ---------------------------------------------------------------------------

def _parabolic_offset(lm: float, l0: float, lp: float) -> float:
    denom = lm - 2.0 * l0 + lp
    if abs(denom) < 1e-300:
        return 0.0
    return float(np.clip(0.5 * (lm - lp) / denom, -0.5, 0.5))


def estimate_basis_fft(scan: ScanGrid2D) -> np.ndarray:
    """Estimate the lattice basis from the two fundamental spectral peaks.

    Returns a 2x2 matrix whose columns are the primitive vectors in axis
    units, canonicalized so column j is the lattice vector best aligned
    with coordinate axis j.
    """
    z = scan.values - scan.values.mean()
    spec = np.abs(np.fft.fft2(z))
    ny, nx = z.shape
    # cycles across the full window per bin step
    kx = np.fft.fftfreq(nx) * nx
    ky = np.fft.fftfreq(ny) * ny
    kxg, kyg = np.meshgrid(kx, ky)

    half_plane = (kyg > 0) | ((kyg == 0) & (kxg > 0))
    rad = np.hypot(kxg, kyg)
    # keep the low cutoff below 2 cycles so an under-sampled lattice is seen
    # as such (and rejected) instead of aliasing onto a harmonic
    valid = half_plane & (rad >= 1.1) & (rad <= min(nx, ny) / 4.0)

    def refined_peak(mask):
        masked = np.where(mask, spec, 0.0)
        iy, ix = np.unravel_index(np.argmax(masked), masked.shape)
        if masked[iy, ix] <= 0:
            raise CalibrationInsufficientError("no spectral peak found")
        logm = np.log(spec + 1e-300)
        dx = _parabolic_offset(logm[iy, (ix - 1) % nx], logm[iy, ix],
                               logm[iy, (ix + 1) % nx])
        dy = _parabolic_offset(logm[(iy - 1) % ny, ix], logm[iy, ix],
                               logm[(iy + 1) % ny, ix])
        return np.array([kxg[iy, ix] + dx, kyg[iy, ix] + dy])

    q1 = refined_peak(valid)
    # second fundamental: not (anti)parallel to the first
    u1 = q1 / np.linalg.norm(q1)
    cosang = (kxg * u1[0] + kyg * u1[1]) / np.where(rad > 0, rad, 1.0)
    q2 = refined_peak(valid & (np.abs(cosang) < 0.966))

    cycles_x = max(abs(q1[0]), abs(q2[0]))
    cycles_y = max(abs(q1[1]), abs(q2[1]))
    if cycles_x < _MIN_CYCLES or cycles_y < _MIN_CYCLES:
        raise CalibrationInsufficientError(
            f"scan covers fewer than 2 periods per axis "
            f"({cycles_x:.2f} x {cycles_y:.2f} cycles)")

    # convert from cycles/window to cycles/axis-unit
    q1 = q1 / np.array([scan.axis_x.extent, scan.axis_y.extent])
    q2 = q2 / np.array([scan.axis_x.extent, scan.axis_y.extent])
    basis = np.linalg.inv(np.vstack([q1, q2]))
    return _canonical_basis(basis)


def _canonical_basis(basis: np.ndarray) -> np.ndarray:
    """Pick the lattice basis closest to the coordinate axes.

    The spectral peaks can return any reduced basis. Control crosstalk is
    bounded below 50%, so each physical basis vector lies within 45 degrees
    of its coordinate axis; within that cone longer integer combinations
    can align better than the true vector, so the canonical choice is the
    shortest lattice vector in each cone, not the best aligned one.
    """
    combos = []
    for m in range(-2, 3):
        for n in range(-2, 3):
            if m == 0 and n == 0:
                continue
            combos.append(basis @ np.array([m, n], dtype=float))
    combos = np.array(combos)
    min_len = np.linalg.norm(combos, axis=1).min()

    def shortest_in_cone(axis: int):
        other = 1 - axis
        cand = combos[(combos[:, axis] > 0)
                      & (np.abs(combos[:, other]) < combos[:, axis])]
        if cand.size == 0:
            raise CalibrationInsufficientError(
                "lattice too sheared to assign axes")
        return cand[np.argmin(np.linalg.norm(cand, axis=1))]

    v1 = shortest_in_cone(0)
    v2 = shortest_in_cone(1)
    out = np.column_stack([v1, v2])
    if abs(np.linalg.det(out)) < 0.1 * min_len**2:
        raise CalibrationInsufficientError("degenerate lattice basis estimate")
    return out


def _centroid_refine(z: np.ndarray, bg: float, iy: int, ix: int, radius: int
                     ) -> tuple[float, float] | None:
    """Intensity-weighted centroid within a circular window around a peak.

    The features saturate at the top (the resonator is pulled many
    linewidths), so the position information lives in the shoulders; a
    windowed centroid of the background-subtracted intensity is unbiased
    for the symmetric feature and averages the pixel noise down. Returns
    None when the window does not fit inside the map.
    """
    ny, nx = z.shape
    if iy < radius or iy >= ny - radius or ix < radius or ix >= nx - radius:
        return None
    win = z[iy - radius:iy + radius + 1, ix - radius:ix + radius + 1] - bg
    yy, xx = np.mgrid[-radius:radius + 1, -radius:radius + 1]
    mask = (xx * xx + yy * yy <= radius * radius)
    w = np.where(mask, np.maximum(win, 0.0), 0.0)
    total = w.sum()
    if total <= 0:
        return float(ix), float(iy)
    return ix + float((w * xx).sum() / total), iy + float((w * yy).sum() / total)


def detect_centers_auto(scan: ScanGrid2D, smooth_px: float = 1.2,
                        threshold_fraction: float = 0.5) -> np.ndarray:
    """Locate lattice centers: smoothed local maxima with sub-pixel refinement.

    Non-max suppression uses half the estimated lattice period so at most
    one center survives per unit cell. Returns an (n, 2) array of (x, y)
    coordinates in axis units; raises if fewer than 3 centers are found or
    fewer than 2 periods are visible.
    """
    basis = estimate_basis_fft(scan)
    steps = np.array([scan.axis_x.step, scan.axis_y.step])
    basis_px = basis / steps[:, None]
    min_period_px = min(np.linalg.norm(basis_px[:, 0]), np.linalg.norm(basis_px[:, 1]))

    z = gaussian_filter(scan.values, sigma=smooth_px, mode="nearest")
    bg = float(np.median(z))
    peak = float(z.max())
    if peak <= bg:
        raise CalibrationInsufficientError("no contrast in scan")
    thresh = bg + threshold_fraction * (peak - bg)

    radius = max(2, int(round(0.45 * min_period_px)))
    yy, xx = np.ogrid[-radius:radius + 1, -radius:radius + 1]
    footprint = xx * xx + yy * yy <= radius * radius
    local_max = maximum_filter(z, footprint=footprint, mode="nearest")
    is_peak = (z >= local_max) & (z >= thresh)

    centroid_radius = max(2, int(round(0.22 * min_period_px)))
    centers = []
    for iy, ix in zip(*np.nonzero(is_peak)):
        refined = _centroid_refine(z, bg, iy, ix, centroid_radius)
        if refined is None:
            continue  # window clipped by the map border; feature dropped
        px, py = refined
        centers.append([scan.axis_x.start + px * scan.axis_x.step,
                        scan.axis_y.start + py * scan.axis_y.step])
    if len(centers) < 3:
        raise CalibrationInsufficientError(
            f"only {len(centers)} centers detected; need at least 3")
    return np.array(centers)


def assign_lattice_indices(centers: np.ndarray, basis: np.ndarray,
                           reference: np.ndarray | None = None,
                           max_residual: float = 0.25,
                           ) -> list[tuple[np.ndarray, tuple[int, int]]]:
    """Attach integer lattice indices to centers by rounding basis coordinates.

    Centers whose per-component rounding residual exceeds ``max_residual``
    lattice units are rejected. Reference defaults to the center nearest
    the centroid of all centers.
    """
    centers = np.asarray(centers, dtype=float)
    if centers.ndim != 2 or centers.shape[1] != 2:
        raise ValidationError("centers must be (n, 2)")
    basis = np.asarray(basis, dtype=float)
    scale = np.linalg.norm(basis, axis=0).min()
    if scale <= 0 or abs(np.linalg.det(basis)) < 1e-6 * scale * scale:
        raise ValidationError("ambiguous (near-singular) lattice basis guess")
    if reference is None:
        centroid = centers.mean(axis=0)
        reference = centers[np.argmin(np.linalg.norm(centers - centroid, axis=1))]

    binv = np.linalg.inv(basis)
    out = []
    for c in centers:
        zc = binv @ (c - reference)
        idx = np.round(zc)
        if np.max(np.abs(zc - idx)) > max_residual:
            continue
        out.append((c, (int(idx[0]), int(idx[1]))))
    return out


def fit_affine(indexed_centers: list[tuple[np.ndarray, tuple[int, int]]],
               center_source: str = "automatic",
               axes: tuple[str, str] = ("X0", "Z0"),
               ) -> tuple[LatticeFit, AffineCorrection]:
    """Least-squares affine lattice fit u_k ~ A (m_k, n_k) + b.

    Exact (machine precision) on noiseless exact-lattice input. Raises on
    fewer than 3 centers or a collinear (rank-deficient) index set.
    """
    if len(indexed_centers) < 3:
        raise ValidationError("need at least 3 indexed centers")
    u = np.array([c for c, _ in indexed_centers], dtype=float)
    z = np.array([idx for _, idx in indexed_centers], dtype=float)
    design = np.column_stack([z, np.ones(len(z))])
    if np.linalg.matrix_rank(design) < 3:
        raise ValidationError("centers are collinear; cannot fit a 2D lattice")
    coef, _, _, _ = np.linalg.lstsq(design, u, rcond=None)
    a = coef[:2].T  # columns are primitive vectors
    b = coef[2]
    resid = u - (design @ coef)
    rms = float(np.sqrt(np.mean(resid**2)))
    fit = LatticeFit(primitive_vectors=a, origin=b, residual_rms=rms,
                     n_centers_used=len(indexed_centers), center_source=center_source)
    corr = AffineCorrection.from_matrix(a, b, axes=axes)
    return fit, corr


def fit_lattice_auto(scan: ScanGrid2D, axes: tuple[str, str] | None = None,
                     ) -> tuple[LatticeFit, AffineCorrection, np.ndarray]:
    """Detect centers, seed a basis from the spectrum, and fit in two passes.

    The first pass indexes only centers that round cleanly under the
    spectral basis estimate; the refined fit from those then re-indexes all
    centers for the final fit.
    """
    if axes is None:
        axes = (scan.axis_x.label, scan.axis_y.label)
    centers = detect_centers_auto(scan)
    basis = estimate_basis_fft(scan)
    first = assign_lattice_indices(centers, basis)
    if len(first) < 3:
        raise CalibrationInsufficientError("too few cleanly indexed centers")
    # pass 1 may index in any unimodular frame; the affine fit is exact in
    # that frame, and its basis is precise enough (unlike the raw spectral
    # estimate) for the axis-cone canonicalization to be unambiguous
    fit1, _ = fit_affine(first, axes=axes)
    canonical = _canonical_basis(fit1.primitive_vectors)
    second = assign_lattice_indices(centers, canonical, reference=fit1.origin)
    if len(second) < 3:
        raise CalibrationInsufficientError("lattice indexing collapsed on refinement")
    fit, corr = fit_affine(second, axes=axes)
    return fit, corr, centers


def verify_orthogonality(device: DeviceTruth, correction: AffineCorrection,
                         span: float = DEFAULT_SPAN_PERIODS,
                         n_points: int = DEFAULT_POINTS,
                         noise_sigma: float | None = None,
                         seed: int = 1, mode: str = "sawtooth") -> VerificationReport:
    """Re-scan with the correction applied and measure the residual shear.

    Reports the angle of each fitted primitive vector away from its
    coordinate axis and the residual off-diagonal fraction
    max(|A10/A00|, |A01/A11|) of the re-fitted lattice basis.
    """
    half = span / 2.0
    ax = AxisSpec(label=correction.axes[0], start=-half, stop=half, n_points=n_points)
    ay = AxisSpec(label=correction.axes[1], start=-half, stop=half, n_points=n_points)
    scan = scan_transmission(device, ax, ay, correction=correction,
                             noise_sigma=noise_sigma, seed=seed, mode=mode)
    refit, _, _ = fit_lattice_auto(scan, axes=correction.axes)
    a = refit.primitive_vectors
    ang1 = np.degrees(np.arctan2(a[1, 0], a[0, 0]))
    ang2 = np.degrees(np.arctan2(a[1, 1], a[0, 1])) - 90.0
    offdiag = max(abs(a[1, 0] / a[0, 0]), abs(a[0, 1] / a[1, 1]))
    return VerificationReport(axis_angle_errors_deg=(float(ang1), float(ang2)),
                              residual_offdiag_fraction=float(offdiag),
                              refit=refit)


def calibrate_auto(device: DeviceTruth, axes: tuple[str, str] = ("X0", "Z0"),
                   span: float = DEFAULT_SPAN_PERIODS,
                   n_points: int = DEFAULT_POINTS,
                   noise_sigma: float | None = None, seed: int = 0,
                   mode: str = "sawtooth", verify: bool = True) -> CalibrationResult:
    """Full automatic pipeline: scan, detect, index, fit, verify."""
    half = span / 2.0
    ax = AxisSpec(label=axes[0], start=-half, stop=half, n_points=n_points)
    ay = AxisSpec(label=axes[1], start=-half, stop=half, n_points=n_points)
    scan = scan_transmission(device, ax, ay, noise_sigma=noise_sigma, seed=seed,
                             mode=mode)
    fit, corr, centers = fit_lattice_auto(scan, axes=axes)
    report = None
    if verify:
        report = verify_orthogonality(device, corr, span=span, n_points=n_points,
                                      noise_sigma=noise_sigma, seed=seed + 1,
                                      mode=mode)
    return CalibrationResult(scan=scan, centers=centers, lattice_fit=fit,
                             correction=corr, verification=report)
