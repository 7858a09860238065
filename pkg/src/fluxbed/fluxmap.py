"""Mapping between flux bias points and effective Ising coefficients.

The x-loop flux tunes the tunneling amplitude Delta (steeply, roughly
exponentially over the operating range); the z-loop flux tilts the double
well, giving a bias epsilon = 2 Ip Phi_z / h that is linear in both the
flux and the persistent current.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .units import PHI0_WB, PLANCK_JS

# (x-loop flux in mPhi0, tunneling Delta in GHz); log-linear between knots
DELTA_TABLE_MPHI0 = np.array([500.0, 670.0, 1000.0])
DELTA_TABLE_GHZ = np.array([10.0, 4.2, 0.05])

_LOG_DELTA = np.log(DELTA_TABLE_GHZ)

EPSILON_GHZ_PER_MPHI0_AT_100NA = (
    2.0 * 100e-9 * 1e-3 * PHI0_WB / PLANCK_JS / 1e9)
"""Bias slope 2 Ip Phi0 / h evaluated at Ip = 100 nA, per mPhi0 of z flux."""


def delta_ghz(phi_x_mphi0) -> np.ndarray | float:
    """Tunneling amplitude at the given x-loop flux (mPhi0).

    Interpolates log-linearly within the tabulated operating range and
    clamps outside it.
    """
    phi = np.asarray(phi_x_mphi0, dtype=float)
    out = np.exp(np.interp(phi, DELTA_TABLE_MPHI0, _LOG_DELTA))
    return float(out) if np.isscalar(phi_x_mphi0) else out


def epsilon_ghz(phi_z_mphi0, ip_na: float = 100.0) -> np.ndarray | float:
    """Energy bias at the given z-loop flux (mPhi0) and persistent current."""
    if ip_na <= 0:
        raise ValidationError("persistent current must be positive")
    phi = np.asarray(phi_z_mphi0, dtype=float)
    out = EPSILON_GHZ_PER_MPHI0_AT_100NA * (ip_na / 100.0) * phi
    return float(out) if np.isscalar(phi_z_mphi0) else out


def flux_for_delta(target_ghz: float) -> float:
    """Inverse lookup: x-loop flux (mPhi0) giving the requested tunneling."""
    lo, hi = DELTA_TABLE_GHZ[-1], DELTA_TABLE_GHZ[0]
    if not lo <= target_ghz <= hi:
        raise ValidationError(
            f"tunneling {target_ghz} GHz outside the mapped range [{lo}, {hi}]")
    # Delta decreases with flux, so flip for interp
    return float(np.interp(np.log(target_ghz), _LOG_DELTA[::-1],
                           DELTA_TABLE_MPHI0[::-1]))


def flux_for_epsilon(target_ghz: float, ip_na: float = 100.0) -> float:
    """Inverse lookup: z-loop flux (mPhi0) giving the requested bias."""
    if ip_na <= 0:
        raise ValidationError("persistent current must be positive")
    return target_ghz / (EPSILON_GHZ_PER_MPHI0_AT_100NA * (ip_na / 100.0))


def schedule_flux_path(schedule, s_grid, h_scale: float = 1.0,
                       ip_na: float = 100.0) -> np.ndarray:
    """Sample the flux-bias path realizing an anneal for one qubit.

    Returns an (n, 2) array of (x, z) loop fluxes in mPhi0 where the
    tunneling follows A(s) and the bias follows B(s) * h_scale. Envelope
    values below the mapped tunneling floor park the x bias at the far end
    of the range; values above the mapped ceiling are unreachable and raise.
    """
    s_grid = np.asarray(s_grid, dtype=float)
    floor = DELTA_TABLE_GHZ[-1]
    ceiling = DELTA_TABLE_GHZ[0]
    out = np.empty((s_grid.size, 2))
    for k, s in enumerate(s_grid):
        a = float(schedule.a(s))
        if a > ceiling:
            raise ValidationError(
                f"schedule requests tunneling {a} GHz above the mapped "
                f"ceiling {ceiling} GHz")
        out[k, 0] = flux_for_delta(max(a, floor))
        out[k, 1] = flux_for_epsilon(float(schedule.b(s)) * h_scale, ip_na)
    return out
