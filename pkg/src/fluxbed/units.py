"""Unit conventions used throughout the package.

Fixed repo-wide: loop flux in units of the flux quantum Phi0, control-line
current in mA, persistent current in nA, frequency in GHz, time in ns
internally (microseconds accepted at user-facing interfaces).
"""

PHI0_WB = 2.067833848e-15
"""Magnetic flux quantum in weber."""

PLANCK_JS = 6.62607015e-34
"""Planck constant in J*s (used to express flux-bias energies in GHz)."""

NS_PER_US = 1e3
US_PER_NS = 1e-3


def us_to_ns(t_us: float) -> float:
    return t_us * NS_PER_US


def ns_to_us(t_ns: float) -> float:
    return t_ns * US_PER_NS


def flux_wb(i_p_na: float, mutual_ph: float) -> float:
    """Flux in weber threaded by a persistent current through a mutual inductance."""
    return i_p_na * 1e-9 * mutual_ph * 1e-12


def wb_to_mphi0(flux: float) -> float:
    return flux / PHI0_WB * 1e3
