"""Anneal envelope schedules A(s), B(s) with piecewise-linear interpolation.

H(s) = -A(s)/2 * sum sigma_x + B(s)/2 * (sum h sz + sum J sz sz), s in [0,1].
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError


@dataclass(frozen=True)
class AnnealSchedule:
    """Knot-sampled envelopes in GHz; evaluation interpolates linearly."""

    s_knots: np.ndarray
    a_ghz: np.ndarray
    b_ghz: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        s = np.asarray(self.s_knots, dtype=float)
        a = np.asarray(self.a_ghz, dtype=float)
        b = np.asarray(self.b_ghz, dtype=float)
        if s.ndim != 1 or s.size < 2 or a.shape != s.shape or b.shape != s.shape:
            raise ValidationError("schedule needs matching 1D knot arrays (>= 2 knots)")
        if abs(s[0]) > 1e-12 or abs(s[-1] - 1.0) > 1e-12:
            raise ValidationError("schedule knots must span s = 0 to s = 1")
        if np.any(np.diff(s) <= 0):
            raise ValidationError("schedule knots must be strictly increasing")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValidationError("envelope values must be finite")
        # standard anneals start driver-dominated and end problem-dominated;
        # deliberately engineered envelopes (level-crossing tests) may not,
        # so this is advisory rather than an error
        if not (a[0] > abs(b[0]) and abs(b[-1]) > a[-1]):
            warnings.warn("schedule does not follow the usual anneal convention "
                          "(driver dominant at s=0, problem dominant at s=1)",
                          stacklevel=2)
        for arr in (s, a, b):
            arr.setflags(write=False)
        object.__setattr__(self, "s_knots", s)
        object.__setattr__(self, "a_ghz", a)
        object.__setattr__(self, "b_ghz", b)

    def a(self, s) -> np.ndarray | float:
        self._check_s(s)
        return np.interp(s, self.s_knots, self.a_ghz)

    def b(self, s) -> np.ndarray | float:
        self._check_s(s)
        return np.interp(s, self.s_knots, self.b_ghz)

    @staticmethod
    def _check_s(s):
        s = np.asarray(s)
        if np.any(s < -1e-9) or np.any(s > 1.0 + 1e-9):
            raise ValidationError("s must lie in [0, 1]")

    def to_dict(self) -> dict:
        return {"name": self.name, "s": self.s_knots.tolist(),
                "a_ghz": self.a_ghz.tolist(), "b_ghz": self.b_ghz.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "AnnealSchedule":
        return cls(s_knots=np.asarray(d["s"], dtype=float),
                   a_ghz=np.asarray(d["a_ghz"], dtype=float),
                   b_ghz=np.asarray(d["b_ghz"], dtype=float),
                   name=str(d.get("name", "custom")))


def linear_schedule(peak_ghz: float = 5.0, n_knots: int = 2) -> AnnealSchedule:
    """Default anneal: A = peak * (1 - s), B = peak * s."""
    if peak_ghz <= 0:
        raise ValidationError("peak envelope must be positive")
    s = np.linspace(0.0, 1.0, n_knots)
    return AnnealSchedule(s_knots=s, a_ghz=peak_ghz * (1.0 - s),
                          b_ghz=peak_ghz * s, name="linear")


def lz_crossing_schedule(gap_ghz: float = 0.1, sweep_ghz: float = 2.0
                         ) -> AnnealSchedule:
    """Engineered linear level crossing: constant driver A = gap_ghz and
    B sweeping -sweep to +sweep; with a single unit-field spin this gives an
    avoided crossing of gap A at s = 1/2 with a known diabatic transition
    probability."""
    if gap_ghz <= 0 or sweep_ghz <= 0:
        raise ValidationError("gap and sweep must be positive")
    if sweep_ghz < 5.0 * gap_ghz:
        warnings.warn("sweep is not large compared to the gap; the two-level "
                      "crossing formula will be inaccurate", stacklevel=2)
    s = np.array([0.0, 1.0])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # intentionally non-standard envelopes
        return AnnealSchedule(s_knots=s, a_ghz=np.array([gap_ghz, gap_ghz]),
                              b_ghz=np.array([-sweep_ghz, sweep_ghz]),
                              name="lz_crossing")
