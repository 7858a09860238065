"""Ising problem instances and their computational-basis operators.

Basis convention: basis state index k encodes qubit 0 in the most
significant bit; sigma_z eigenvalue is +1 when the bit is 0 (spin up).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError

MAX_QUBITS = 8
MAX_QUBITS_OPEN = 6


@dataclass(frozen=True)
class IsingProblem:
    """Fields h_i and couplings J_ij entering B(s)/2 * (sum h sz + sum J sz sz)."""

    n: int
    h: np.ndarray
    couplings: dict = field(default_factory=dict)  # {(i, j) with i < j: J_ij}
    name: str = ""

    def __post_init__(self):
        if not 1 <= self.n <= MAX_QUBITS:
            raise ValidationError(f"problem size must be 1..{MAX_QUBITS}")
        h = np.asarray(self.h, dtype=float)
        if h.shape != (self.n,):
            raise ValidationError(f"h must have shape ({self.n},)")
        if not np.all(np.isfinite(h)):
            raise ValidationError("h must be finite")
        couplings = {}
        for key, val in self.couplings.items():
            i, j = int(key[0]), int(key[1])
            if not (0 <= i < j < self.n):
                raise ValidationError(f"coupling ({i},{j}) out of range or not i<j")
            if not np.isfinite(val):
                raise ValidationError("couplings must be finite")
            couplings[(i, j)] = float(val)
        h.setflags(write=False)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "couplings", couplings)

    @property
    def dim(self) -> int:
        return 2 ** self.n


def _sigma_z_bits(n: int) -> np.ndarray:
    """(n, 2^n) array: sigma_z eigenvalue of qubit i in basis state k."""
    k = np.arange(2 ** n)
    bits = (k[None, :] >> (n - 1 - np.arange(n)[:, None])) & 1
    return 1.0 - 2.0 * bits


def problem_hz_diag(problem: IsingProblem) -> np.ndarray:
    """Diagonal of sum_i h_i sz_i + sum_ij J_ij sz_i sz_j."""
    sz = _sigma_z_bits(problem.n)
    diag = problem.h @ sz
    for (i, j), val in problem.couplings.items():
        diag = diag + val * sz[i] * sz[j]
    return diag


def sum_sigma_x(n: int) -> np.ndarray:
    """Dense sum_i sigma_x_i: adjacency matrix of single bit flips."""
    dim = 2 ** n
    mat = np.zeros((dim, dim))
    k = np.arange(dim)
    for i in range(n):
        flipped = k ^ (1 << (n - 1 - i))
        mat[k, flipped] = 1.0
    return mat


def classical_energy(problem: IsingProblem, state: int) -> float:
    """Energy of one computational basis state under the problem fields alone."""
    if not 0 <= state < problem.dim:
        raise ValidationError("basis state index out of range")
    return float(problem_hz_diag(problem)[state])


def ground_states(problem: IsingProblem, tol: float = 1e-9
                  ) -> tuple[float, list[int]]:
    """Exhaustive enumeration of the classical ground space."""
    diag = problem_hz_diag(problem)
    e0 = float(diag.min())
    scale = max(1.0, float(np.abs(diag).max()))
    idx = np.nonzero(diag <= e0 + tol * scale)[0]
    return e0, [int(i) for i in idx]


# ---------------------------------------------------------------------------
# named instances
# ---------------------------------------------------------------------------

def single_spin(h: float = 1.0) -> IsingProblem:
    """One spin in a longitudinal field; the minimal crossing testbed."""
    return IsingProblem(n=1, h=np.array([h]), name="single_spin")


def k3_afm(j: float = 1.0) -> IsingProblem:
    """Antiferromagnetic triangle: frustrated, 6-fold degenerate ground space."""
    if j <= 0:
        raise ValidationError("antiferromagnetic coupling must be positive")
    return IsingProblem(n=3, h=np.zeros(3),
                        couplings={(0, 1): j, (0, 2): j, (1, 2): j},
                        name="k3_afm")


def k3_afm_split(j: float = 1.0, h0: float = 0.05) -> IsingProblem:
    """Triangle with a weak field on one spin; narrows the minimum gap."""
    h = np.zeros(3)
    h[0] = h0
    return IsingProblem(n=3, h=h, couplings={(0, 1): j, (0, 2): j, (1, 2): j},
                        name="k3_afm_split")


def afm_chain(n: int, j: float = 1.0) -> IsingProblem:
    """Open antiferromagnetic chain; 2-fold degenerate Neel ground space."""
    if n < 2:
        raise ValidationError("chain needs at least 2 spins")
    couplings = {(i, i + 1): j for i in range(n - 1)}
    return IsingProblem(n=n, h=np.zeros(n), couplings=couplings,
                        name=f"afm_chain_{n}")


_NAMED = {
    "single_spin": single_spin,
    "k3_afm": k3_afm,
    "k3_afm_split": k3_afm_split,
}


def named_problem(name: str, **kwargs) -> IsingProblem:
    if name.startswith("afm_chain_"):
        return afm_chain(int(name.rsplit("_", 1)[1]), **kwargs)
    if name not in _NAMED:
        raise ValidationError(
            f"unknown problem {name!r}; known: {sorted(_NAMED)} + afm_chain_<n>")
    return _NAMED[name](**kwargs)
