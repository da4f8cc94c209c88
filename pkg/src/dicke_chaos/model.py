"""Fock-Dicke basis enumeration and Hamiltonian assembly for the extended Dicke model.

The model couples N = 2j two-level atoms to a single cavity mode and adds an
atom-atom interaction (kappa/N) Jz^2.  Working in the product basis
|n> (x) |j, m> of Fock states and collective-spin eigenstates of Jz, the matrix
elements are

    <n',m'|H|n,m> = (n omega + m omega0 + kappa m^2 / N) delta(n',n) delta(m',m)
                    + (lambda/sqrt(N)) [sqrt(n) delta(n',n-1) + sqrt(n+1) delta(n',n+1)]
                      x [sqrt(j(j+1) - m(m+1)) delta(m',m+1)
                         + sqrt(j(j+1) - m(m-1)) delta(m',m-1)]

so every off-diagonal coupling changes n by +-1 and m by +-1 simultaneously.
Since j + m + n changes by 0 or +-2, the parity e^{i pi (j + Jz + a^dag a)}
is conserved and the matrix is block diagonal in the even/odd sectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import AllocationTooLarge

#: Largest dense dimension assembled without complaint (D^2 doubles ~ 3.2 GB).
MAX_DENSE_DIM = 20_000


class Parity(Enum):
    EVEN = "even"
    ODD = "odd"


@dataclass(frozen=True)
class ModelParams:
    """Physical and truncation parameters (hbar = 1, energies in units of omega).

    Attributes
    ----------
    omega : float
        Cavity field frequency, > 0.
    omega0 : float
        Atomic energy gap, > 0.
    lambda_ : float
        Atom-field coupling strength, >= 0.
    kappa : float
        Atom-atom interaction strength, >= 0.
    j : float
        Collective spin, j = N/2; positive integer or half-integer.
    n_cutoff : int
        Fock-space truncation: bosonic occupation runs over 0..n_cutoff.
    energy_window : tuple[float, float]
        Analysis window in E/N units for spectral statistics.
    mid_window : tuple[float, float]
        Mid-spectrum window in E/N units for eigenstate statistics.
    """

    omega: float = 1.0
    omega0: float = 1.0
    lambda_: float = 0.0
    kappa: float = 0.0
    j: float = 16.0
    n_cutoff: int = 320
    energy_window: tuple[float, float] = (0.4, 4.0)
    mid_window: tuple[float, float] = (1.75, 2.25)

    def __post_init__(self) -> None:
        if not self.omega > 0:
            raise ValueError(f"omega must be > 0, got {self.omega}")
        if not self.omega0 > 0:
            raise ValueError(f"omega0 must be > 0, got {self.omega0}")
        if self.lambda_ < 0:
            raise ValueError(f"lambda_ must be >= 0, got {self.lambda_}")
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")
        twoj = 2.0 * self.j
        if abs(twoj - round(twoj)) > 1e-9 or round(twoj) < 1:
            raise ValueError(f"j must be a positive integer or half-integer, got {self.j}")
        if int(self.n_cutoff) != self.n_cutoff or self.n_cutoff < 0:
            raise ValueError(f"n_cutoff must be a non-negative integer, got {self.n_cutoff}")
        for name in ("energy_window", "mid_window"):
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise ValueError(f"{name} must satisfy lo < hi, got ({lo}, {hi})")

    @property
    def n_atoms(self) -> int:
        """Number of atoms N = 2j."""
        return int(round(2.0 * self.j))


@dataclass(frozen=True)
class BasisState:
    """One Fock-Dicke product label |n, m> with its parity sector."""

    n: int
    m: float
    parity: Parity


def state_parity(j: float, n: int, m: float) -> Parity:
    """Parity sector of |n, m>: even iff j + m + n is an even integer."""
    # j + m is always an integer (both integers, or both half-integers).
    t = int(round(j + m)) + n
    return Parity.EVEN if t % 2 == 0 else Parity.ODD


def enumerate_basis(params: ModelParams, sector: Parity | None) -> list[BasisState]:
    """Enumerate the Fock-Dicke basis of one parity sector.

    Ordering is deterministic: n ascending, then m ascending.  ``sector=None``
    yields the full unprojected basis in the same ordering.
    """
    twoj = params.n_atoms
    states = []
    for n in range(params.n_cutoff + 1):
        for k in range(twoj + 1):
            m = k - params.j
            p = Parity.EVEN if (k + n) % 2 == 0 else Parity.ODD
            if sector is None or p is sector:
                states.append(BasisState(n=n, m=m, parity=p))
    return states


def hamiltonian_element(params: ModelParams, bra: BasisState, ket: BasisState) -> float:
    """Single matrix element <bra|H|ket> evaluated directly from the selection rule.

    Exactly zero unless bra == ket (in n, m) or |n'-n| = 1 and |m'-m| = 1.
    Kept scalar and independent of the vectorized assembly so the two routes
    can be checked against each other.
    """
    n_atoms = float(params.n_atoms)
    j = params.j
    dn = bra.n - ket.n
    dm = bra.m - ket.m
    if dn == 0 and dm == 0.0:
        return (
            ket.n * params.omega
            + ket.m * params.omega0
            + params.kappa * ket.m * ket.m / n_atoms
        )
    if abs(dn) == 1 and abs(dm) == 1.0:
        boson = math.sqrt(ket.n) if dn == -1 else math.sqrt(ket.n + 1)
        spin = math.sqrt(j * (j + 1) - ket.m * (ket.m + dm))
        return params.lambda_ / math.sqrt(n_atoms) * boson * spin
    return 0.0


@dataclass(frozen=True)
class HamiltonianMatrix:
    """Dense symmetric Hamiltonian block together with its ordered basis."""

    dim: int
    entries: np.ndarray
    basis: list[BasisState]


def build_hamiltonian(
    params: ModelParams,
    sector: Parity | None,
    dim_cap: int = MAX_DENSE_DIM,
) -> HamiltonianMatrix:
    """Assemble the dense symmetric Hamiltonian over one parity sector.

    Iterates the selection rule directly (each state has at most four
    couplings), so assembly is O(D) in work on top of the O(D^2) zero fill.
    Both (i, k) and (k, i) are written from the same float, never symmetrized
    after the fact.

    Raises
    ------
    AllocationTooLarge
        If the sector dimension exceeds ``dim_cap``; reduce n_cutoff or j.
    """
    basis = enumerate_basis(params, sector)
    dim = len(basis)
    if dim > dim_cap:
        raise AllocationTooLarge(
            f"sector dimension {dim} exceeds cap {dim_cap}; reduce n_cutoff or j"
        )
    twoj = params.n_atoms
    n_atoms = float(twoj)
    j = params.j
    nc = params.n_cutoff

    n = np.fromiter((s.n for s in basis), dtype=np.int64, count=dim)
    m = np.fromiter((s.m for s in basis), dtype=np.float64, count=dim)
    k = np.rint(m + j).astype(np.int64)

    # Index lookup (n, k) -> basis position; -1 marks labels outside the sector.
    pos = np.full((nc + 1, twoj + 1), -1, dtype=np.int64)
    pos[n, k] = np.arange(dim)

    h = np.zeros((dim, dim))
    diag = params.omega * n + params.omega0 * m + params.kappa * m * m / n_atoms
    h[np.arange(dim), np.arange(dim)] = diag

    g = params.lambda_ / math.sqrt(n_atoms)
    for dk in (+1, -1):
        tk = k + dk
        ok = (n + 1 <= nc) & (tk >= 0) & (tk <= twoj)
        src = np.nonzero(ok)[0]
        if src.size == 0:
            continue
        dst = pos[n[src] + 1, tk[src]]
        inside = dst >= 0
        src, dst = src[inside], dst[inside]
        mm = m[src]
        val = g * np.sqrt(n[src] + 1.0) * np.sqrt(j * (j + 1) - mm * (mm + dk))
        h[src, dst] = val
        h[dst, src] = val

    return HamiltonianMatrix(dim=dim, entries=h, basis=basis)
