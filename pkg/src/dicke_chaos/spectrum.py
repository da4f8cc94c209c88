"""Dense diagonalization, energy-window filtering and Fock-cutoff convergence."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ConvergenceFailure, EmptyWindow, MissingVectors
from .model import BasisState, HamiltonianMatrix, ModelParams

#: Number of top Fock layers inspected by the truncation diagnostic.
DEFAULT_TAIL_WIDTH = 20
#: A state is converged when its probability weight in the tail stays below this.
DEFAULT_TAIL_TOL = 1e-6


@dataclass
class EigenDecomposition:
    """Full spectrum of one Hamiltonian block, eigenvalues ascending.

    ``vectors`` (when requested) holds orthonormal eigenvectors as columns in
    basis order, with the phase of each column fixed so that its
    largest-magnitude component is positive (ties broken by lowest basis
    index).  Exact eigenvalue ties keep the solver's original order.
    """

    energies: np.ndarray
    vectors: np.ndarray | None
    basis: list[BasisState]


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    lead = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[lead, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def diagonalize(h: HamiltonianMatrix, want_vectors: bool = False) -> EigenDecomposition:
    """Full eigendecomposition of a dense symmetric Hamiltonian block.

    Uses LAPACK via scipy: relatively-robust-representation for values only,
    divide-and-conquer when vectors are needed.

    Raises
    ------
    ConvergenceFailure
        If the LAPACK routine does not converge (not expected for this model).
    """
    try:
        if want_vectors:
            w, v = scipy.linalg.eigh(h.entries, driver="evd")
        else:
            w = scipy.linalg.eigh(h.entries, eigvals_only=True, driver="evr")
            v = None
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"dense eigensolver failed: {exc}") from exc
    order = np.argsort(w, kind="stable")
    w = w[order]
    if v is not None:
        v = _fix_phases(v[:, order])
    return EigenDecomposition(energies=w, vectors=v, basis=h.basis)


@dataclass
class SpectralDataset:
    """Eigenpairs restricted to the analysis energy window.

    ``coefficients[nu, k]`` is the component of retained eigenstate k on basis
    state nu (ordering from the originating Hamiltonian block, carried along in
    ``basis``).  ``converged`` is filled in by :func:`check_convergence`.
    """

    params: ModelParams
    energies: np.ndarray
    coefficients: np.ndarray | None
    window_indices: np.ndarray
    basis: list[BasisState]
    converged: np.ndarray | None = field(default=None)


def filter_energy_window(eig: EigenDecomposition, params: ModelParams) -> SpectralDataset:
    """Retain the states with E/N inside the closed analysis window.

    Raises
    ------
    EmptyWindow
        If no eigenvalue falls inside; the window or the cutoff is mis-set.
    """
    lo, hi = params.energy_window
    scaled = eig.energies / params.n_atoms
    sel = (scaled >= lo) & (scaled <= hi)
    if not sel.any():
        raise EmptyWindow(
            f"no eigenvalue with E/N in [{lo}, {hi}] "
            f"(spectrum spans [{scaled.min():.4g}, {scaled.max():.4g}])"
        )
    idx = np.nonzero(sel)[0]
    coeff = eig.vectors[:, idx] if eig.vectors is not None else None
    return SpectralDataset(
        params=params,
        energies=eig.energies[idx],
        coefficients=coeff,
        window_indices=idx,
        basis=eig.basis,
    )


def tail_weights(ds: SpectralDataset, tail_width: int = DEFAULT_TAIL_WIDTH) -> np.ndarray:
    """Per-retained-state probability weight on the top ``tail_width`` Fock layers."""
    if ds.coefficients is None:
        raise MissingVectors("dataset carries no eigenvector coefficients")
    ns = np.fromiter((s.n for s in ds.basis), dtype=np.int64, count=len(ds.basis))
    mask = ns >= ds.params.n_cutoff - tail_width
    return np.sum(ds.coefficients[mask] ** 2, axis=0)


def check_convergence(
    ds: SpectralDataset,
    tail_width: int = DEFAULT_TAIL_WIDTH,
    tol: float = DEFAULT_TAIL_TOL,
) -> tuple[np.ndarray, float]:
    """Flag each retained state as converged against the Fock truncation.

    A state passes when its weight on the top ``tail_width`` Fock layers is
    below ``tol``.  Stores the flags on the dataset and returns them together
    with the converged fraction.
    """
    weights = tail_weights(ds, tail_width)
    flags = weights < tol
    ds.converged = flags
    return flags, float(flags.mean())
