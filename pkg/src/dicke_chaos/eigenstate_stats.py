"""Eigenstate-coefficient statistics: P(c), its GOE Gaussian reference and D_KL.

Eigenstates of a chaotic real symmetric Hamiltonian behave like GOE
eigenvectors, whose components in any fixed basis are asymptotically Gaussian
with zero mean and variance 1/D.  The Kullback-Leibler divergence between the
pooled empirical coefficient distribution of mid-spectrum states and that
Gaussian quantifies the distance from full chaos.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .errors import DegenerateRange, EmptySample, EmptyWindow, MissingVectors
from .spectrum import SpectralDataset

DEFAULT_BINS = 201


@dataclass(frozen=True)
class Histogram:
    """Equal-width histogram with per-bin normalized density and raw counts."""

    edges: np.ndarray
    densities: np.ndarray
    counts: np.ndarray


def build_histogram(values, bins: int, value_range: tuple[float, float] | None = None) -> Histogram:
    """Histogram with densities normalized so that sum(density * width) = 1.

    An empty sample needs an explicit range and yields all-zero densities.
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0 and value_range is None:
        raise EmptySample("cannot infer a histogram range from an empty sample")
    counts, edges = np.histogram(v, bins=bins, range=value_range)
    total = counts.sum()
    widths = np.diff(edges)
    if total > 0:
        densities = counts / (total * widths)
    else:
        densities = np.zeros_like(widths)
    return Histogram(edges=edges, densities=densities, counts=counts)


@dataclass(frozen=True)
class CoefficientSample:
    """Pooled eigenstate components over all retained states and basis indices."""

    values: np.ndarray
    dim: int
    n_states: int
    c_min: float
    c_max: float


def collect_coefficients(
    ds: SpectralDataset,
    window: tuple[float, float] | None = None,
) -> CoefficientSample:
    """Pool all components of the eigenstates inside the mid-spectrum window.

    ``window`` is in E/N units and defaults to the dataset's mid_window.  Every
    selected state contributes its full component column (phases already fixed
    upstream), so each state adds exactly dim values.

    Raises
    ------
    MissingVectors
        If the dataset carries no eigenvector coefficients.
    EmptyWindow
        If no retained state falls inside the window.
    """
    if ds.coefficients is None:
        raise MissingVectors("dataset carries no eigenvector coefficients")
    lo, hi = window if window is not None else ds.params.mid_window
    scaled = ds.energies / ds.params.n_atoms
    sel = (scaled >= lo) & (scaled <= hi)
    if not sel.any():
        raise EmptyWindow(f"no retained state with E/N in [{lo}, {hi}]")
    cols = ds.coefficients[:, sel]
    values = np.ascontiguousarray(cols.T).ravel()
    return CoefficientSample(
        values=values,
        dim=int(ds.coefficients.shape[0]),
        n_states=int(sel.sum()),
        c_min=float(values.min()),
        c_max=float(values.max()),
    )


def goe_coefficient_pdf(c, dim: int):
    """GOE reference density sqrt(D / 2 pi) exp(-D c^2 / 2) for components."""
    c = np.asarray(c, dtype=float)
    return np.sqrt(dim / (2.0 * np.pi)) * np.exp(-dim * c * c / 2.0)


def _log_gaussian_bin_masses(edges: np.ndarray, dim: int) -> np.ndarray:
    """ln of the GOE-Gaussian probability mass per bin, stable in far tails.

    Direct CDF differences underflow once |c| sqrt(D) exceeds ~38, so bins that
    lie entirely in one tail are evaluated through logsf/logcdf instead.
    """
    z = edges * np.sqrt(float(dim))
    z_lo, z_hi = z[:-1], z[1:]
    out = np.empty(z_lo.size)

    upper = z_lo >= 0.0
    lower = z_hi <= 0.0
    middle = ~(upper | lower)

    with np.errstate(divide="ignore"):
        if upper.any():
            la = norm.logsf(z_lo[upper])
            lb = norm.logsf(z_hi[upper])
            out[upper] = la + np.log1p(-np.exp(lb - la))
        if lower.any():
            la = norm.logcdf(z_lo[lower])
            lb = norm.logcdf(z_hi[lower])
            out[lower] = lb + np.log1p(-np.exp(la - lb))
        if middle.any():
            out[middle] = np.log(norm.cdf(z_hi[middle]) - norm.cdf(z_lo[middle]))
    return out


def kl_divergence(sample: CoefficientSample, bins: int = DEFAULT_BINS) -> float:
    """Kullback-Leibler divergence of the coefficient distribution from GOE.

    The sample is histogrammed into equal-width bins over [c_min, c_max]; the
    reference mass per bin is integrated exactly from the Gaussian CDF.  With
    p_i the empirical and q_i the reference bin mass,

        D_KL = sum over occupied bins of p_i ln(p_i / q_i)

    and empty bins contribute zero (the p ln p -> 0 limit).  Non-negative, and
    zero only when the distributions coincide.

    Raises
    ------
    EmptySample
        If the sample has no values.
    DegenerateRange
        If c_max - c_min is below 1e-12.
    """
    if bins < 10:
        raise ValueError(f"bins must be >= 10, got {bins}")
    if sample.values.size == 0:
        raise EmptySample("coefficient sample is empty")
    if sample.c_max - sample.c_min < 1e-12:
        raise DegenerateRange("coefficient range collapsed to a point")
    counts, edges = np.histogram(
        sample.values, bins=bins, range=(sample.c_min, sample.c_max)
    )
    p = counts / counts.sum()
    log_q = _log_gaussian_bin_masses(edges, sample.dim)
    occupied = p > 0
    return float(np.sum(p[occupied] * (np.log(p[occupied]) - log_q[occupied])))
