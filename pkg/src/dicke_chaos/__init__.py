"""Exact diagonalization and spectral chaos diagnostics for the extended Dicke model."""

from .cache import SpectrumCache
from .eigenstate_stats import (
    CoefficientSample,
    Histogram,
    build_histogram,
    collect_coefficients,
    goe_coefficient_pdf,
    kl_divergence,
)
from .model import (
    BasisState,
    HamiltonianMatrix,
    ModelParams,
    Parity,
    build_hamiltonian,
    enumerate_basis,
    hamiltonian_element,
    state_parity,
)
from .spectral_stats import (
    S0,
    BoundaryPoint,
    ChaosIndicators,
    UnfoldedSpectrum,
    brody_pdf,
    brody_scale,
    chaos_boundary,
    eta_indicator,
    fit_brody,
    goe_ratio_pdf,
    mean_ratio,
    poisson_pdf,
    poisson_ratio_pdf,
    spacing_ratios,
    split_degenerate,
    unfold,
    wigner_dyson_pdf,
)
from .spectrum import (
    EigenDecomposition,
    SpectralDataset,
    check_convergence,
    diagonalize,
    filter_energy_window,
)
from .sweep import (
    SweepConfig,
    SweepResultRow,
    Thresholds,
    boundary_from_rows,
    compute_point,
    read_csv,
    run_sweep,
    write_csv,
    write_histogram,
    write_histograms,
)

__all__ = [
    "BasisState",
    "BoundaryPoint",
    "ChaosIndicators",
    "CoefficientSample",
    "EigenDecomposition",
    "HamiltonianMatrix",
    "Histogram",
    "ModelParams",
    "Parity",
    "S0",
    "SpectralDataset",
    "SpectrumCache",
    "SweepConfig",
    "SweepResultRow",
    "Thresholds",
    "UnfoldedSpectrum",
    "boundary_from_rows",
    "brody_pdf",
    "brody_scale",
    "build_hamiltonian",
    "build_histogram",
    "chaos_boundary",
    "check_convergence",
    "collect_coefficients",
    "compute_point",
    "diagonalize",
    "enumerate_basis",
    "eta_indicator",
    "filter_energy_window",
    "fit_brody",
    "goe_coefficient_pdf",
    "goe_ratio_pdf",
    "hamiltonian_element",
    "kl_divergence",
    "mean_ratio",
    "poisson_pdf",
    "poisson_ratio_pdf",
    "read_csv",
    "run_sweep",
    "spacing_ratios",
    "split_degenerate",
    "state_parity",
    "unfold",
    "wigner_dyson_pdf",
    "write_csv",
    "write_histogram",
    "write_histograms",
]

__version__ = "0.1.0"
