"""Steady states, stability, Gaussian entanglement, mechanical squeezing
and noise spectra of a parametrically driven optomechanical cavity.

The workflow is: describe a working point (:class:`SystemParams` or
:class:`EffectiveParams`), solve its steady-state branches
(:func:`classify_and_solve`), then evaluate covariances and the derived
measures on a chosen branch.  The :mod:`dcesim.sweep` module batches
this over parameter grids and the ``dcesim`` command line exposes it as
subcommands.
"""

from ._kernels import get_backend, set_backend
from .errors import (
    DceSimError,
    NumericalError,
    TailTruncationWarning,
    ValidationError,
)
from .linear_dynamics import (
    CovarianceState,
    build_drift,
    drift_eigenvalues,
    is_stable,
    noise_matrix,
    solve_lyapunov,
    stability_margin,
    steady_covariance,
    symplectic_eigenvalues,
)
from .measures import (
    SQL,
    NegativityResult,
    QuadratureScan,
    WignerGrid,
    below_sql,
    log_negativity,
    quadrature_variance,
    scan_quadratures,
    wigner_grid,
    wigner_lab_view,
)
from .model import (
    EffectiveParams,
    SqueezedFrame,
    SystemParams,
    effective_params,
    squeeze_frame,
    validate,
    validate_effective,
    with_drive,
)
from .spectra import (
    SpectrumScan,
    frequency_grid,
    integrate_variance,
    integrated_mech_block,
    mechanical_variance_spectral,
    quadrature_spectrum,
    spectral_covariance,
    transfer_matrix,
)
from .steady_state import (
    BranchPoint,
    bistable_window,
    classify_and_solve,
    cubic_coefficients,
    mean_field_rhs,
    mean_fields,
    population_cubic_roots,
    relax_mean_field,
    relax_mean_field_batch,
    select_branch,
)
from .sweep import (
    FIGURE_TAGS,
    OBSERVABLES,
    SweepAxis,
    SweepResult,
    SweepSpec,
    figure_base,
    reproduce_figure,
    run_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "FIGURE_TAGS",
    "OBSERVABLES",
    "SQL",
    "BranchPoint",
    "CovarianceState",
    "DceSimError",
    "EffectiveParams",
    "NegativityResult",
    "NumericalError",
    "QuadratureScan",
    "SpectrumScan",
    "SqueezedFrame",
    "SweepAxis",
    "SweepResult",
    "SweepSpec",
    "SystemParams",
    "TailTruncationWarning",
    "ValidationError",
    "WignerGrid",
    "below_sql",
    "bistable_window",
    "build_drift",
    "classify_and_solve",
    "cubic_coefficients",
    "drift_eigenvalues",
    "effective_params",
    "figure_base",
    "frequency_grid",
    "get_backend",
    "integrate_variance",
    "integrated_mech_block",
    "is_stable",
    "log_negativity",
    "mean_field_rhs",
    "mean_fields",
    "mechanical_variance_spectral",
    "noise_matrix",
    "population_cubic_roots",
    "quadrature_spectrum",
    "quadrature_variance",
    "relax_mean_field",
    "relax_mean_field_batch",
    "reproduce_figure",
    "run_sweep",
    "scan_quadratures",
    "select_branch",
    "set_backend",
    "solve_lyapunov",
    "spectral_covariance",
    "squeeze_frame",
    "stability_margin",
    "steady_covariance",
    "symplectic_eigenvalues",
    "transfer_matrix",
    "validate",
    "validate_effective",
    "wigner_grid",
    "wigner_lab_view",
    "with_drive",
]
