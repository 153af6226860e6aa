"""Stationary random signals on simplicial complexes."""

from .complex import (
    SimplicialComplex,
    build_incidence,
    parse_scf,
    random_complex,
    read_scf,
    validate,
    write_scf,
)
from .estimation import (
    CovarianceEstimate,
    correlogram,
    estimate_covariance,
    fit_ar1_gaussian_mle,
    fit_ar_eta,
    fit_ma_beta_wirtinger,
    fit_ma_gamma,
    fit_spectral_params,
    periodogram,
    periodogram_subspace,
    psd_to_cov,
    rel_error,
    sample_covariance,
)
from .recovery import (
    FromCovariance,
    Mixed,
    SelectionMask,
    Sem,
    Smoothness,
    interpolate_map,
    interpolate_regularized,
    interpolate_subspace,
    wiener_denoise,
)
from .signals import (
    AutoRegressive,
    Polynomial,
    SignalEnsemble,
    SpectralResponse,
    apply_filter,
    generate,
    true_cov_psd,
    white_noise,
)
from .spectral import (
    SpectralBasis,
    Subspace,
    TopologicalOperator,
    detect_subspace,
    dirac,
    eigendecompose,
    hodge_laplacian,
    hodge_project,
    itft,
    subspace_energies,
    tft,
)

__version__ = "0.1.0"
