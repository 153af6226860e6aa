"""Covariance and PSD estimators for stationary topological signals.

Nonparametric: sample covariance, correlogram, periodogram and their
subspace-restricted versions. Parametric: MA fits on the self-convolved
coefficients, AR fits on the self-convolved AR coefficients, a Wirtinger-flow
fit of the MA coefficients themselves, closed-form spectral/kernel fits, and
the Gaussian MLE of a first-order AR model.

Polynomial fits work on eigenvalues normalized by ``basis.scale`` (largest
magnitude); ``normalized`` coefficients refer to powers of lam / scale and
``coeffs`` to powers of lam.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import (
    DegenerateSpectrum,
    DimensionMismatch,
    FitWarning,
    NonOrthonormalSubspace,
    ZeroReference,
)
from .signals import KERNEL_MODELS, spectral_psd
from .spectral import Subspace

COV_METHODS = (
    "sample",
    "correlogram",
    "periodogram",
    "ma_spatial",
    "ma_spectral",
    "ar_spatial",
    "ar_spectral",
    "wirtinger",
    "kernel",
    "ar1_mle",
)


@dataclass
class CovarianceEstimate:
    matrix: np.ndarray
    method: str
    params: np.ndarray = None
    psd: np.ndarray = None
    flags: list = field(default_factory=list)
    info: dict = field(default_factory=dict)


def _matrix(S):
    S = np.asarray(S, dtype=float)
    return S.reshape(-1, 1) if S.ndim == 1 else S


def _check(basis, n, what="input"):
    if n != basis.size:
        raise DimensionMismatch(f"{what} has {n} rows but the basis has size {basis.size}")


def _cov_from_psd(U, p):
    C = (U * p) @ U.T
    return (C + C.T) / 2


def sample_covariance(S):
    S = _matrix(S)
    C = S @ S.T / S.shape[1]
    return CovarianceEstimate((C + C.T) / 2, "sample")


def periodogram(basis, S):
    """Average squared TFT coefficient per frequency."""
    S = _matrix(S)
    _check(basis, S.shape[0])
    coeffs = basis.eigenvectors.T @ S
    return np.einsum("ij,ij->i", coeffs, coeffs) / S.shape[1]


def spectral_diagonal(basis, C):
    """diag(U^T C U) without flooring."""
    C = np.asarray(getattr(C, "matrix", C), dtype=float)
    _check(basis, C.shape[0], "covariance")
    U = basis.eigenvectors
    return np.einsum("ij,ij->j", U, C @ U)


def correlogram(basis, C):
    return np.maximum(spectral_diagonal(basis, C), 0.0)


def _resolve_support(basis, support):
    if isinstance(support, (str, Subspace)):
        return basis.indices(support)
    return np.asarray(support, dtype=int)


def psd_to_cov(basis, p, support=None, method="psd"):
    """U diag(p) U^T, or U_S diag(p_S) U_S^T when ``support`` restricts the frequencies.

    With a support, ``p`` may hold either all N values or only the |S| supported ones.
    """
    p = np.asarray(p, dtype=float)
    U = basis.eigenvectors
    if support is None:
        _check(basis, p.shape[0], "PSD")
        return CovarianceEstimate(_cov_from_psd(U, p), method, psd=p)
    idx = _resolve_support(basis, support)
    if p.shape[0] == basis.size:
        p_s = p[idx]
    elif p.shape[0] == idx.size:
        p_s = p
    else:
        raise DimensionMismatch("PSD length matches neither the basis nor the support")
    full = np.zeros(basis.size)
    full[idx] = p_s
    return CovarianceEstimate(_cov_from_psd(U[:, idx], p_s), method, psd=full)


def check_orthonormal(U_s, tol=1e-8):
    U_s = np.asarray(U_s, dtype=float)
    if U_s.ndim != 2:
        raise NonOrthonormalSubspace("subspace basis must be a matrix")
    gram = U_s.T @ U_s
    if np.max(np.abs(gram - np.eye(U_s.shape[1])), initial=0.0) > tol:
        raise NonOrthonormalSubspace("subspace columns are not orthonormal")
    return U_s


def periodogram_subspace(basis, S, support):
    """Periodogram on the supported frequencies only; zero elsewhere."""
    S = _matrix(S)
    _check(basis, S.shape[0])
    idx = _resolve_support(basis, support)
    U_s = check_orthonormal(basis.eigenvectors[:, idx])
    coeffs = U_s.T @ S
    p = np.zeros(basis.size)
    p[idx] = np.einsum("ij,ij->i", coeffs, coeffs) / S.shape[1]
    return p


def vandermonde(mu, first, last):
    """Columns mu**first .. mu**last."""
    return np.column_stack([mu ** r for r in range(first, last + 1)]) if last >= first else np.zeros((mu.size, 0))


def _lstsq(A, b, method, flags):
    coef, _, rank, _ = np.linalg.lstsq(A, b, rcond=None)
    if rank < A.shape[1]:
        flags.append("rank_deficient")
        warnings.warn(f"{method}: Vandermonde system is rank deficient; minimum-norm solution returned", FitWarning, stacklevel=3)
    return coef


def _denormalize(normalized, scale, first_power):
    powers = np.arange(first_power, first_power + len(normalized))
    return np.asarray(normalized) / scale ** powers


def _psd_input(basis, data, domain):
    """Spectral-domain fits take a PSD; spatial-domain fits a covariance matrix."""
    data = np.asarray(getattr(data, "matrix", data), dtype=float)
    if domain == "spatial":
        if data.ndim != 2:
            raise DimensionMismatch("spatial fits need a covariance matrix")
        _check(basis, data.shape[0], "covariance")
    elif domain == "spectral":
        if data.ndim != 1:
            raise DimensionMismatch("spectral fits need a PSD vector")
        _check(basis, data.shape[0], "PSD")
    else:
        raise ValueError(f"domain must be 'spatial' or 'spectral', got {domain!r}")
    return data


def fit_ma_gamma(data, basis, R, domain="spectral"):
    """Least-squares fit of the MA covariance polynomial sum_{r=0}^{2(R-1)} g_r T^r.

    ``spectral`` fits a PSD ``data``; ``spatial`` fits a covariance matrix in
    Frobenius norm, which reduces to the same least-squares problem on
    diag(U^T C U) because the off-diagonal residual does not depend on the
    coefficients.

    Returns ``(gamma, CovarianceEstimate)``.
    """
    if R < 1:
        raise ValueError("MA order must be at least 1")
    data = _psd_input(basis, data, domain)
    target = spectral_diagonal(basis, data) if domain == "spatial" else data
    scale = basis.scale
    Psi = vandermonde(basis.eigenvalues / scale, 0, 2 * (R - 1))
    flags = []
    method = f"ma_{domain}"
    normalized = _lstsq(Psi, target, method, flags)
    p_fit = Psi @ normalized
    if np.any(p_fit < -1e-12 * max(np.max(np.abs(p_fit), initial=0.0), 1.0)):
        flags.append("negative_psd")
    gamma = _denormalize(normalized, scale, 0)
    cov = CovarianceEstimate(
        _cov_from_psd(basis.eigenvectors, p_fit),
        method,
        params=gamma,
        psd=p_fit,
        flags=flags,
        info={"normalized": normalized, "scale": scale},
    )
    return gamma, cov


def fit_ar_eta(data, basis, R, domain="spectral", tol=1e-12):
    """Least-squares fit of eta in C^{-1} = I - sum_{r=1}^{2R} eta_r T^r.

    ``spectral`` minimizes ||p * (1 - Psi eta) - 1||^2 for a PSD ``p``;
    ``spatial`` minimizes ||C (I - sum eta_r T^r) - I||_F^2, which needs the
    whole matrix C (its off-diagonal spectral entries enter through the
    column norms of U^T C U).

    Returns ``(eta, CovarianceEstimate or None)``; the covariance is omitted
    (flag ``singular``) when the fitted inverse PSD has a zero.
    """
    if R < 1:
        raise ValueError("AR order must be at least 1")
    data = _psd_input(basis, data, domain)
    scale = basis.scale
    Psi = vandermonde(basis.eigenvalues / scale, 1, 2 * R)
    flags = []
    method = f"ar_{domain}"
    if domain == "spectral":
        A = data[:, None] * Psi
        b = data - 1.0
    else:
        U = basis.eigenvectors
        Ct = U.T @ data @ U
        q = np.einsum("ij,ij->j", Ct, Ct)
        c = np.diag(Ct)
        w = np.sqrt(q)
        nz = w > 0
        A = np.zeros_like(Psi)
        b = np.zeros_like(q)
        A[nz] = w[nz, None] * Psi[nz]
        b[nz] = (q[nz] - c[nz]) / w[nz]
    normalized = _lstsq(A, b, method, flags)
    eta = _denormalize(normalized, scale, 1)
    inv_psd = 1.0 - Psi @ normalized
    info = {"normalized": normalized, "scale": scale, "inverse_psd": inv_psd}
    if np.any(np.abs(inv_psd) <= tol):
        flags.append("singular")
        warnings.warn(f"{method}: fitted I - sum eta_r T^r is singular; covariance omitted", FitWarning, stacklevel=2)
        return eta, None
    p_fit = 1.0 / inv_psd
    if np.any(p_fit < 0):
        flags.append("not_psd")
    cov = CovarianceEstimate(_cov_from_psd(basis.eigenvectors, p_fit), method, params=eta, psd=p_fit, flags=flags, info=info)
    return eta, cov


@dataclass
class WirtingerResult:
    beta: np.ndarray
    normalized: np.ndarray
    scale: float
    loss: float
    losses: list
    converged: bool
    iterations: int


def fit_ma_beta_wirtinger(p_hat, basis, R, max_iter=5000, step=1.0, tol=1e-10, beta0=None):
    """Fit beta in p = (Psi beta)^2 by gradient descent with backtracking.

    The start is the spectral MA fit: sqrt(max(Psi_g gamma, 0)) projected
    onto the degree-(R-1) Vandermonde, unless ``beta0`` (normalized
    coefficients) is given. The loss never increases across accepted steps.
    """
    p_hat = _psd_input(basis, p_hat, "spectral")
    scale = basis.scale
    Psi = vandermonde(basis.eigenvalues / scale, 0, R - 1)

    def loss_grad(b):
        h = Psi @ b
        resid = p_hat - h * h
        return float(resid @ resid), -4.0 * Psi.T @ (resid * h)

    if beta0 is None:
        # the spectral MA fit, inlined so a rank-deficient start stays silent
        # without touching the process-wide warning filters
        Psi_g = vandermonde(basis.eigenvalues / scale, 0, 2 * (R - 1))
        gamma, *_ = np.linalg.lstsq(Psi_g, p_hat, rcond=None)
        amp = np.sqrt(np.maximum(Psi_g @ gamma, 0.0))
        b, *_ = np.linalg.lstsq(Psi, amp, rcond=None)
    else:
        b = np.asarray(beta0, dtype=float).copy()

    f, g = loss_grad(b)
    losses = [f]
    t = step
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        gnorm2 = float(g @ g)
        if np.sqrt(gnorm2) <= tol:
            converged = True
            break
        while True:
            cand = b - t * g
            f_new, g_new = loss_grad(cand)
            if f_new <= f - 1e-4 * t * gnorm2:
                break
            t *= 0.5
            if t < 1e-30:
                break
        if t < 1e-30:
            break
        b, f, g = cand, f_new, g_new
        losses.append(f)
        t *= 2.0
    else:
        converged = float(np.linalg.norm(g)) <= tol
    return WirtingerResult(
        beta=_denormalize(b, scale, 0),
        normalized=b,
        scale=scale,
        loss=f,
        losses=losses,
        converged=converged,
        iterations=it,
    )


# parameter box searched by fit_spectral_params
PARAM_BOXES = {
    "exponential": [(-5.0, 5.0)],
    "sigmoid": [(-10.0, 10.0), (-10.0, 10.0)],
    "gaussian": [(0.0, 20.0)],
    "laplacian": [(0.0, 20.0), (0.0, 10.0)],
}


@dataclass
class SpectralFit:
    model: str
    params: np.ndarray
    residual: float
    psd: np.ndarray


def fit_spectral_params(p_hat, basis, model, grid_points=41, refine=True):
    """Fit a closed-form response or kernel to a PSD estimate.

    Responses are compared through their square, kernels directly. A grid
    over the parameter box seeds a bounded quasi-Newton refinement.
    """
    if model not in PARAM_BOXES:
        raise ValueError(f"model must be one of {tuple(PARAM_BOXES)}")
    p_hat = _psd_input(basis, p_hat, "spectral")
    lam = basis.eigenvalues
    box = PARAM_BOXES[model]

    def residual(theta):
        with np.errstate(all="ignore"):
            r = p_hat - spectral_psd(model, theta, lam)
            val = float(r @ r)
        return val if np.isfinite(val) else np.inf

    axes = [np.linspace(lo, hi, grid_points) for lo, hi in box]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(box))
    values = np.array([residual(th) for th in grid])
    best = grid[int(np.argmin(values))]
    best_val = float(values.min())
    if refine and np.isfinite(best_val):
        res = optimize.minimize(
            residual, best, method="L-BFGS-B", bounds=box,
            options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 500},
        )
        if np.isfinite(res.fun) and res.fun <= best_val:
            best, best_val = np.asarray(res.x, dtype=float), float(res.fun)
    with np.errstate(all="ignore"):
        psd = spectral_psd(model, best, lam)
    return SpectralFit(model, best, best_val, psd)


def kernel_covariance(p_hat, basis, model="gaussian"):
    if model not in KERNEL_MODELS:
        raise ValueError(f"kernel model must be one of {KERNEL_MODELS}")
    fit = fit_spectral_params(p_hat, basis, model)
    return CovarianceEstimate(_cov_from_psd(basis.eigenvectors, fit.psd), "kernel", params=fit.params, psd=fit.psd,
                              info={"model": model, "residual": fit.residual})


def ar1_neg_loglik(alpha, c_diag, lam):
    """-2 sum log|1 - alpha lam| + sum c_i (1 - alpha lam)^2, with c = diag(U^T C U)."""
    x = 1.0 - alpha * lam
    with np.errstate(divide="ignore"):
        return float(-2.0 * np.sum(np.log(np.abs(x))) + np.sum(c_diag * x * x))


def _golden(f, a, b, tol=1e-12, max_iter=200):
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def fit_ar1_gaussian_mle(C_hat, basis, n_grid=100):
    """Gaussian MLE of alpha for C = (I - alpha T)^-2 over 0 <= alpha < 1/lam_max.

    A grid scan brackets the minimum, golden-section search polishes it, and
    the result is never worse than any grid point.
    """
    lam = basis.eigenvalues
    lam_max = float(np.max(lam, initial=0.0))
    if lam_max <= 0:
        raise DegenerateSpectrum("AR(1) MLE needs a positive largest eigenvalue")
    c = spectral_diagonal(basis, C_hat)
    hi = (1.0 - 1e-6) / lam_max
    grid = np.linspace(0.0, hi, n_grid)
    values = np.array([ar1_neg_loglik(a, c, lam) for a in grid])
    i = int(np.argmin(values))
    lo_b, hi_b = grid[max(i - 1, 0)], grid[min(i + 1, n_grid - 1)]
    alpha, val = _golden(lambda a: ar1_neg_loglik(a, c, lam), lo_b, hi_b)
    for a, v in ((grid[i], values[i]), (lo_b, ar1_neg_loglik(lo_b, c, lam)), (hi_b, ar1_neg_loglik(hi_b, c, lam))):
        if v <= val:
            alpha, val = a, v
    return float(alpha)


def ar1_covariance(alpha, basis):
    p = (1.0 - alpha * basis.eigenvalues) ** -2.0
    return CovarianceEstimate(_cov_from_psd(basis.eigenvectors, p), "ar1_mle", params=np.array([alpha]), psd=p)


def rel_error(X_hat, X):
    """||X_hat - X||_F^2 / ||X||_F^2."""
    X_hat = np.asarray(getattr(X_hat, "matrix", X_hat), dtype=float)
    X = np.asarray(getattr(X, "matrix", X), dtype=float)
    ref = float(np.sum(X * X))
    if ref == 0.0:
        raise ZeroReference("relative error against a zero reference")
    diff = X_hat - X
    return float(np.sum(diff * diff)) / ref


def estimate_covariance(method, S, basis, order=1, kernel_model="gaussian"):
    """Dispatch a covariance estimator by its method tag."""
    if method == "sample":
        return sample_covariance(S)
    if method == "correlogram":
        return psd_to_cov(basis, correlogram(basis, sample_covariance(S)), method="correlogram")
    if method == "periodogram":
        return psd_to_cov(basis, periodogram(basis, S), method="periodogram")
    if method == "ma_spatial":
        return fit_ma_gamma(sample_covariance(S), basis, order, "spatial")[1]
    if method == "ma_spectral":
        return fit_ma_gamma(periodogram(basis, S), basis, order, "spectral")[1]
    if method in ("ar_spatial", "ar_spectral"):
        domain = method.split("_")[1]
        data = sample_covariance(S) if domain == "spatial" else periodogram(basis, S)
        eta, cov = fit_ar_eta(data, basis, order, domain)
        if cov is None:
            return CovarianceEstimate(np.full((basis.size, basis.size), np.nan), method, params=eta, flags=["singular"])
        return cov
    if method == "wirtinger":
        res = fit_ma_beta_wirtinger(periodogram(basis, S), basis, order)
        h = vandermonde(basis.eigenvalues / res.scale, 0, order - 1) @ res.normalized
        cov = psd_to_cov(basis, h * h, method="wirtinger")
        cov.params = res.beta
        if not res.converged:
            cov.flags.append("not_converged")
        return cov
    if method == "kernel":
        return kernel_covariance(periodogram(basis, S), basis, kernel_model)
    if method == "ar1_mle":
        return ar1_covariance(fit_ar1_gaussian_mle(sample_covariance(S), basis), basis)
    raise ValueError(f"unknown covariance method {method!r}; choose from {COV_METHODS}")
