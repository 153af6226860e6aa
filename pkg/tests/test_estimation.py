import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from topostat import (
    AutoRegressive,
    Polynomial,
    Subspace,
    correlogram,
    dirac,
    eigendecompose,
    estimate_covariance,
    fit_ar1_gaussian_mle,
    fit_ar_eta,
    fit_ma_beta_wirtinger,
    fit_ma_gamma,
    fit_spectral_params,
    generate,
    hodge_laplacian,
    periodogram,
    periodogram_subspace,
    psd_to_cov,
    random_complex,
    rel_error,
    sample_covariance,
    true_cov_psd,
    white_noise,
)
from topostat.errors import DegenerateSpectrum, DimensionMismatch, FitWarning, NonOrthonormalSubspace, ZeroReference
from topostat.estimation import COV_METHODS, ar1_neg_loglik, check_orthonormal, spectral_diagonal
from topostat.spectral import TopologicalOperator


def diag_basis(lam):
    return eigendecompose(TopologicalOperator.from_matrix(np.diag(np.asarray(lam, dtype=float))))


@pytest.fixture(scope="module")
def dbasis(small_complex):
    return eigendecompose(dirac(small_complex))


def vec_ls(C, T, powers, target):
    A = np.column_stack([(C @ np.linalg.matrix_power(T, r)).ravel() for r in powers])
    return np.linalg.lstsq(A, target.ravel(), rcond=None)[0]


def test_sample_covariance_examples():
    s = np.array([1.0, -2.0, 3.0])
    assert np.allclose(sample_covariance(s).matrix, np.outer(s, s))
    Q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((5, 2)))
    S = Q * np.sqrt(2)
    assert np.allclose(sample_covariance(S).matrix, Q @ Q.T)


def test_sample_covariance_white():
    W = white_noise(50, 100_000, 3)
    C = sample_covariance(W).matrix
    assert np.linalg.norm(C - np.eye(50)) / np.sqrt(50) < 0.05


def test_periodogram_identity_basis():
    b = diag_basis([0.0, 1.0])
    assert np.allclose(periodogram(b, np.array([1.0, 2.0])), [1, 4])
    with pytest.raises(DimensionMismatch):
        periodogram(b, np.ones(3))


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 30), st.integers(0, 1000))
def test_correlogram_equals_periodogram(m, seed):
    b = eigendecompose(dirac(random_complex(7, 0.5, 0.5, seed)))
    S = np.random.default_rng(seed).standard_normal((b.size, m))
    assert np.abs(correlogram(b, sample_covariance(S)) - periodogram(b, S)).max() < 1e-9


def test_psd_to_cov(dbasis):
    n = dbasis.size
    assert np.allclose(psd_to_cov(dbasis, np.ones(n)).matrix, np.eye(n))
    e = np.zeros(n)
    e[3] = 1
    u = dbasis.eigenvectors[:, 3]
    assert np.allclose(psd_to_cov(dbasis, e).matrix, np.outer(u, u))
    C, _ = true_cov_psd(dbasis, Polynomial((0.2, 0.1)))
    assert np.abs(psd_to_cov(dbasis, correlogram(dbasis, C)).matrix - C).max() < 1e-8


def test_psd_methods_are_diagonal(dbasis):
    S = generate(dbasis, Polynomial((0.1, 0.1, 0.1)), 50, 1)
    U = dbasis.eigenvectors
    for method in ("correlogram", "periodogram", "ma_spectral", "ma_spatial", "wirtinger", "kernel", "ar1_mle"):
        C = estimate_covariance(method, S, dbasis, order=2).matrix
        assert np.allclose(C, C.T, atol=1e-12)
        Ct = U.T @ C @ U
        assert np.abs(Ct - np.diag(np.diag(Ct))).max() < 1e-10


def test_estimate_covariance_tags(dbasis):
    S = generate(dbasis, Polynomial((0.1, 0.1, 0.1)), 30, 2)
    for method in COV_METHODS:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", FitWarning)
            est = estimate_covariance(method, S, dbasis, order=1)
        assert est.method == method
    with pytest.raises(ValueError):
        estimate_covariance("bogus", S, dbasis)


def test_subspace_periodogram(small_complex):
    b = eigendecompose(hodge_laplacian(small_complex, 1))
    S = generate(b, Polynomial((0.5, 0.2)), 40, 3)
    assert np.allclose(periodogram_subspace(b, S, np.arange(b.size)), periodogram(b, S))
    curl = b.indices(Subspace.CURL)
    S_c = b.columns(Subspace.CURL) @ np.random.default_rng(1).standard_normal((curl.size, 40))
    full = periodogram(b, S_c)
    restricted = periodogram_subspace(b, S_c, Subspace.CURL)
    assert np.abs(full[curl] - restricted[curl]).max() < 1e-9
    with pytest.raises(NonOrthonormalSubspace):
        check_orthonormal(np.ones((4, 2)))


def test_subspace_periodogram_helps_harmonic(hollow_square):
    b = eigendecompose(hodge_laplacian(hollow_square, 1))
    idx = b.indices(Subspace.HARMONIC)
    p = np.zeros(b.size)
    p[idx] = 1.0
    C = psd_to_cov(b, p).matrix
    S = b.eigenvectors @ (np.sqrt(p)[:, None] * white_noise(b.size, 100, 4))
    full = rel_error(psd_to_cov(b, periodogram(b, S)), C)
    restricted = rel_error(psd_to_cov(b, periodogram_subspace(b, S, idx)), C)
    assert restricted <= full


def test_ma_gamma_exact_small():
    b = diag_basis([0.0, 1.0, 2.0])
    gamma, est = fit_ma_gamma(np.array([1.0, 1.75, 3.0]), b, 2)
    assert np.allclose(gamma, [1.0, 0.5, 0.25], atol=1e-12)
    assert np.allclose(est.psd, [1.0, 1.75, 3.0])
    assert est.info["scale"] == 2.0


def test_ma_gamma_r1_is_mean(dbasis):
    p = np.random.default_rng(0).uniform(size=dbasis.size)
    gamma, _ = fit_ma_gamma(p, dbasis, 1)
    assert np.isclose(gamma[0], p.mean())


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 3), st.integers(0, 1000))
def test_ma_spatial_matches_vec_ls(R, seed):
    b = eigendecompose(dirac(random_complex(8, 0.5, 0.5, seed)))
    A = np.random.default_rng(seed).standard_normal((b.size, b.size + 2))
    C = A @ A.T / A.shape[1]
    g_spatial, _ = fit_ma_gamma(C, b, R, "spatial")
    T = b.operator.matrix
    g_oracle = vec_ls(np.eye(b.size), T, range(2 * R - 1), C)
    assert np.abs(g_spatial - g_oracle).max() < 1e-8 * max(1.0, np.abs(g_oracle).max())
    g_spectral, _ = fit_ma_gamma(correlogram(b, C), b, R, "spectral")
    assert np.abs(g_spatial - g_spectral).max() < 1e-8 * max(1.0, np.abs(g_oracle).max())


def test_ma_negative_flag():
    b = diag_basis([0.0, 1.0, 2.0, 3.0])
    _, est = fit_ma_gamma(np.array([1.0, -1.0, 1.0, -1.0]), b, 1)
    assert "negative_psd" not in est.flags
    _, est = fit_ma_gamma(np.array([0.0, 1.0, 0.0, -1.0]), b, 2)
    assert "negative_psd" in est.flags


def test_ma_rank_deficient_warns():
    b = diag_basis([1.0, 1.0, 2.0])
    with pytest.warns(FitWarning):
        _, est = fit_ma_gamma(np.ones(3), b, 3)
    assert "rank_deficient" in est.flags


def test_ar_eta_exact(dbasis):
    _, p = true_cov_psd(dbasis, AutoRegressive((0.3,)))
    eta, est = fit_ar_eta(p, dbasis, 1)
    assert np.abs(eta - [0.6, -0.09]).max() < 1e-8
    C, _ = true_cov_psd(dbasis, AutoRegressive((0.3,)))
    eta_s, est_s = fit_ar_eta(C, dbasis, 1, "spatial")
    assert np.abs(eta_s - [0.6, -0.09]).max() < 1e-8
    assert np.abs(est_s.matrix - C).max() < 1e-8


def test_ar_eta_white(dbasis):
    n = dbasis.size
    for domain, data in (("spectral", np.ones(n)), ("spatial", np.eye(n))):
        eta, est = fit_ar_eta(data, dbasis, 2, domain)
        assert np.abs(eta).max() < 1e-12
        assert np.allclose(est.matrix, np.eye(n))


@settings(max_examples=10, deadline=None)
@given(st.integers(1, 2), st.integers(0, 1000))
def test_ar_spatial_matches_vec_ls(R, seed):
    b = eigendecompose(dirac(random_complex(7, 0.6, 0.5, seed)))
    A = np.random.default_rng(seed).standard_normal((b.size, b.size))
    C = A @ A.T / b.size + np.eye(b.size)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FitWarning)
        eta, _ = fit_ar_eta(C, b, R, "spatial")
    T = b.operator.matrix / b.scale
    oracle = vec_ls(C, T, range(1, 2 * R + 1), C - np.eye(b.size))
    eta_norm = eta * b.scale ** np.arange(1, 2 * R + 1)
    A_mat = np.column_stack([(C @ np.linalg.matrix_power(T, r)).ravel() for r in range(1, 2 * R + 1)])
    resid = lambda x: np.linalg.norm(A_mat @ x - (C - np.eye(b.size)).ravel())
    assert resid(eta_norm) <= resid(oracle) * (1 + 1e-8) + 1e-10


def test_ar_singular_reconstruction():
    b = diag_basis([0.0, 1.0, 2.0])
    # any |1 - Psi eta| below tol counts as a zero of the fitted inverse response
    with pytest.warns(FitWarning):
        eta, est = fit_ar_eta(np.array([1.0, 1.5, 4.0]), b, 1, tol=10.0)
    assert est is None
    assert eta.shape == (2,)
    with pytest.raises(ValueError):
        fit_ar_eta(np.ones(3), b, 0)


def test_wirtinger_recovers_beta(dbasis):
    beta = np.array([0.4, -0.3, 0.1])
    _, p = true_cov_psd(dbasis, Polynomial(beta))
    res = fit_ma_beta_wirtinger(p, dbasis, 3)
    assert res.loss < 1e-6
    assert min(np.abs(res.beta - beta).max(), np.abs(res.beta + beta).max()) < 1e-6


def test_wirtinger_zero_and_monotone(dbasis):
    res = fit_ma_beta_wirtinger(np.zeros(dbasis.size), dbasis, 2)
    assert np.allclose(res.beta, 0)
    rng = np.random.default_rng(5)
    for _ in range(5):
        p = rng.uniform(size=dbasis.size)
        res = fit_ma_beta_wirtinger(p, dbasis, 2, max_iter=200, beta0=rng.standard_normal(2))
        assert np.all(np.diff(res.losses) <= 1e-15)


def test_spectral_params(dbasis):
    lam = dbasis.eigenvalues
    fit = fit_spectral_params(np.exp(-2 * lam ** 2), dbasis, "gaussian")
    assert abs(fit.params[0] - 2) < 1e-3
    lap = fit_spectral_params(np.exp(-2 * lam ** 2), dbasis, "laplacian")
    assert fit.residual <= lap.residual
    flat = fit_spectral_params(np.full(dbasis.size, 0.7), dbasis, "exponential")
    assert abs(flat.params[0]) < 1e-3
    with pytest.raises(ValueError):
        fit_spectral_params(np.ones(dbasis.size), dbasis, "lowpass")


def test_ar1_mle_white_noise():
    b = diag_basis([0.0, 1.0, 2.0, 3.0])
    assert fit_ar1_gaussian_mle(np.eye(4), b) == 0.0
    with pytest.raises(DegenerateSpectrum):
        fit_ar1_gaussian_mle(np.eye(2), diag_basis([-1.0, 0.0]))


@settings(max_examples=15, deadline=None)
@given(st.floats(0.0, 0.9), st.integers(0, 1000))
def test_ar1_mle_beats_grid(frac, seed):
    b = eigendecompose(dirac(random_complex(8, 0.5, 0.5, seed)))
    alpha = frac / b.eigenvalues.max()
    S = generate(b, AutoRegressive((alpha,)), 200, seed)
    C = sample_covariance(S)
    a_hat = fit_ar1_gaussian_mle(C, b)
    c = spectral_diagonal(b, C)
    lam = b.eigenvalues
    best = ar1_neg_loglik(a_hat, c, lam)
    grid = np.linspace(0, (1 - 1e-6) / lam.max(), 100)
    assert all(best <= ar1_neg_loglik(a, c, lam) + 1e-12 for a in grid)


def test_rel_error():
    X = np.arange(1.0, 7.0).reshape(2, 3)
    assert rel_error(X, X) == 0
    assert rel_error(np.zeros_like(X), X) == 1
    assert rel_error(2 * X, X) == 1
    with pytest.raises(ZeroReference):
        rel_error(X, np.zeros_like(X))
