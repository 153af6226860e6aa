import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from topostat import (
    AutoRegressive,
    FromCovariance,
    Mixed,
    Polynomial,
    SelectionMask,
    Sem,
    SimplicialComplex,
    Smoothness,
    SpectralResponse,
    Subspace,
    dirac,
    eigendecompose,
    generate,
    hodge_laplacian,
    interpolate_map,
    interpolate_regularized,
    interpolate_subspace,
    psd_to_cov,
    random_complex,
    rel_error,
    true_cov_psd,
    wiener_denoise,
)
from topostat.errors import (
    DegenerateRecoveryWarning,
    DimensionMismatch,
    NonOrthonormalSubspace,
    NonpositiveNoiseVariance,
    NonpositivePsd,
)
from topostat.recovery import wiener_response


@pytest.fixture(scope="module")
def setup(small_complex):
    op = dirac(small_complex)
    basis = eigendecompose(op)
    C, p = true_cov_psd(basis, Polynomial((0.3, 0.3, 0.3)))
    S = generate(basis, Polynomial((0.3, 0.3, 0.3)), 4, 1)
    return op, basis, C, p, S


def random_mask(n, frac, seed):
    rng = np.random.default_rng(seed)
    return SelectionMask(tuple(np.sort(rng.choice(n, int(frac * n), replace=False))), n)


def test_wiener_examples(setup):
    _, basis, _, _, S = setup
    n = basis.size
    assert np.allclose(wiener_denoise(basis, np.full(n, 0.2), 0.2, S), S / 2)
    assert np.allclose(wiener_denoise(basis, np.zeros(n), 0.2, S), 0)
    with pytest.raises(NonpositiveNoiseVariance):
        wiener_denoise(basis, np.ones(n), 0.0, S)
    with pytest.raises(DimensionMismatch):
        wiener_denoise(basis, np.ones(n + 1), 0.1, S)
    with pytest.raises(NonpositivePsd):
        wiener_denoise(basis, -np.ones(n), 0.1, S)


@settings(max_examples=20, deadline=None)
@given(st.floats(1e-3, 10.0), st.integers(0, 1000))
def test_wiener_paths_agree(noise_var, seed):
    basis = eigendecompose(dirac(random_complex(8, 0.5, 0.5, seed)))
    rng = np.random.default_rng(seed)
    p = rng.uniform(0, 2, basis.size)
    Y = rng.standard_normal((basis.size, 3))
    a = wiener_denoise(basis, p, noise_var, Y, "spectral")
    b = wiener_denoise(basis, p, noise_var, Y, "spatial")
    assert np.abs(a - b).max() < 1e-8


def test_wiener_response_monotone():
    p = np.linspace(0, 10, 50)
    g = wiener_response(p, 0.5)
    assert np.all((g >= 0) & (g <= 1))
    assert np.all(np.diff(g) > 0)


def test_mask_validation():
    with pytest.raises(ValueError):
        SelectionMask((2, 1), 4)
    with pytest.raises(ValueError):
        SelectionMask((0, 4), 4)
    m = SelectionMask((1, 3), 4)
    assert m.matrix().tolist() == [[0, 1, 0, 0], [0, 0, 0, 1]]
    assert m.zero_fill(np.array([5.0, 6.0])).tolist() == [0, 5, 0, 6]


def test_map_examples(setup):
    _, basis, C, p, S = setup
    n = basis.size
    full = SelectionMask.full(n)
    assert np.abs(interpolate_map(np.eye(n), full, 1e-12, S) - S).max() < 1e-5
    assert np.abs(interpolate_map(C, full, 0.05, S) - wiener_denoise(basis, p, 0.05, S)).max() < 1e-8
    mask = random_mask(n, 0.4, 0)
    s_bar = S[mask.index]
    assert np.allclose(interpolate_map(np.eye(n), mask, 0.25, s_bar), mask.zero_fill(s_bar) / 1.25)


def test_map_empty_mask(setup):
    _, basis, C, _, _ = setup
    with pytest.warns(DegenerateRecoveryWarning):
        out = interpolate_map(C, SelectionMask((), basis.size), 0.1, np.zeros((0, 2)))
    assert out.shape == (basis.size, 2) and not out.any()


def test_map_rank_deficient_cov(setup):
    _, basis, _, _, S = setup
    idx = np.arange(5)
    C = psd_to_cov(basis, np.ones(5), support=idx).matrix
    mask = random_mask(basis.size, 0.5, 1)
    out = interpolate_map(C, mask, 0.01, S[mask.index])
    assert np.all(np.isfinite(out))


def test_sem_equals_map():
    c = random_complex(12, 0.45, 0.5, 7)
    op = dirac(c)
    basis = eigendecompose(op)
    C, _ = true_cov_psd(basis, AutoRegressive((0.3,)))
    S = generate(basis, AutoRegressive((0.3,)), 3, 2)
    for frac in (0.2, 0.5, 0.7):
        mask = random_mask(basis.size, frac, int(10 * frac))
        s_bar = S[mask.index]
        a = interpolate_map(C, mask, 0.01, s_bar)
        b = interpolate_regularized(Sem(0.3, op), mask, 0.01, s_bar)
        assert np.abs(a - b).max() < 1e-8


def test_from_covariance_matches_map(setup):
    _, basis, C, p, S = setup
    mask = random_mask(basis.size, 0.6, 2)
    s_bar = S[mask.index]
    ref = interpolate_map(C, mask, 0.01, s_bar)
    a = interpolate_regularized(FromCovariance(basis=basis, psd=p, ridge=1e-14), mask, 0.01, s_bar)
    b = interpolate_regularized(FromCovariance(cov=C, ridge=1e-14), mask, 0.01, s_bar)
    assert np.abs(a - ref).max() < 1e-6
    assert np.abs(b - ref).max() < 1e-6


def test_regularized_is_minimizer(setup):
    op, basis, _, _, S = setup
    mask = random_mask(basis.size, 0.5, 3)
    s_bar = S[mask.index, 0]
    Q = Smoothness(op).precision()
    z = interpolate_regularized(Smoothness(op), mask, 0.1, s_bar)
    Theta = mask.matrix()
    grad = Theta.T @ (Theta @ z - s_bar) + 0.1 * Q @ z
    assert np.linalg.norm(grad) <= 1e-8 * (1 + np.linalg.norm(Theta.T @ s_bar))


def test_smoothness_constant_components():
    c = SimplicialComplex.from_simplices([(0, 1, 2), (3, 4)])
    op = dirac(c)
    s = np.zeros(c.size)
    s[:3] = 2.0
    s[3:5] = -1.0
    mask = SelectionMask.full(c.size)
    z = interpolate_regularized(Smoothness(op), mask, 1e-10, s)
    assert np.abs(z - s).max() < 1e-8
    assert np.array_equal(Smoothness(hodge_laplacian(c, 1)).precision(), hodge_laplacian(c, 1).matrix)


def test_mixed_unit_data_weight(setup):
    op, basis, _, p, S = setup
    mask = random_mask(basis.size, 0.5, 4)
    s_bar = S[mask.index]
    prec = Mixed(((1.0, FromCovariance(basis=basis, psd=p)), (0.1, Smoothness(op))))
    Q = FromCovariance(basis=basis, psd=p).precision() + 0.1 * Smoothness(op).precision()
    A = mask.matrix().T @ mask.matrix() + Q
    expected = np.linalg.solve(A, mask.zero_fill(s_bar))
    got = interpolate_regularized(prec, mask, 123.0, s_bar)
    assert np.allclose(got, expected)
    assert np.allclose(
        interpolate_regularized(Mixed(((1.0, FromCovariance(basis=basis, psd=p)), (0.0, Smoothness(op)))), mask, 1.0, s_bar),
        interpolate_regularized(FromCovariance(basis=basis, psd=p), mask, 1.0, s_bar),
    )


def test_singular_system_warns():
    c = SimplicialComplex.from_simplices([(0, 1), (2, 3)])
    op = hodge_laplacian(c, 0)
    mask = SelectionMask((0, 1), c.counts[0])
    with pytest.warns(DegenerateRecoveryWarning):
        z = interpolate_regularized(Smoothness(op), mask, 1.0, np.array([1.0, 1.0]))
    assert np.all(np.isfinite(z))


def test_subspace_full_equals_map(setup):
    _, basis, C, p, S = setup
    mask = random_mask(basis.size, 0.5, 5)
    s_bar = S[mask.index]
    a = interpolate_subspace(basis.eigenvectors, p, mask, 0.01, s_bar)
    b = interpolate_map(psd_to_cov(basis, p), mask, 0.01, s_bar)
    assert np.abs(a - b).max() < 1e-8


def test_subspace_exact_signal(small_complex):
    basis = eigendecompose(hodge_laplacian(small_complex, 1))
    U_s = basis.columns(Subspace.CURL)
    s = U_s @ np.arange(1.0, U_s.shape[1] + 1)
    out = interpolate_subspace(U_s, np.ones(U_s.shape[1]), SelectionMask.full(basis.size), 1e-12, s)
    assert rel_error(out, s) < 1e-10
    with pytest.raises(NonOrthonormalSubspace):
        interpolate_subspace(2 * U_s, np.ones(U_s.shape[1]), SelectionMask.full(basis.size), 0.1, s)
    with pytest.raises(NonpositivePsd):
        interpolate_subspace(U_s, np.zeros(U_s.shape[1]), SelectionMask.full(basis.size), 0.1, s)


def test_missing_order_recovery():
    c = random_complex(15, 0.4, 0.5, 21)
    basis = eigendecompose(dirac(c))
    spec = SpectralResponse("lowpass", (1.0,))
    _, p = true_cov_psd(basis, spec)
    lo, hi = c.offsets[1], c.offsets[2]
    observed = tuple(i for i in range(c.size) if not lo <= i < hi)
    mask = SelectionMask(observed, c.size)
    wins = 0
    for seed in range(10):
        S = generate(basis, spec, 1, seed)
        out = interpolate_subspace(basis.eigenvectors, p, mask, 1e-3, S[mask.index])
        wins += rel_error(out[lo:hi], S[lo:hi]) < rel_error(np.zeros(hi - lo), S[lo:hi])
    assert wins == 10
