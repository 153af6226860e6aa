"""Wiener denoising and interpolation of missing simplices."""
import warnings

import numpy as np

from topostat.errors import DegenerateRecoveryWarning
from topostat import (AutoRegressive, Mixed, FromCovariance, SelectionMask, Sem, Smoothness, dirac,
                      eigendecompose, generate, interpolate_map, interpolate_regularized, periodogram,
                      random_complex, rel_error, true_cov_psd, wiener_denoise)

if __name__ == "__main__":
    c = random_complex(20, 0.3, 0.4, seed=5)
    op = dirac(c)
    basis = eigendecompose(op)
    spec = AutoRegressive((0.3,))
    C, p = true_cov_psd(basis, spec)
    rng = np.random.default_rng(6)
    S = generate(basis, spec, 200, seed=6)

    # denoising at a few noise levels
    for noise_var in (0.1, 1.0, 10.0):
        Y = S + np.sqrt(noise_var) * rng.standard_normal(S.shape)
        out = wiener_denoise(basis, p, noise_var, Y)
        print(f"noise {noise_var:5.1f}: noisy {rel_error(Y, S):.3f}  wiener {rel_error(out, S):.3f}")

    # interpolation from a random half of the simplices
    obs = np.sort(rng.choice(basis.size, basis.size // 2, replace=False))
    mask = SelectionMask(tuple(obs), basis.size)
    s_bar = S[obs] + 0.1 * rng.standard_normal((obs.size, S.shape[1]))
    p_hat = periodogram(basis, S)
    # plain smoothness ignores the model and leaves unobserved isolated vertices undetermined
    warnings.simplefilter("ignore", DegenerateRecoveryWarning)
    results = {
        "zero fill": mask.zero_fill(s_bar),
        "MAP (true C)": interpolate_map(C, mask, 0.01, s_bar),
        "SEM alpha=0.3": interpolate_regularized(Sem(0.3, op), mask, 0.01, s_bar),
        "smoothness": interpolate_regularized(Smoothness(op), mask, 0.01, s_bar),
        "periodogram + smooth": interpolate_regularized(
            Mixed(((1.0, FromCovariance(basis=basis, psd=p_hat)), (0.1, Smoothness(op)))), mask, 0.01, s_bar),
    }
    for name, out in results.items():
        print(f"{name:22s} {rel_error(out, S):.4f}")
