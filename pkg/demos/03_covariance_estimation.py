"""Compare nonparametric and parametric covariance estimators as the number
of realizations grows."""
import numpy as np

from topostat import (Polynomial, dirac, eigendecompose, estimate_covariance, fit_ma_beta_wirtinger,
                      fit_ma_gamma, generate, periodogram, random_complex, rel_error, true_cov_psd)

if __name__ == "__main__":
    c = random_complex(20, 0.3, 0.4, seed=3)
    basis = eigendecompose(dirac(c))
    beta = (0.1, 0.1, 0.1)
    C, p = true_cov_psd(basis, Polynomial(beta))
    S = generate(basis, Polynomial(beta), 10000, seed=4)

    methods = ("sample", "periodogram", "ma_spatial", "ma_spectral", "wirtinger")
    print("M      " + "".join(f"{m:>13s}" for m in methods))
    for M in (100, 1000, 10000):
        errs = [rel_error(estimate_covariance(m, S[:, :M], basis, order=3), C) for m in methods]
        print(f"{M:<7d}" + "".join(f"{e:13.2e}" for e in errs))

    # with the exact PSD the coefficients come back exactly
    gamma, _ = fit_ma_gamma(p, basis, 3)
    print("gamma:", np.round(gamma, 6), "expected", np.convolve(beta, beta))
    res = fit_ma_beta_wirtinger(periodogram(basis, S), basis, 3)
    print("beta from 10000 samples:", np.round(res.beta, 4))
