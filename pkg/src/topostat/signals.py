"""Stationary signal models: white noise, MA/AR filters and closed-form spectral responses."""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, SingularARResponse


def _expit(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def polyval_ascending(coeffs, lam):
    """sum_r coeffs[r] * lam**r, evaluated with Horner's rule."""
    lam = np.asarray(lam, dtype=float)
    out = np.zeros_like(lam)
    for c in reversed(np.asarray(coeffs, dtype=float)):
        out = out * lam + c
    return out


@dataclass(frozen=True)
class Polynomial:
    """FIR filter H = sum_{r=0}^{R-1} h_r T^r."""

    coeffs: tuple

    def __post_init__(self):
        coeffs = tuple(float(c) for c in np.atleast_1d(self.coeffs))
        if not coeffs or not np.all(np.isfinite(coeffs)):
            raise ValueError("polynomial filter needs at least one finite coefficient")
        object.__setattr__(self, "coeffs", coeffs)

    def response(self, lam):
        return polyval_ascending(self.coeffs, lam)

    def psd(self, lam):
        return self.response(lam) ** 2


@dataclass(frozen=True)
class AutoRegressive:
    """AR filter: s = sum_{r=1}^R a_r T^r s + w, i.e. frequency response 1 / (1 - sum a_r lam^r)."""

    coeffs: tuple
    tol: float = 1e-12

    def __post_init__(self):
        coeffs = tuple(float(c) for c in np.atleast_1d(self.coeffs))
        if not coeffs or not np.all(np.isfinite(coeffs)):
            raise ValueError("AR filter needs at least one finite coefficient")
        object.__setattr__(self, "coeffs", coeffs)

    def inverse_response(self, lam):
        return polyval_ascending((1.0,) + tuple(-a for a in self.coeffs), lam)

    def response(self, lam):
        lam = np.asarray(lam, dtype=float)
        h = self.inverse_response(lam)
        bad = np.flatnonzero(np.abs(h) <= self.tol)
        if bad.size:
            i = int(bad[0])
            raise SingularARResponse(i, np.ravel(lam)[i])
        return 1.0 / h

    def psd(self, lam):
        return self.response(lam) ** 2

    def precision_coeffs(self):
        """Coefficients of (1 - sum a_r lam^r)^2 in ascending powers."""
        a = np.concatenate([[1.0], -np.asarray(self.coeffs)])
        return np.convolve(a, a)


SPECTRAL_MODELS = ("lowpass", "exponential", "sigmoid", "gaussian", "laplacian")
KERNEL_MODELS = ("gaussian", "laplacian")

_DEFAULT_PARAMS = {
    "lowpass": (1e-3,),
    "exponential": (1.0,),
    "sigmoid": (1.0, 0.0),
    "gaussian": (1.0,),
    "laplacian": (1.0, 1.0),
}


def spectral_psd(model, params, lam):
    """PSD implied by a closed-form spectral model; inf/nan outside the model's domain."""
    lam = np.asarray(lam, dtype=float)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        if model == "lowpass":
            return (lam ** 2 + params[0]) ** -2.0
        if model == "exponential":
            return np.exp(-2.0 * params[0] * lam)
        if model == "sigmoid":
            return _expit(params[0] * lam + params[1]) ** 2
        if model == "gaussian":
            return np.exp(-params[0] * lam ** 2)
        if model == "laplacian":
            base = 1.0 + params[0] * lam
            out = np.where(base > 0, np.abs(base) ** -params[1], np.nan)
            return out
    raise ValueError(f"unknown spectral model {model!r}")


@dataclass(frozen=True)
class SpectralResponse:
    """Closed-form frequency response.

    ``lowpass``: (lam^2 + t0)^-1; ``exponential``: exp(-t0 lam);
    ``sigmoid``: sigmoid(t0 lam + t1). The kernels ``gaussian``
    (exp(-t0 lam^2)) and ``laplacian`` ((1 + t0 lam)^-t1) describe the PSD
    itself, so their filter response is the square root of the kernel.
    """

    model: str
    params: tuple = None

    def __post_init__(self):
        if self.model not in SPECTRAL_MODELS:
            raise ValueError(f"unknown spectral model {self.model!r}; choose from {SPECTRAL_MODELS}")
        params = _DEFAULT_PARAMS[self.model] if self.params is None else self.params
        params = tuple(float(p) for p in np.atleast_1d(params))
        if len(params) != len(_DEFAULT_PARAMS[self.model]):
            raise ValueError(f"{self.model} takes {len(_DEFAULT_PARAMS[self.model])} parameters")
        if self.model == "lowpass" and params[0] <= 0:
            raise ValueError("lowpass offset must be positive")
        if self.model in KERNEL_MODELS and params[0] < 0:
            raise ValueError("kernel rate must be nonnegative")
        object.__setattr__(self, "params", params)

    def response(self, lam):
        lam = np.asarray(lam, dtype=float)
        if self.model == "lowpass":
            return 1.0 / (lam ** 2 + self.params[0])
        if self.model == "exponential":
            return np.exp(-self.params[0] * lam)
        if self.model == "sigmoid":
            return _expit(self.params[0] * lam + self.params[1])
        p = self.psd(lam)
        if not np.all(np.isfinite(p)):
            raise ValueError(f"{self.model} kernel undefined on part of the spectrum")
        return np.sqrt(p)

    def psd(self, lam):
        return spectral_psd(self.model, self.params, lam)


@dataclass
class SignalEnsemble:
    """N x M matrix of realizations plus the per-order row offsets of a multiorder signal."""

    data: np.ndarray
    offsets: tuple = None
    operator_kind: str = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.data = np.atleast_2d(np.asarray(self.data, dtype=float))
        if self.data.shape[1] < 1:
            raise DimensionMismatch("an ensemble needs at least one column")
        if self.offsets is not None:
            self.offsets = tuple(int(o) for o in self.offsets)
            if self.offsets[0] != 0 or self.offsets[-1] != self.data.shape[0] or list(self.offsets) != sorted(self.offsets):
                raise DimensionMismatch("offsets must partition the rows")

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)

    @property
    def shape(self):
        return self.data.shape

    def order_block(self, k):
        return self.data[self.offsets[k]:self.offsets[k + 1]]


def make_rng(seed):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def white_noise(n, m, seed):
    """n x m standard Gaussian matrix.

    Columns are drawn one after another from a single stream, so the first
    m' columns of a draw equal the draw of size m' with the same seed.
    """
    if n < 1 or m < 1:
        raise ValueError("white noise needs n, m >= 1")
    return make_rng(seed).standard_normal((m, n)).T.copy()


def frequency_response(basis, spec):
    return np.asarray(spec.response(basis.eigenvalues), dtype=float)


def apply_filter(basis, spec, X):
    """U diag(g(lam)) U^T X for the filter's frequency response g."""
    X = np.asarray(X, dtype=float)
    if X.shape[0] != basis.size:
        raise DimensionMismatch(f"expected {basis.size} rows, got {X.shape[0]}")
    g = frequency_response(basis, spec)
    U = basis.eigenvectors
    coeffs = U.T @ X
    coeffs *= g.reshape((-1,) + (1,) * (X.ndim - 1))
    return U @ coeffs


def generate(basis, spec, m, seed):
    return apply_filter(basis, spec, white_noise(basis.size, m, seed))


def true_cov_psd(basis, spec):
    """Covariance U diag(p) U^T and PSD p = g(lam)^2 of the filtered white noise."""
    p = frequency_response(basis, spec) ** 2
    U = basis.eigenvectors
    C = (U * p) @ U.T
    return (C + C.T) / 2, p
