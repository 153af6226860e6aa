"""Wiener denoising and stationarity-based interpolation."""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import (
    DegenerateRecoveryWarning,
    DimensionMismatch,
    NonpositiveNoiseVariance,
    NonpositivePsd,
)
from .estimation import check_orthonormal
from .spectral import TopologicalOperator


def _positive_noise(noise_var):
    if not noise_var > 0:
        raise NonpositiveNoiseVariance(f"noise variance must be positive, got {noise_var}")


def wiener_response(p, noise_var):
    p = np.asarray(p, dtype=float)
    return p / (p + noise_var)


def wiener_denoise(basis, p, noise_var, Y, path="spectral"):
    """MMSE estimate C (C + s2 I)^-1 Y of a stationary signal from white-noise-corrupted Y."""
    _positive_noise(noise_var)
    p = np.asarray(p, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if p.shape[0] != basis.size or Y.shape[0] != basis.size:
        raise DimensionMismatch("PSD and observations must match the basis size")
    if np.any(p < 0):
        raise NonpositivePsd("PSD must be nonnegative")
    U = basis.eigenvectors
    if path == "spectral":
        g = wiener_response(p, noise_var)
        coeffs = U.T @ Y
        coeffs *= g.reshape((-1,) + (1,) * (Y.ndim - 1))
        return U @ coeffs
    if path == "spatial":
        C = (U * p) @ U.T
        C = (C + C.T) / 2
        A = C + noise_var * np.eye(basis.size)
        return C @ sla.solve(A, Y, assume_a="pos")
    raise ValueError(f"path must be 'spectral' or 'spatial', got {path!r}")


@dataclass(frozen=True)
class SelectionMask:
    """Observed row indices out of ``size`` rows."""

    observed: tuple
    size: int

    def __post_init__(self):
        obs = tuple(int(i) for i in np.atleast_1d(np.asarray(self.observed, dtype=int)))
        if any(b <= a for a, b in zip(obs, obs[1:])):
            raise ValueError("observed indices must be strictly ascending")
        if obs and (obs[0] < 0 or obs[-1] >= self.size):
            raise ValueError(f"observed indices must lie in 0..{self.size - 1}")
        object.__setattr__(self, "observed", obs)

    @classmethod
    def full(cls, size):
        return cls(tuple(range(size)), size)

    @property
    def index(self):
        return np.asarray(self.observed, dtype=int)

    def __len__(self):
        return len(self.observed)

    def matrix(self):
        Theta = np.zeros((len(self.observed), self.size))
        Theta[np.arange(len(self.observed)), self.index] = 1.0
        return Theta

    def zero_fill(self, s_bar):
        s_bar = np.asarray(s_bar, dtype=float)
        out = np.zeros((self.size,) + s_bar.shape[1:])
        out[self.index] = s_bar
        return out


def _observations(mask, s_bar):
    s_bar = np.asarray(s_bar, dtype=float)
    if s_bar.shape[0] != len(mask):
        raise DimensionMismatch(f"expected {len(mask)} observed rows, got {s_bar.shape[0]}")
    return s_bar


def interpolate_map(C, mask, noise_var, s_bar):
    """C Theta^T (Theta C Theta^T + s2 I)^-1 s_bar, which never inverts C."""
    _positive_noise(noise_var)
    C = np.asarray(getattr(C, "matrix", C), dtype=float)
    if C.shape[0] != mask.size:
        raise DimensionMismatch("covariance size does not match the mask")
    s_bar = _observations(mask, s_bar)
    if len(mask) == 0:
        warnings.warn("empty mask: returning the zero prior mean", DegenerateRecoveryWarning, stacklevel=2)
        return np.zeros((mask.size,) + s_bar.shape[1:])
    idx = mask.index
    C_oo = C[np.ix_(idx, idx)]
    A = C_oo + noise_var * np.eye(len(idx))
    try:
        factor = sla.cho_factor(A)
    except np.linalg.LinAlgError:
        ridge = 1e-10 * np.trace(C_oo) / len(idx)
        warnings.warn("observation covariance numerically singular; ridge added", DegenerateRecoveryWarning, stacklevel=2)
        factor = sla.cho_factor(A + ridge * np.eye(len(idx)))
    return C[:, idx] @ sla.cho_solve(factor, s_bar)


# ---- precision specifications -------------------------------------------------


def _eig_inverse(U, p, ridge):
    if ridge is None:
        ridge = 1e-6 * max(float(np.max(p, initial=0.0)), 0.0)
    if np.any(p <= 0) and not ridge > 0:
        raise NonpositivePsd("a ridge > 0 is needed to invert a PSD with zero entries")
    floored = np.maximum(p, ridge) if ridge > 0 else p
    Q = (U / floored) @ U.T
    return (Q + Q.T) / 2


@dataclass(frozen=True, eq=False)
class FromCovariance:
    """Precision U diag(1 / max(p, ridge)) U^T, from (basis, psd) or a covariance matrix.

    The default ridge is 1e-6 * max(p).
    """

    cov: np.ndarray = None
    basis: object = None
    psd: np.ndarray = None
    ridge: float = None

    def precision(self):
        if self.basis is not None and self.psd is not None:
            return _eig_inverse(self.basis.eigenvectors, np.asarray(self.psd, dtype=float), self.ridge)
        if self.cov is None:
            raise ValueError("FromCovariance needs either a covariance or a (basis, psd) pair")
        C = np.asarray(getattr(self.cov, "matrix", self.cov), dtype=float)
        p, U = np.linalg.eigh((C + C.T) / 2)
        return _eig_inverse(U, np.maximum(p, 0.0), self.ridge)


def _operator_matrix(op):
    return op.matrix if isinstance(op, TopologicalOperator) else np.asarray(op, dtype=float)


@dataclass(frozen=True, eq=False)
class Smoothness:
    """Precision L_k for a Hodge operator, D^2 for the Dirac operator.

    A plain array is taken to be the smoothness precision itself.
    """

    operator: object

    def precision(self):
        if not isinstance(self.operator, TopologicalOperator):
            return np.array(self.operator, dtype=float)
        T = self.operator.matrix
        return T.copy() if self.operator.kind == "hodge" else T @ T


@dataclass(frozen=True, eq=False)
class Sem:
    """First-order AR precision I - 2 a T + a^2 T^2."""

    alpha: float
    operator: object

    def precision(self):
        T = _operator_matrix(self.operator)
        Q = np.eye(T.shape[0]) - 2 * self.alpha * T + self.alpha ** 2 * (T @ T)
        return (Q + Q.T) / 2


@dataclass(frozen=True, eq=False)
class Mixed:
    """Weighted sum of precisions, used with a unit-weight data-fit term."""

    terms: tuple

    def precision(self):
        terms = list(self.terms)
        if not terms:
            raise ValueError("Mixed precision needs at least one term")
        Q = None
        for weight, spec in terms:
            part = weight * spec.precision()
            Q = part if Q is None else Q + part
        return Q


def _solve_spd(A, b):
    try:
        return sla.cho_solve(sla.cho_factor(A), b)
    except np.linalg.LinAlgError:
        pass
    warnings.warn("regularized system is singular; minimum-norm solution returned", DegenerateRecoveryWarning, stacklevel=3)
    return np.linalg.lstsq(A, b, rcond=None)[0]


def interpolate_regularized(prec, mask, noise_var, s_bar):
    """Minimize (1/s2) ||s_bar - Theta z||^2 + z^T Q z, i.e. solve (Theta^T Theta + s2 Q) z = Theta^T s_bar.

    For a :class:`Mixed` precision the data-fit weight is 1 instead of 1/s2,
    i.e. ``noise_var`` is not used: ||s_bar - Theta z||^2 + sum_j w_j z^T Q_j z.
    """
    s_bar = _observations(mask, s_bar)
    Q = prec.precision()
    if Q.shape[0] != mask.size:
        raise DimensionMismatch("precision size does not match the mask")
    if isinstance(prec, Mixed):
        weight = 1.0
    else:
        _positive_noise(noise_var)
        weight = noise_var
    A = weight * Q
    A[mask.index, mask.index] += 1.0
    A = (A + A.T) / 2
    return _solve_spd(A, mask.zero_fill(s_bar))


def interpolate_subspace(U_s, p_s, mask, noise_var, s_bar):
    """Estimate restricted to span(U_s) with spectral prior diag(p_s)."""
    _positive_noise(noise_var)
    U_s = check_orthonormal(U_s)
    p_s = np.asarray(p_s, dtype=float)
    if p_s.shape[0] != U_s.shape[1]:
        raise DimensionMismatch("p_s length must equal the number of subspace columns")
    if np.any(p_s <= 0):
        raise NonpositivePsd("subspace PSD must be strictly positive")
    if U_s.shape[0] != mask.size:
        raise DimensionMismatch("subspace rows do not match the mask")
    s_bar = _observations(mask, s_bar)
    U_o = U_s[mask.index]
    A = U_o.T @ U_o + noise_var * np.diag(1.0 / p_s)
    coeffs = _solve_spd((A + A.T) / 2, U_o.T @ s_bar)
    return U_s @ coeffs
