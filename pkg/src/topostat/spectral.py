"""Hodge Laplacians, the Dirac operator and their spectral bases."""

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.sparse as sp

from .complex import build_incidence
from .errors import DimensionMismatch, OrderOutOfRange, UnlabeledBasis


class Subspace(str, Enum):
    GRADIENT = "gradient"
    CURL = "curl"
    HARMONIC = "harmonic"


# detection tie-break order
SUBSPACE_ORDER = (Subspace.GRADIENT, Subspace.CURL, Subspace.HARMONIC)

SPLIT_THRESHOLD = 1e-8


@dataclass(frozen=True, eq=False)
class TopologicalOperator:
    """A symmetric shift operator: a Hodge Laplacian, the Dirac operator or a plain matrix.

    For ``kind == "hodge"`` the integer incidence matrices on either side
    (``lower_incidence`` = B_k, ``upper_incidence`` = B_{k+1}) are kept so the
    spectral basis can be split into gradient, curl and harmonic parts.
    """

    kind: str
    matrix: np.ndarray
    k: int = None
    lower: np.ndarray = None
    upper: np.ndarray = None
    lower_incidence: sp.spmatrix = None
    upper_incidence: sp.spmatrix = None
    offsets: tuple = None

    @property
    def size(self):
        return self.matrix.shape[0]

    @classmethod
    def from_matrix(cls, matrix):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionMismatch("operator matrix must be square")
        if not np.allclose(matrix, matrix.T, atol=1e-12, rtol=0):
            raise ValueError("operator matrix must be symmetric")
        return cls(kind="matrix", matrix=(matrix + matrix.T) / 2)

    def power(self, r):
        return np.linalg.matrix_power(self.matrix, r)


def hodge_laplacian(complex_, k):
    """L_k = B_k^T B_k + B_{k+1} B_{k+1}^T, with the one-sided cases at k=0 and k=K."""
    K = complex_.order
    if not 0 <= k <= K:
        raise OrderOutOfRange(f"Hodge order {k} outside 0..{K}")
    n = complex_.counts[k]
    B_lo = build_incidence(complex_, k) if k >= 1 else None
    B_up = build_incidence(complex_, k + 1) if k + 1 <= K else None
    lower = (B_lo.T @ B_lo).toarray() if B_lo is not None else np.zeros((n, n), dtype=np.int64)
    upper = (B_up @ B_up.T).toarray() if B_up is not None else np.zeros((n, n), dtype=np.int64)
    return TopologicalOperator(
        kind="hodge",
        k=k,
        matrix=(lower + upper).astype(float),
        lower=lower.astype(float),
        upper=upper.astype(float),
        lower_incidence=B_lo,
        upper_incidence=B_up,
    )


def dirac_integer(complex_):
    """Integer sparse Dirac matrix; block (k, k+1) is B_{k+1}, block (k+1, k) its transpose."""
    K = complex_.order
    counts = complex_.counts
    blocks = [[None] * (K + 1) for _ in range(K + 1)]
    for k in range(K + 1):
        blocks[k][k] = sp.csr_matrix((counts[k], counts[k]), dtype=np.int64)
    for k in range(K):
        B = build_incidence(complex_, k + 1)
        blocks[k][k + 1] = B
        blocks[k + 1][k] = B.T
    return sp.bmat(blocks, format="csr", dtype=np.int64)


def dirac(complex_):
    D = dirac_integer(complex_)
    return TopologicalOperator(kind="dirac", matrix=D.toarray().astype(float), offsets=complex_.offsets)


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    """Ascending eigenvalues and orthonormal eigenvectors (columns) of an operator.

    ``labels`` holds one :class:`Subspace` per column for Hodge operators and is
    ``None`` otherwise.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    labels: tuple = None
    operator_kind: str = None
    operator: TopologicalOperator = None

    @property
    def size(self):
        return self.eigenvalues.shape[0]

    @property
    def scale(self):
        """Largest eigenvalue magnitude, floored at 1e-300 (used to normalize Vandermonde powers)."""
        return max(float(np.max(np.abs(self.eigenvalues), initial=0.0)), 1e-300)

    def indices(self, subspace):
        if self.labels is None:
            raise UnlabeledBasis("basis has no Hodge subspace labels")
        subspace = Subspace(subspace)
        return np.array([i for i, lab in enumerate(self.labels) if lab == subspace], dtype=int)

    def columns(self, subspace):
        return self.eigenvectors[:, self.indices(subspace)]


def zero_tolerance(eigenvalues):
    lam_max = float(np.max(np.abs(eigenvalues), initial=0.0))
    return 1e-8 * max(lam_max, 1.0)


def _fix_signs(U):
    """Make the largest-magnitude entry of each column positive (lowest index wins ties)."""
    if U.size == 0:
        return U
    mags = np.abs(U)
    peak = mags.max(axis=0)
    lead = np.argmax(mags >= peak - 1e-12 * np.maximum(peak, 1.0), axis=0)
    signs = np.sign(U[lead, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs


def _clusters(lam, tol):
    start = 0
    for i in range(1, len(lam) + 1):
        if i == len(lam) or lam[i] - lam[i - 1] >= tol:
            yield start, i
            start = i


def eigendecompose(op):
    """Dense symmetric eigendecomposition with deterministic signs and Hodge labels.

    Degenerate eigenspaces of a Hodge Laplacian are rotated so that every
    column lies either in span(B_k^T) or in span(B_{k+1}); the two spans are
    orthogonal, so within one eigenvalue cluster the lower Laplacian separates
    them.
    """
    if not isinstance(op, TopologicalOperator):
        op = TopologicalOperator.from_matrix(op)
    lam, U = np.linalg.eigh(op.matrix)
    labels = None
    if op.kind == "hodge":
        tol = zero_tolerance(lam)
        U = U.copy()
        labels = [None] * len(lam)
        for a, b in _clusters(lam, tol):
            V = U[:, a:b]
            if abs(lam[a:b]).max() <= tol:
                for i in range(a, b):
                    labels[i] = Subspace.HARMONIC
                continue
            if b - a > 1:
                _, R = np.linalg.eigh(V.T @ op.lower @ V)
                U[:, a:b] = V @ R
            for i in range(a, b):
                u = U[:, i]
                grad = float(np.sum((op.lower_incidence @ u) ** 2)) if op.lower_incidence is not None else 0.0
                curl = float(np.sum((op.upper_incidence.T @ u) ** 2)) if op.upper_incidence is not None else 0.0
                if grad > SPLIT_THRESHOLD and curl <= SPLIT_THRESHOLD:
                    labels[i] = Subspace.GRADIENT
                elif curl > SPLIT_THRESHOLD and grad <= SPLIT_THRESHOLD:
                    labels[i] = Subspace.CURL
                else:
                    labels[i] = Subspace.GRADIENT if grad >= curl else Subspace.CURL
        labels = tuple(labels)
    U = _fix_signs(U)
    return SpectralBasis(eigenvalues=lam, eigenvectors=U, labels=labels, operator_kind=op.kind, operator=op)


def _check_rows(basis, X):
    X = np.asarray(X, dtype=float)
    if X.shape[0] != basis.size:
        raise DimensionMismatch(f"expected {basis.size} rows, got {X.shape[0]}")
    return X


def tft(basis, X):
    """Topological Fourier transform U^T X."""
    return basis.eigenvectors.T @ _check_rows(basis, X)


def itft(basis, X_hat):
    return basis.eigenvectors @ _check_rows(basis, X_hat)


def subspace_energies(basis, s):
    """Energies (E_G, E_C, E_H) of ``s`` in the gradient, curl and harmonic subspaces."""
    if basis.labels is None:
        raise UnlabeledBasis("subspace energies need a Hodge basis")
    coeffs = tft(basis, s)
    energy = coeffs ** 2
    if energy.ndim > 1:
        energy = energy.sum(axis=tuple(range(1, energy.ndim)))
    return tuple(float(energy[basis.indices(sub)].sum()) for sub in SUBSPACE_ORDER)


def detect_subspace(basis, s):
    energies = subspace_energies(basis, s)
    return SUBSPACE_ORDER[int(np.argmax(energies))]


def hodge_project(basis, s):
    """Gradient, curl and harmonic components of ``s``."""
    if basis.labels is None:
        raise UnlabeledBasis("Hodge projection needs a Hodge basis")
    s = _check_rows(basis, s)
    parts = []
    for sub in SUBSPACE_ORDER:
        Us = basis.columns(sub)
        parts.append(Us @ (Us.T @ s))
    return tuple(parts)
