"""
Dense symmetric matrices and their eigendecomposition (cyclic Jacobi)
"""
from dataclasses import dataclass
from typing import Union

import numpy as np

from src.utils.config import Config
from src.utils.errors import ConvergenceError, NumericalError, ShapeError
from src.utils.logger import setup_logger

logger = setup_logger()

ArrayLike = Union["SymmetricMatrix", np.ndarray]


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class SymmetricMatrix:
    """
    Real symmetric n x n matrix, immutable after construction

    Use `SymmetricMatrix.from_array` to build one; it symmetrizes as (M + M^T) / 2 so
    entries[i, j] == entries[j, i] holds exactly.
    """
    entries: np.ndarray

    @classmethod
    def from_array(cls, values) -> "SymmetricMatrix":
        m = np.array(values, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ShapeError(f"Expected a square matrix, got shape {m.shape}")
        if m.shape[0] < 1:
            raise ShapeError("Matrix must have at least one row")
        if not np.all(np.isfinite(m)):
            raise NumericalError("Matrix has non-finite entries")
        return cls(_readonly((m + m.T) / 2.0))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


@dataclass(frozen=True)
class SpectralDecomposition:
    """
    Eigenvalues and orthogonal eigenvectors (columns) of a symmetric matrix

    Decompositions produced by `eigh` have ascending eigenvalues. Decompositions derived
    with `with_eigvals` keep the column order of the frozen basis instead.
    """
    eigvals: np.ndarray
    eigvecs: np.ndarray

    def __post_init__(self):
        if self.eigvecs.ndim != 2 or self.eigvecs.shape[0] != self.eigvecs.shape[1]:
            raise ShapeError(f"eigvecs must be square, got {self.eigvecs.shape}")
        if self.eigvals.shape != (self.eigvecs.shape[0],):
            raise ShapeError(
                f"eigvals shape {self.eigvals.shape} does not match eigvecs {self.eigvecs.shape}"
            )

    @property
    def n(self) -> int:
        return self.eigvals.shape[0]

    def reconstruct(self) -> SymmetricMatrix:
        return reconstruct(self)

    def with_eigvals(self, eigvals: np.ndarray) -> "SpectralDecomposition":
        """Same eigenvector basis (the identical array object), new eigenvalues"""
        eigvals = np.asarray(eigvals, dtype=np.float64)
        return SpectralDecomposition(_readonly(eigvals.copy()), self.eigvecs)


def as_symmetric(m: ArrayLike) -> SymmetricMatrix:
    return m if isinstance(m, SymmetricMatrix) else SymmetricMatrix.from_array(m)


def _off_diagonal_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def eigh(m: ArrayLike, max_sweeps: int = None) -> SpectralDecomposition:
    """
    Eigendecomposition by cyclic Jacobi rotations

    Pairs (p, q) are visited row by row in every sweep. Eigenvalues come back ascending
    and every eigenvector has its largest-magnitude component non-negative, so the
    output is fully determined by the input.

    Args:
        m: Symmetric matrix (SymmetricMatrix or array, symmetrized on entry)
        max_sweeps: Sweep cap (default: Config.JACOBI_MAX_SWEEPS)

    Returns:
        SpectralDecomposition with ascending eigenvalues
    """
    m = as_symmetric(m)
    max_sweeps = max_sweeps or Config.JACOBI_MAX_SWEEPS

    a = np.array(m.entries, dtype=np.float64)
    n = a.shape[0]
    v = np.eye(n)
    scale = float(np.linalg.norm(a))
    tolerance = Config.JACOBI_TOL * scale

    converged = False
    for sweep in range(max_sweeps):
        off = _off_diagonal_norm(a)
        if off <= tolerance:
            converged = True
            break

        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue

                # Rotation too small to move either diagonal entry
                g = 100.0 * abs(apq)
                if sweep > 3 and abs(a[p, p]) + g == abs(a[p, p]) and abs(a[q, q]) + g == abs(a[q, q]):
                    a[p, q] = a[q, p] = 0.0
                    continue

                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    # theta^2 would overflow
                    t = 1.0 / (2.0 * theta)
                else:
                    t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q

                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0

                vec_p = v[:, p].copy()
                vec_q = v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q

    if not converged:
        off = _off_diagonal_norm(a)
        if off > tolerance:
            logger.error(f"Jacobi eigensolver did not converge for n={n} after {max_sweeps} sweeps")
            raise ConvergenceError(f"Jacobi eigensolver did not converge after {max_sweeps} sweeps", off)

    eigvals = np.diag(a).copy()
    order = np.argsort(eigvals, kind="stable")
    eigvals = eigvals[order]
    v = v[:, order]

    # Sign convention: largest-magnitude component of each eigenvector is non-negative
    lead = np.argmax(np.abs(v), axis=0)
    signs = np.where(v[lead, np.arange(n)] < 0, -1.0, 1.0)
    v = v * signs

    return SpectralDecomposition(_readonly(eigvals), _readonly(np.ascontiguousarray(v)))


def reconstruct(d: SpectralDecomposition) -> SymmetricMatrix:
    """U diag(eigvals) U^T"""
    u = d.eigvecs
    return SymmetricMatrix.from_array((u * d.eigvals) @ u.T)


def frobenius_distance(a: ArrayLike, b: ArrayLike) -> float:
    """||a - b||_F for two matrices of equal shape"""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"Shape mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def subspace_alignment(reference: np.ndarray, candidate: np.ndarray) -> float:
    """
    Worst-case alignment between two orthonormal bases of the same space

    For every column of `candidate` the largest |<u_ref, u_cand>| over the reference
    columns is taken; the minimum over candidates is returned. 1.0 means every
    candidate vector lies on a reference axis.
    """
    reference = np.asarray(reference, dtype=np.float64)
    candidate = np.asarray(candidate, dtype=np.float64)
    if reference.shape != candidate.shape:
        raise ShapeError(f"Shape mismatch: {reference.shape} vs {candidate.shape}")
    overlaps = np.abs(reference.T @ candidate)
    return float(np.min(np.max(overlaps, axis=0)))
