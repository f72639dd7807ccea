"""
Dense complex matrix kernels used by the leakage-minimization solver.

Everything here is a pure function of its inputs. Functions that take a
square matrix also accept a stack of matrices with shape ``(..., n, n)``
where noted; this is what lets the solver update every receiver of one
half-iteration with a single LAPACK call.
"""

from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import DimensionError, DomainError, ValidationError

__all__ = [
    "HermitianEigen",
    "hermitian_eig",
    "v_min",
    "v_max",
    "orthonormal_complement",
    "random_semi_unitary",
    "logdet_hpd",
    "solve_hpd",
    "hermitian_part",
    "is_semi_unitary",
]


class HermitianEigen(NamedTuple):
    """Eigenvalues in ascending order and the matching eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray


def _as_square(A, name="A"):
    A = np.asarray(A)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise DimensionError(f"{name} must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValidationError(f"{name} contains non-finite entries")
    return A


def hermitian_part(A):
    """Return ``(A + A^H) / 2`` (works on stacks)."""
    A = np.asarray(A)
    return (A + np.swapaxes(A, -1, -2).conj()) / 2


def hermitian_eig(A):
    """Full eigendecomposition of the Hermitian part of `A`.

    Parameters
    ----------
    A : array_like, shape (..., n, n)
        Square matrix or stack of square matrices. Only ``(A + A^H)/2`` is
        decomposed, so small rounding asymmetries are harmless.

    Returns
    -------
    HermitianEigen
        ``values`` ascending with shape (..., n); ``vectors`` with
        orthonormal columns, column ``i`` paired with ``values[..., i]``.
        Each eigenvector is rotated so that its largest-magnitude entry is
        real and non-negative, which makes the output repeatable.
    """
    A = _as_square(A)
    H = hermitian_part(A)
    if not np.iscomplexobj(H):
        H = H.astype(complex)
    values, vectors = np.linalg.eigh(H)
    # phase convention: largest-magnitude entry of every column real >= 0
    idx = np.argmax(np.abs(vectors), axis=-2)[..., None, :]
    pivot = np.take_along_axis(vectors, idx, axis=-2)
    mag = np.abs(pivot)
    phase = np.where(mag > 0, pivot.conj() / np.where(mag > 0, mag, 1), 1)
    vectors = vectors * phase
    np.put_along_axis(vectors, idx, mag.astype(vectors.dtype), axis=-2)
    return HermitianEigen(values, vectors)


def _check_count(n, b):
    if not (1 <= b <= n):
        raise ValidationError(f"eigenvector count b={b} outside [1, {n}]")


def v_min(A, b):
    """Orthonormal eigenvectors for the `b` smallest eigenvalues of `A`."""
    A = _as_square(A)
    _check_count(A.shape[-1], b)
    return hermitian_eig(A).vectors[..., :b]


def v_max(A, b):
    """Orthonormal eigenvectors for the `b` largest eigenvalues of `A`."""
    A = _as_square(A)
    _check_count(A.shape[-1], b)
    return hermitian_eig(A).vectors[..., -b:]


def is_semi_unitary(U, tol=1e-8):
    """True if every matrix in `U` has orthonormal columns within `tol`."""
    U = np.asarray(U)
    m = U.shape[-1]
    if m == 0:
        return True
    gram = np.swapaxes(U, -1, -2).conj() @ U
    err = np.linalg.norm(gram - np.eye(m), axis=(-2, -1))
    return bool(np.all(err <= tol))


def orthonormal_complement(U):
    """Orthonormal basis of the subspace orthogonal to the columns of `U`.

    Parameters
    ----------
    U : array_like, shape (n, m)
        Matrix with orthonormal columns, ``m < n``.

    Returns
    -------
    ndarray, shape (n, n - m)
    """
    U = np.asarray(U)
    if U.ndim != 2:
        raise DimensionError(f"U must be a matrix, got shape {U.shape}")
    n, m = U.shape
    if m >= n:
        raise DimensionError(f"complement needs m < n, got {n}x{m}")
    if not is_semi_unitary(U, tol=1e-8):
        raise ValidationError("U does not have orthonormal columns")
    # the projector onto the complement has eigenvalue 1 with multiplicity n-m
    proj = np.eye(n) - U @ U.conj().T
    return hermitian_eig(proj).vectors[:, m:]


def random_semi_unitary(rows, cols, rng):
    """Draw a Haar-distributed ``rows x cols`` matrix with orthonormal columns.

    QR of an i.i.d. complex Gaussian matrix, with the phases of ``R``'s
    diagonal folded back into ``Q`` so the distribution is uniform.
    """
    if cols > rows:
        raise DimensionError(f"cols={cols} exceeds rows={rows}")
    if cols < 1:
        raise DimensionError("cols must be at least 1")
    Z = (rng.standard_normal((rows, cols))
         + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R)
    mag = np.abs(d)
    Q = Q * np.where(mag > 0, d / np.where(mag > 0, mag, 1), 1)
    return Q


def _hpd_eigenvalues(A):
    A = _as_square(A)
    if A.ndim != 2:
        raise DimensionError("expected a single matrix")
    lam = np.linalg.eigvalsh(hermitian_part(A))
    scale = max(1.0, float(np.abs(lam).max()) if lam.size else 0.0)
    if lam[0] <= 1e-12 * scale:
        raise DomainError(
            f"matrix is not positive definite (min eigenvalue {lam[0]:.3e})",
            min_eigenvalue=float(lam[0]))
    return lam


def logdet_hpd(A):
    """Base-2 log-determinant of a Hermitian positive-definite matrix."""
    lam = _hpd_eigenvalues(A)
    return float(np.sum(np.log2(lam)))


def solve_hpd(A, B):
    """Solve ``A X = B`` for Hermitian positive-definite `A`."""
    A = np.asarray(A)
    B = np.asarray(B)
    _hpd_eigenvalues(A)
    if B.shape[0] != A.shape[0]:
        raise DimensionError(f"shapes {A.shape} and {B.shape} do not match")
    factor = scipy.linalg.cho_factor(hermitian_part(A), lower=True)
    return scipy.linalg.cho_solve(factor, B)
