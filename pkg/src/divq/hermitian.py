"""Dense complex Hermitian matrices and positive-semidefiniteness tests.

Two independent tests are provided:

* ``sylvester_psd`` -- the semidefinite Sylvester criterion: a Hermitian
  matrix is positive semidefinite if and only if *all* principal minors
  (one for each nonempty subset of row/column indices, 2^n - 1 in total)
  are nonnegative.  Note that the definite-case shortcut (leading minors
  only) is not sufficient on the PSD boundary.
* ``eigen_psd`` -- the spectral test: the smallest eigenvalue must be
  nonnegative.

The two must agree outside a small tolerance band; the test suite drives
them against each other on randomized inputs.
"""

from __future__ import annotations

from itertools import combinations
from typing import NamedTuple, Optional

import numpy as np

__all__ = [
    "HERMITICITY_TOL",
    "MAX_MINOR_DIM",
    "MinorWitness",
    "SylvesterResult",
    "EigenResult",
    "hermitian_part",
    "require_hermitian",
    "sylvester_psd",
    "eigen_psd",
    "principal_minors_3x3",
]

# Absolute per-entry tolerance for the Hermiticity contract.
HERMITICITY_TOL = 1e-10

# 2^n - 1 principal minors are enumerated; past n = 8 this is no longer
# reasonable, so larger inputs are rejected.
MAX_MINOR_DIM = 8


class MinorWitness(NamedTuple):
    """A violating principal minor: the index subset and its determinant."""

    indices: tuple
    value: float


class SylvesterResult(NamedTuple):
    is_psd: bool
    witness: Optional[MinorWitness]


class EigenResult(NamedTuple):
    is_psd: bool
    min_eigenvalue: float


def hermitian_part(matrix: np.ndarray) -> np.ndarray:
    """Return (A + A^dagger)/2."""
    matrix = np.asarray(matrix, dtype=np.complex128)
    return 0.5 * (matrix + matrix.conj().T)


def require_hermitian(matrix: np.ndarray, tol: float = HERMITICITY_TOL,
                      name: str = "matrix") -> np.ndarray:
    """Validate the Hermiticity contract and return the Hermitian part.

    Checks that the input is a finite square matrix of dimension >= 1 with
    ``|M[i, j] - conj(M[j, i])| <= tol`` for every entry (which covers the
    requirement that diagonal imaginary parts vanish).  The returned matrix
    is exactly Hermitian, so downstream spectral routines see a clean input.
    """
    M = np.asarray(matrix, dtype=np.complex128)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square, got shape {M.shape}")
    if M.shape[0] == 0:
        raise ValueError(f"{name} must have dimension >= 1")
    if not np.all(np.isfinite(M.view(np.float64))):
        raise ValueError(f"{name} contains non-finite entries")
    defect = np.max(np.abs(M - M.conj().T))
    if defect > tol:
        raise ValueError(
            f"{name} is not Hermitian within tolerance {tol:g} "
            f"(max defect {defect:g})")
    return hermitian_part(M)


def sylvester_psd(matrix: np.ndarray, tol: float = 1e-9) -> SylvesterResult:
    """Semidefinite Sylvester test: all 2^n - 1 principal minors >= 0.

    Minors are visited by subset size and, within each size, in
    lexicographic index order; the witness reports the first violation in
    that order.  Comparisons are scale-aware: a minor of order k is
    accepted when it is >= -tol * s^k, where s is the largest absolute
    entry of the matrix (a k-th order minor scales like s^k).
    """
    M = require_hermitian(matrix)
    n = M.shape[0]
    if n > MAX_MINOR_DIM:
        raise ValueError(
            f"dimension {n} exceeds the minor-enumeration cap {MAX_MINOR_DIM}; "
            "use eigen_psd instead")
    scale = float(np.max(np.abs(M)))
    for k in range(1, n + 1):
        subsets = list(combinations(range(n), k))
        idx = np.array(subsets)
        blocks = M[idx[:, :, None], idx[:, None, :]]
        minors = np.linalg.det(blocks).real if k > 1 else blocks[:, 0, 0].real
        bound = -tol * scale**k
        bad = np.nonzero(minors < bound)[0]
        if bad.size:
            first = int(bad[0])
            return SylvesterResult(False, MinorWitness(subsets[first],
                                                       float(minors[first])))
    return SylvesterResult(True, None)


def eigen_psd(matrix: np.ndarray, tol: float = 1e-9) -> EigenResult:
    """Spectral PSD test: smallest eigenvalue >= -tol (absolute)."""
    M = require_hermitian(matrix)
    try:
        eigenvalues = np.linalg.eigvalsh(M)
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError(f"eigenvalue iteration failed: {exc}") from exc
    lo = float(eigenvalues[0])
    return EigenResult(lo >= -tol, lo)


def principal_minors_3x3(matrix: np.ndarray) -> list:
    """The 7 principal minors of a 3x3 Hermitian matrix.

    Order: the three diagonal entries M00, M11, M22; the three order-2
    minors for index pairs (0,1), (0,2), (1,2); then the full determinant.
    """
    M = require_hermitian(matrix)
    if M.shape[0] != 3:
        raise ValueError(f"expected a 3x3 matrix, got {M.shape}")
    a, b, c = M[0, 0].real, M[1, 1].real, M[2, 2].real
    m01 = a * b - abs(M[0, 1])**2
    m02 = a * c - abs(M[0, 2])**2
    m12 = b * c - abs(M[1, 2])**2
    det = float(np.linalg.det(M).real)
    return [a, b, c, m01, m02, m12, det]
