"""Dense symmetric linear algebra with explicit failure modes.

Thin wrappers around LAPACK (via numpy/scipy) that pin down the
tolerances the rest of the package relies on: symmetry is checked before
any eigendecomposition, and inversion refuses matrices whose LU pivots
fall below a relative threshold instead of returning garbage.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NonSymmetric, Singular

SYMMETRY_RTOL = 1e-12
PIVOT_RTOL = 1e-12
RANK_RTOL = 1e-10


def as_matrix(m) -> np.ndarray:
    """Coerce to a 2-d float array, rejecting non-finite entries."""
    a = np.asarray(m, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got array of shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def as_square(m) -> np.ndarray:
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition of a symmetric matrix.

    eigenvalues are ascending; eigenvectors[:, i] pairs with
    eigenvalues[i] and the columns are orthonormal.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def smallest(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def largest(self) -> float:
        return float(self.eigenvalues[-1])

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


def eig_sym(m) -> Spectrum:
    """Full spectrum of a symmetric matrix, eigenvalues ascending.

    Raises NonSymmetric when the asymmetry exceeds SYMMETRY_RTOL relative
    to the largest entry.
    """
    a = as_square(m)
    scale = max(1.0, float(np.abs(a).max()) if a.size else 0.0)
    if float(np.abs(a - a.T).max() if a.size else 0.0) > SYMMETRY_RTOL * scale:
        raise NonSymmetric("matrix is not symmetric within tolerance")
    # symmetrize so roundoff in the input cannot leak into LAPACK
    w, v = np.linalg.eigh(0.5 * (a + a.T))
    return Spectrum(eigenvalues=w, eigenvectors=v)


def inverse(m, pivot_tol: float = PIVOT_RTOL) -> np.ndarray:
    """Invert via LU with partial pivoting.

    Raises Singular when any pivot of U falls below
    pivot_tol * max|entry|, which is the package-wide notion of
    numerically singular.
    """
    a = as_square(m)
    n = a.shape[0]
    if n == 0:
        return a.copy()
    scale = float(np.abs(a).max())
    if scale == 0.0:
        raise Singular("zero matrix is not invertible")
    with warnings.catch_warnings():
        # exact singularity is reported through the pivot check below
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.min() < pivot_tol * scale:
        raise Singular(
            f"pivot {pivots.min():.3e} below threshold {pivot_tol * scale:.3e}"
        )
    return scipy.linalg.lu_solve((lu, piv), np.eye(n), check_finite=False)


def spectral_norm(m) -> float:
    """Largest singular value."""
    a = as_matrix(m)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def numeric_rank(m, tol: float | None = None) -> int:
    """Number of singular values above tol (default RANK_RTOL * sigma_max)."""
    a = as_matrix(m)
    if a.size == 0:
        return 0
    s = scipy.linalg.svdvals(a)
    if s[0] == 0.0:
        return 0
    if tol is None:
        tol = RANK_RTOL * s[0]
    return int(np.count_nonzero(s > tol))
