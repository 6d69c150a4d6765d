"""Dense symmetric linear-algebra kernel.

Eigendecomposition, SPD square root, inversion and matrix norms for the
dense symmetric matrices every estimator in this package operates on.
Matrices are plain ``numpy`` arrays of shape ``(p, p)``; construction
helpers enforce exact symmetry so downstream code can rely on it.

All functions are pure and hold no state, so they are safe to call
concurrently from any number of threads.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import InvalidInput, NotPositiveSemiDefinite, SingularMatrix

# Eigenvalues in [-PSD_CLAMP, 0] are treated as exact zeros: they are
# floating-point noise from squaring/symmetrizing, not genuine negativity.
PSD_CLAMP = 1e-10

# Below this smallest eigenvalue a matrix is reported singular instead of
# being inverted into garbage.
TOL_PD = 1e-12


class EigenDecomp(NamedTuple):
    """Spectral decomposition of a symmetric matrix.

    ``values`` are sorted in non-increasing order; ``vectors`` holds the
    matching orthonormal eigenvectors as columns, so that
    ``vectors @ diag(values) @ vectors.T`` reconstructs the input.
    """

    values: np.ndarray
    vectors: np.ndarray


def symmetrize(m: np.ndarray) -> np.ndarray:
    """Return ``(m + m.T) / 2``, which is exactly symmetric in IEEE arithmetic."""
    m = np.asarray(m, dtype=float)
    return (m + m.T) / 2.0


def check_sym(m: np.ndarray, tol: float = 1e-8, name: str = "matrix") -> np.ndarray:
    """Validate that ``m`` is square, finite and symmetric within ``tol``.

    Returns an exactly symmetric copy.  Raises :class:`InvalidInput` on any
    violation.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInput(f"{name} must be square, got shape {m.shape}")
    if m.size == 0:
        raise InvalidInput(f"{name} must have dimension >= 1")
    if not np.all(np.isfinite(m)):
        raise InvalidInput(f"{name} contains non-finite entries")
    asym = np.max(np.abs(m - m.T)) if m.shape[0] > 1 else 0.0
    if asym > tol:
        raise InvalidInput(f"{name} is not symmetric: max |m - m.T| = {asym:.3e}")
    return symmetrize(m)


def sym_eigen(m: np.ndarray) -> EigenDecomp:
    """Eigendecomposition of a symmetric matrix, eigenvalues non-increasing."""
    m = check_sym(m)
    values, vectors = np.linalg.eigh(m)
    return EigenDecomp(values[::-1].copy(), vectors[:, ::-1].copy())


def spd_sqrt(m: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root ``R`` with ``R @ R == m`` up to round-off.

    Eigenvalues in ``[-PSD_CLAMP, 0]`` are clamped to zero; anything below
    raises :class:`NotPositiveSemiDefinite`.
    """
    values, vectors = sym_eigen(m)
    if values[-1] < -PSD_CLAMP:
        raise NotPositiveSemiDefinite(
            f"min eigenvalue {values[-1]:.3e} < -{PSD_CLAMP:.0e}"
        )
    clamped = np.clip(values, 0.0, None)
    return symmetrize((vectors * np.sqrt(clamped)) @ vectors.T)


def spd_inverse(m: np.ndarray) -> np.ndarray:
    """Inverse of a symmetric positive definite matrix.

    Raises :class:`SingularMatrix` when the smallest eigenvalue does not
    exceed ``TOL_PD``.
    """
    values, vectors = sym_eigen(m)
    if values[-1] <= TOL_PD:
        raise SingularMatrix(f"min eigenvalue {values[-1]:.3e} <= {TOL_PD:.0e}")
    return symmetrize((vectors / values) @ vectors.T)


def min_eigenvalue(m: np.ndarray) -> float:
    """Smallest eigenvalue of a symmetric matrix."""
    m = check_sym(m)
    return float(np.linalg.eigvalsh(m)[0])


def frobenius_norm(m: np.ndarray) -> float:
    """Square root of the sum of squared entries."""
    return float(np.sqrt(np.sum(np.square(np.asarray(m, dtype=float)))))


def spectral_norm(m: np.ndarray) -> float:
    """Largest absolute eigenvalue (= largest singular value for symmetric input)."""
    m = check_sym(m)
    return float(np.max(np.abs(np.linalg.eigvalsh(m))))


def max_abs_offdiag(m: np.ndarray) -> float:
    """Maximum absolute off-diagonal entry; zero for a 1x1 matrix."""
    m = check_sym(m)
    if m.shape[0] == 1:
        return 0.0
    off = m - np.diag(np.diag(m))
    return float(np.max(np.abs(off)))


def logdet_pd(m: np.ndarray, name: str = "matrix"):
    """Log-determinant of a symmetric PD matrix; raises SingularMatrix otherwise."""
    m = check_sym(m, name=name)
    sign, ld = np.linalg.slogdet(m)
    if sign <= 0 or not np.isfinite(ld):
        raise SingularMatrix(f"{name} is not positive definite (logdet undefined)")
    return float(ld)
