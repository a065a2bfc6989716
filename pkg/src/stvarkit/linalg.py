"""Dense matrix kernels for small systems.

Everything here operates on plain row-major ``numpy`` arrays and stays in
the d*p <= ~20 regime, so O(n^3) LAPACK routines are used throughout.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError, SingularMatrixError

# |det| relative to the product of row norms below this is treated as singular.
SINGULARITY_RTOL = 1e-12


def _as_square(m) -> np.ndarray:
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ShapeError("matrix contains non-finite entries")
    return a


def eigenvalues(m) -> np.ndarray:
    """All eigenvalues (with multiplicity) of a real square matrix."""
    a = _as_square(m)
    return np.linalg.eigvals(a)


def spectral_radius(m) -> float:
    """Largest eigenvalue modulus of a square matrix."""
    return float(np.max(np.abs(eigenvalues(m))))


def det(m) -> float:
    """Determinant via pivoted LU, sign included."""
    a = _as_square(m)
    return float(np.linalg.det(a))


def row_scale(m: np.ndarray) -> float:
    """Product of row norms; Hadamard-style magnitude scale for |det|."""
    norms = np.sqrt((np.asarray(m, dtype=float) ** 2).sum(axis=-1))
    return float(np.prod(norms))


def is_singular(m, rtol: float = SINGULARITY_RTOL) -> bool:
    """True when |det(m)| is negligible relative to the row-norm product."""
    a = _as_square(m)
    scale = row_scale(a)
    if scale == 0.0:
        return True
    return abs(np.linalg.det(a)) <= rtol * scale


def solve(m, rhs) -> np.ndarray:
    """Solve m @ x = rhs, rejecting systems singular to working precision."""
    a = _as_square(m)
    b = np.asarray(rhs, dtype=float)
    if b.shape[0] != a.shape[0]:
        raise ShapeError(f"rhs has {b.shape[0]} rows, matrix has {a.shape[0]}")
    if is_singular(a):
        raise SingularMatrixError("matrix singular to working precision")
    return np.linalg.solve(a, b)
