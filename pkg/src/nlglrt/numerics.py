"""Complex-matrix primitives used by the detector.

Matrices are plain ``numpy`` ``complex128`` arrays; columns are time samples.
"""
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import DimensionMismatch, NonSquare, NotPositiveDefinite


@dataclass(frozen=True)
class HpdInverseOptions:
    """Diagonal loading applied before factorization.

    With ``relative=True`` the added value is ``loading_epsilon`` times the mean
    diagonal of the matrix being inverted, which keeps the loading scale-free
    when interferer power dwarfs the noise floor.
    """

    loading_epsilon: float = 0.0
    relative: bool = False

    def __post_init__(self):
        if not self.loading_epsilon >= 0.0:
            raise ValueError(f"loading_epsilon must be >= 0, got {self.loading_epsilon}")


EXACT = HpdInverseOptions()
PIPELINE_LOADING = HpdInverseOptions(loading_epsilon=1e-9, relative=True)


def as_complex_matrix(a, name="matrix"):
    """Validate and convert ``a`` to a finite 2-D ``complex128`` array."""
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def hermitian(a):
    """Conjugate transpose."""
    return as_complex_matrix(a).conj().T.copy()


def gram(a):
    """``A A^H``: Hermitian positive semidefinite, real non-negative diagonal."""
    arr = np.ascontiguousarray(as_complex_matrix(a))
    return kernels().gram(arr)


def hpd_inverse(r, opts=EXACT):
    """Inverse of ``R + eps I`` through a Cholesky factorization.

    Raises ``NotPositiveDefinite`` when the loaded matrix cannot be factored;
    upstream this usually means fewer kept samples than antennas.
    """
    arr = np.ascontiguousarray(as_complex_matrix(r))
    if arr.shape[0] != arr.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {arr.shape}")
    inv, status = kernels().hpd_inverse(arr, float(opts.loading_epsilon), bool(opts.relative))
    if status:
        raise NotPositiveDefinite(
            f"{arr.shape[0]}x{arr.shape[0]} matrix is not positive definite "
            f"(loading_epsilon={opts.loading_epsilon}, relative={opts.relative})"
        )
    return inv


def trace(a):
    arr = as_complex_matrix(a)
    if arr.shape[0] != arr.shape[1]:
        raise NonSquare(f"trace needs a square matrix, got shape {arr.shape}")
    return complex(np.trace(arr))
