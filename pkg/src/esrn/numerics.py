"""Dense float64 kernels and elementwise nonlinearities.

Everything here operates on C-contiguous numpy arrays of dtype float64.
Matrices are row-major 2-d arrays, vectors are 1-d arrays.
"""

import numpy as np
from scipy.special import expit

NONLINS = ("sigmoid", "tanh")

# max |f'(x)| per nonlinearity: sigmoid peaks at 1/4 (x=0), tanh at 1 (x=0)
_GAMMA = {"sigmoid": 0.25, "tanh": 1.0}


def as_matrix(a):
    """Coerce to a C-contiguous float64 2-d array."""
    m = np.ascontiguousarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d array, got ndim={m.ndim}")
    return m


def as_vector(a):
    """Coerce to a C-contiguous float64 1-d array."""
    v = np.ascontiguousarray(a, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-d array, got ndim={v.ndim}")
    return v


def check_finite(a, what="array"):
    if not np.all(np.isfinite(a)):
        raise FloatingPointError(f"non-finite entries in {what}")
    return a


def matvec(A, x):
    """Matrix-vector product with a dimension check."""
    A = as_matrix(A)
    x = as_vector(x)
    if A.shape[1] != x.shape[0]:
        raise ValueError(
            f"matvec dimension mismatch: {A.shape[0]}x{A.shape[1]} @ {x.shape[0]}"
        )
    return A @ x


def inf_norm(A):
    """Matrix infinity norm: maximum absolute row sum."""
    A = as_matrix(A)
    if A.size == 0:
        raise ValueError("inf_norm of an empty matrix")
    return float(np.abs(A).sum(axis=1).max())


def row_l1(A, i):
    """l1 norm of row i of A."""
    A = as_matrix(A)
    if not (0 <= i < A.shape[0]):
        raise ValueError(f"row index {i} out of range for {A.shape[0]} rows")
    return float(np.abs(A[i]).sum())


def apply_nonlin(kind, x):
    """Elementwise sigmoid or tanh."""
    x = np.asarray(x, dtype=np.float64)
    if kind == "sigmoid":
        return expit(x)
    if kind == "tanh":
        return np.tanh(x)
    raise ValueError(f"unknown nonlinearity {kind!r}")


def nonlin_deriv(kind, x):
    """Elementwise derivative f'(x), i.e. the diagonal of D_f."""
    x = np.asarray(x, dtype=np.float64)
    if kind == "sigmoid":
        s = expit(x)
        return s * (1.0 - s)
    if kind == "tanh":
        t = np.tanh(x)
        return 1.0 - t * t
    raise ValueError(f"unknown nonlinearity {kind!r}")


def gamma_of(kind):
    """Maximum absolute derivative of the nonlinearity."""
    try:
        return _GAMMA[kind]
    except KeyError:
        raise ValueError(f"unknown nonlinearity {kind!r}") from None
