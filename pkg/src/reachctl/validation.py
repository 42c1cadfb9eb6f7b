"""Input validation helpers shared by the geometry, analysis and estimator layers."""

import numpy as np


def as_float_array(value, name, shape=None):
    """Convert to a C-contiguous float64 array, optionally enforcing a shape.

    ``shape`` entries may be ``None`` to leave a dimension free.
    """
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    if shape is not None:
        if arr.ndim != len(shape):
            raise ValueError(f"{name} must be {len(shape)}-dimensional, got shape {arr.shape}")
        for axis, want in enumerate(shape):
            if want is not None and arr.shape[axis] != want:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
    return np.ascontiguousarray(arr)


def as_vector(value, name, size=None):
    arr = as_float_array(value, name)
    arr = arr.reshape(-1)
    if size is not None and arr.size != size:
        raise ValueError(f"{name} must have length {size}, got {arr.size}")
    return arr


def as_matrix(value, name, rows=None, cols=None):
    arr = as_float_array(value, name)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a matrix, got ndim={arr.ndim}")
    if rows is not None and arr.shape[0] != rows:
        raise ValueError(f"{name} must have {rows} rows, got {arr.shape[0]}")
    if cols is not None and arr.shape[1] != cols:
        raise ValueError(f"{name} must have {cols} columns, got {arr.shape[1]}")
    return arr


def check_state_batch(X, n):
    """Validate a batch of query states of dimension ``n``, shape (N, n)."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != n:
        raise ValueError(f"expected states of shape (N, {n}), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("states contain non-finite entries")
    return arr


def readonly(arr):
    """Return the array with its write flag cleared (immutability by contract)."""
    arr.flags.writeable = False
    return arr
