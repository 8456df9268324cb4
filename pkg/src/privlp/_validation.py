"""Input validation helpers shared by every solver."""

import numbers

import numpy as np
from sklearn.utils.validation import check_array


def check_matrix(A, name="A"):
    """Return ``A`` as a finite 2-d float array with at least one row and column."""
    A = check_array(A, dtype=np.float64, ensure_2d=True, ensure_all_finite=True,
                    input_name=name)
    return np.array(A, dtype=np.float64, copy=True)


def check_vector(v, length=None, name="b"):
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-d, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    if length is not None and v.shape[0] != length:
        raise ValueError(f"{name} has length {v.shape[0]}, expected {length}")
    return v.copy()


def check_distribution(x, tol=1e-9, name="x"):
    x = check_vector(x, name=name)
    if np.any(x < -tol) or abs(x.sum() - 1.0) > tol:
        raise ValueError(f"{name} is not a probability distribution")
    return x


def check_positive(value, name):
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")
    return float(value)


def check_nonnegative(value, name):
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value < 0:
        raise ValueError(f"{name} must be a nonnegative finite number, got {value!r}")
    return float(value)


def check_open_unit(value, name):
    if not isinstance(value, numbers.Real) or not 0 < value < 1:
        raise ValueError(f"{name} must lie in (0, 1), got {value!r}")
    return float(value)


def check_privacy(epsilon, delta):
    return check_positive(epsilon, "epsilon"), check_open_unit(delta, "delta")


def check_random_state(seed):
    """Turn ``seed`` into a ``numpy.random.Generator``.

    ``None`` is rejected on purpose: every run must be reproducible from an
    explicit seed.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        raise ValueError("an explicit seed or Generator is required")
    if isinstance(seed, (numbers.Integral, np.random.SeedSequence)):
        return np.random.default_rng(seed)
    raise TypeError(f"cannot build a Generator from {type(seed).__name__}")


def spawn_generators(seed, n):
    """Independent per-trial generators derived from one master seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]
