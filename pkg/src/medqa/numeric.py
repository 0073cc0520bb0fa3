"""Dense numeric helpers shared by every neural module.

Matrices are 2-D float64 numpy arrays (row-major), vectors are 1-D float64
arrays. Everything here is domain-agnostic: affine maps, the two gate
nonlinearities, a masked softmax, and a central-difference gradient oracle
used to verify hand-written backpropagation.

All arithmetic is double precision; gradient checks at 1e-4 tolerance are
not reliable in single precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit


class ShapeError(ValueError):
    """Operand shapes are incompatible."""


def as_vector(x, name: str = "vector") -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ShapeError(f"{name} must be 1-D, got shape {arr.shape}")
    return arr


def as_matrix(x, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {arr.shape}")
    return arr


def affine(weights, x, bias) -> np.ndarray:
    """W @ x + b with explicit shape checking.

    Raises ShapeError naming both operands on any mismatch, and rejects
    non-finite results so downstream code never sees NaN/Inf.
    """
    w = as_matrix(weights, "weights")
    v = as_vector(x, "input")
    b = as_vector(bias, "bias")
    if w.shape[1] != v.shape[0]:
        raise ShapeError(
            f"affine: weights {w.shape} cannot multiply input of length {v.shape[0]}"
        )
    if b.shape[0] != w.shape[0]:
        raise ShapeError(
            f"affine: bias of length {b.shape[0]} does not match weights {w.shape}"
        )
    with np.errstate(over="ignore", invalid="ignore"):
        out = w @ v + b
    if not np.all(np.isfinite(out)):
        raise ValueError("affine produced a non-finite result")
    return out


def elementwise(name: str, x) -> np.ndarray:
    """Apply a named activation ('sigmoid' or 'tanh') componentwise."""
    v = np.asarray(x, dtype=np.float64)
    if name == "sigmoid":
        return expit(v)
    if name == "tanh":
        return np.tanh(v)
    raise ValueError(f"unknown elementwise function {name!r}")


def sigmoid(x) -> np.ndarray:
    return expit(np.asarray(x, dtype=np.float64))


def masked_softmax(scores, mask) -> np.ndarray:
    """Softmax over the unmasked positions; masked outputs are exactly 0.

    Subtracts the unmasked maximum before exponentiating for overflow
    safety. Raises ValueError when every position is masked.
    """
    s = as_vector(scores, "scores")
    m = np.asarray(mask, dtype=bool)
    if m.shape != s.shape:
        raise ShapeError(
            f"masked_softmax: mask of length {m.shape} does not match scores {s.shape}"
        )
    if not m.any():
        raise ValueError("masked_softmax: all positions are masked")
    shifted = np.where(m, s - s[m].max(), -np.inf)
    ex = np.exp(shifted)
    return ex / ex.sum()


def finite_diff_gradient(f, params, epsilon: float = 1e-4) -> np.ndarray:
    """Central-difference gradient of a scalar function over a flat vector.

    The independent oracle for every hand-written backward pass: it never
    shares code with the analytic paths it checks.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    p = as_vector(params, "params").copy()
    grad = np.empty_like(p)
    for i in range(p.size):
        orig = p[i]
        p[i] = orig + epsilon
        f_plus = float(f(p))
        p[i] = orig - epsilon
        f_minus = float(f(p))
        p[i] = orig
        if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
            raise ValueError("finite_diff_gradient: function returned a non-finite value")
        grad[i] = (f_plus - f_minus) / (2.0 * epsilon)
    return grad


@dataclass
class GradientReport:
    """Outcome of comparing one named parameter's analytic vs numeric gradient."""

    name: str
    max_relative_error: float
    analytic: np.ndarray
    numeric: np.ndarray

    @property
    def ok(self) -> bool:
        return self.max_relative_error <= 1e-4


def max_relative_error(analytic, numeric, floor: float = 1e-6) -> float:
    """Componentwise |a-n| / max(|a|, |n|, floor), reduced with max.

    The floor keeps agreement between two near-zero components from being
    reported as a large relative error; mismatches above the floor are
    still caught.
    """
    a = np.asarray(analytic, dtype=np.float64).ravel()
    n = np.asarray(numeric, dtype=np.float64).ravel()
    if a.shape != n.shape:
        raise ShapeError(f"gradient shapes differ: {a.shape} vs {n.shape}")
    denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
    return float(np.max(np.abs(a - n) / denom)) if a.size else 0.0


def check_gradients(f, params, analytic, slices, epsilon: float = 1e-4):
    """Compare an analytic gradient against the finite-difference oracle.

    `slices` is a list of (name, slice) pairs mapping named parameters into
    the flat vector. Returns one GradientReport per name.
    """
    numeric = finite_diff_gradient(f, params, epsilon)
    a = as_vector(analytic, "analytic gradient")
    reports = []
    for name, sl in slices:
        reports.append(
            GradientReport(
                name=name,
                max_relative_error=max_relative_error(a[sl], numeric[sl]),
                analytic=a[sl].copy(),
                numeric=numeric[sl].copy(),
            )
        )
    return reports
