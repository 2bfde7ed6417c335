"""Objectives, normalizers, and collapse diagnostics for trajectories."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, ShapeMismatchError
from .markov import TransitionMatrix, spectral

# Column norms below this are treated as fully collapsed.
ZERO_NORM_FLOOR = 1e-300


def _matrix(p) -> np.ndarray:
    if isinstance(p, TransitionMatrix):
        return p.entries
    a = np.asarray(p, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {a.shape}")
    return a


def _check_rep(phi, n: int, name: str = "phi") -> np.ndarray:
    v = np.asarray(phi, dtype=float)
    if v.ndim != 2:
        raise ShapeMismatchError(f"{name} must be two-dimensional, got shape {v.shape}")
    if v.shape[0] != n:
        raise ShapeMismatchError(f"{name} has {v.shape[0]} rows, chain has {n} states")
    return v


def trace_objective(phi, p) -> float:
    """Squared Frobenius norm of the compressed chain phi^T P phi."""
    a = _matrix(p)
    v = _check_rep(phi, a.shape[0])
    m = v.T @ a @ v
    return float(np.sum(m * m))


def svd_trace_objective(left, right, p) -> float:
    """Squared Frobenius norm of left^T P right for a representation pair."""
    a = _matrix(p)
    lv = _check_rep(left, a.shape[0], "left")
    rv = _check_rep(right, a.shape[0], "right")
    if lv.shape[1] != rv.shape[1]:
        raise ShapeMismatchError("left and right must have the same number of columns")
    m = lv.T @ a @ rv
    return float(np.sum(m * m))


@dataclass(frozen=True)
class Normalizers:
    """Best trace objectives achievable with k orthonormal columns.

    eigen_norm is the single-representation ceiling (sum of the k largest
    squared eigenvalues); it is None when the chain is not symmetric, since
    only then does the package define a real eigenbasis.  svd_norm is the
    paired-representation ceiling (sum of the k largest squared singular
    values) and always exists.
    """

    eigen_norm: float | None
    svd_norm: float


def normalizers(tm: TransitionMatrix, k: int) -> Normalizers:
    if not 1 <= k <= tm.n:
        raise InvalidInputError(f"k must lie in [1, {tm.n}], got {k}")
    s = spectral(tm, "svd").values[:k]
    svd_norm = float(np.sum(s * s))
    eigen_norm = None
    if tm.is_symmetric:
        w = spectral(tm, "eigen").values[:k]
        eigen_norm = float(np.sum(w * w))
    return Normalizers(eigen_norm, svd_norm)


def reference_normalizer(tm: TransitionMatrix, k: int) -> float:
    """The normalizer trajectories are reported against.

    Symmetric chains use the eigenvalue ceiling, everything else the
    singular value ceiling, matching how ratio columns are defined in
    scenario output.
    """
    norms = normalizers(tm, k)
    return norms.eigen_norm if norms.eigen_norm is not None else norms.svd_norm


@dataclass(frozen=True)
class CollapseMetrics:
    covariance_drift: float
    max_abs_cosine: float


def collapse_metrics(phi, phi_init) -> CollapseMetrics:
    """Covariance drift and worst pairwise column alignment.

    Drift is the max absolute entry of phi^T phi - phi_init^T phi_init.
    Alignment is the largest absolute cosine between distinct columns; with
    a single column it is 0 by convention, and any numerically zero column
    reports 1 (total collapse).
    """
    v = np.asarray(phi, dtype=float)
    v0 = np.asarray(phi_init, dtype=float)
    if v.shape != v0.shape or v.ndim != 2:
        raise ShapeMismatchError(
            f"phi and phi_init must share a 2d shape, got {v.shape} and {v0.shape}")
    c = v.T @ v
    drift = float(np.abs(c - v0.T @ v0).max())
    k = v.shape[1]
    if k == 1:
        return CollapseMetrics(drift, 0.0)
    col_norms = np.sqrt(np.diag(c))
    if np.any(col_norms < ZERO_NORM_FLOOR):
        return CollapseMetrics(drift, 1.0)
    cos = c / (col_norms[:, None] * col_norms[None, :])
    off = np.abs(cos[~np.eye(k, dtype=bool)])
    return CollapseMetrics(drift, float(off.max()))


@dataclass(frozen=True)
class MetricBundle:
    """One row of trajectory diagnostics.

    f_tilde is populated only for paired (bidirectional) runs; f_ratio is f
    over the matched normalizer for single runs and f_tilde over the
    singular value ceiling for paired runs.
    """

    f: float
    f_ratio: float
    f_tilde: float | None
    covariance_drift: float
    max_abs_cosine: float
    residual: float
