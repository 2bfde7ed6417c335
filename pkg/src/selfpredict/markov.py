"""Tabular Markov chains: construction, generation, and spectral structure.

A chain lives in a TransitionMatrix, which validates row stochasticity on
construction and measures two structural flags (symmetry, unit column sums)
at a fixed tolerance of 1e-12.  Downstream dynamics branch on those flags
rather than re-deriving them.

Spectral conventions used everywhere in the package:

* values are ordered by descending magnitude, ties broken by descending
  signed value, then by original position;
* each vector is sign-fixed so its first component larger than 1e-12 in
  magnitude is positive, and singular vector pairs flip together so the
  factorization is preserved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidInputError,
    NonConvergenceError,
    NotSymmetricError,
)

STOCHASTIC_TOL = 1e-12
FLAG_TOL = 1e-12
SIGN_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Row-stochastic matrix with precomputed structural flags."""

    entries: np.ndarray
    is_symmetric: bool
    is_doubly_stochastic: bool

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def from_entries(cls, entries) -> "TransitionMatrix":
        """Validate and wrap a raw array.

        Requires a finite square matrix with nonnegative entries whose rows
        sum to one within 1e-12.  The stored array is a read-only copy.
        """
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InvalidInputError(f"expected a square matrix, got shape {a.shape}")
        if a.shape[0] < 1:
            raise InvalidInputError("matrix must have at least one state")
        if not np.all(np.isfinite(a)):
            raise InvalidInputError("matrix entries must be finite")
        if np.any(a < 0):
            raise InvalidInputError("matrix entries must be nonnegative")
        row_err = np.abs(a.sum(axis=1) - 1.0).max()
        if row_err > STOCHASTIC_TOL:
            raise InvalidInputError(f"rows must sum to 1 within {STOCHASTIC_TOL}, worst error {row_err:.3e}")
        sym = bool(np.abs(a - a.T).max() <= FLAG_TOL)
        ds = bool(np.abs(a.sum(axis=0) - 1.0).max() <= FLAG_TOL)
        a.setflags(write=False)
        return cls(a, sym, ds)


def sinkhorn_normalize(raw, tol: float = 1e-12, max_iters: int = 100_000) -> TransitionMatrix:
    """Project a nonnegative matrix onto the doubly stochastic set.

    Alternates row normalization with column normalization until every row
    and column sum is within tol of one, then applies one last row
    normalization so the result is row-stochastic to machine precision.
    Zero entries are fine (a permutation matrix passes through untouched);
    negative entries and all-zero rows or columns are rejected, and hitting
    max_iters raises NonConvergenceError.
    """
    a = np.array(raw, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("matrix entries must be finite")
    if np.any(a < 0):
        raise InvalidInputError("matrix entries must be nonnegative")
    if np.any(a.sum(axis=1) == 0.0) or np.any(a.sum(axis=0) == 0.0):
        raise InvalidInputError("matrix must have no all-zero row or column")

    for _ in range(max_iters):
        a /= a.sum(axis=1, keepdims=True)
        a /= a.sum(axis=0, keepdims=True)
        residual = max(
            np.abs(a.sum(axis=1) - 1.0).max(),
            np.abs(a.sum(axis=0) - 1.0).max(),
        )
        if residual <= tol:
            a /= a.sum(axis=1, keepdims=True)
            return TransitionMatrix.from_entries(a)
    raise NonConvergenceError(
        f"alternating normalization still above tol={tol} after {max_iters} iterations"
    )


def gen_doubly_stochastic(n: int, seed: int, alpha="random") -> TransitionMatrix:
    """Random doubly stochastic chain of size n.

    Draws a uniform random matrix, projects it with sinkhorn_normalize, and
    mixes in a random permutation matrix: alpha * projected + (1 - alpha) *
    permutation.  With the default alpha="random" the weight is drawn
    uniformly from [0, 1); a float in [0, 1] pins it.  Draw order from the
    seeded generator is fixed (raw matrix, permutation, then alpha) so the
    output is reproducible per (n, seed).
    """
    if n < 1:
        raise InvalidInputError("n must be at least 1")
    rng = np.random.default_rng(seed)
    base = sinkhorn_normalize(rng.random((n, n)))
    perm = rng.permutation(n)
    if isinstance(alpha, str):
        if alpha != "random":
            raise InvalidInputError(f"alpha must be a float or 'random', got {alpha!r}")
        alpha = float(rng.uniform())
    else:
        alpha = float(alpha)
        if not 0.0 <= alpha <= 1.0:
            raise InvalidInputError(f"alpha must lie in [0, 1], got {alpha}")
    out = alpha * base.entries
    out[np.arange(n), perm] += 1.0 - alpha
    return TransitionMatrix.from_entries(out)


def gen_symmetric(n: int, seed: int) -> TransitionMatrix:
    """Random symmetric doubly stochastic chain: project, then average with the transpose."""
    if n < 1:
        raise InvalidInputError("n must be at least 1")
    rng = np.random.default_rng(seed)
    base = sinkhorn_normalize(rng.random((n, n))).entries
    return TransitionMatrix.from_entries(0.5 * (base + base.T))


def fixed_example_2x2() -> TransitionMatrix:
    """Two-state symmetric chain with eigenvalues 1 and -0.8."""
    return TransitionMatrix.from_entries([[0.1, 0.9], [0.9, 0.1]])


def fixed_example_3x3() -> TransitionMatrix:
    """Three-state doubly stochastic chain that is far from symmetric.

    Its singular values are 1, 1, 0 while its eigenvalues are 1, -0.5, 0,
    which is what makes it useful as a stress case: rankings by eigenpairs
    and by singular pairs disagree.
    """
    return TransitionMatrix.from_entries([
        [0.0, 0.5, 0.5],
        [0.0, 0.5, 0.5],
        [1.0, 0.0, 0.0],
    ])


@dataclass(frozen=True)
class SpectralSummary:
    """Ordered, sign-fixed spectral factorization of a transition matrix.

    For kind="eigen" the columns of left_vectors and right_vectors coincide
    (orthonormal eigenbasis of a symmetric matrix).  For kind="svd" they are
    the left and right singular vectors and values holds singular values.
    """

    kind: str
    values: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray


def _canonical_order(values: np.ndarray) -> np.ndarray:
    idx = np.arange(values.shape[0])
    return np.lexsort((idx, -values, -np.abs(values)))


def _fix_signs(vectors: np.ndarray, partners: np.ndarray | None = None) -> None:
    """Flip columns in place so each leads with a positive entry.

    partners, when given, is a distinct matrix whose columns flip together
    with vectors so a joint factorization stays intact.
    """
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        big = np.nonzero(np.abs(col) > SIGN_TOL)[0]
        if big.size and col[big[0]] < 0:
            vectors[:, j] = -col
            if partners is not None:
                partners[:, j] = -partners[:, j]


def spectral(tm: TransitionMatrix, kind: str = "eigen") -> SpectralSummary:
    """Eigen or singular value decomposition under the package conventions.

    kind="eigen" requires tm.is_symmetric (raises NotSymmetricError
    otherwise) and returns a real orthonormal eigenbasis.  kind="svd" works
    for any chain.  Both apply the module-level ordering and sign rules.
    """
    a = tm.entries
    if kind == "eigen":
        if not tm.is_symmetric:
            raise NotSymmetricError("eigen decomposition here is defined for symmetric chains only")
        w, v = np.linalg.eigh(a)
        order = _canonical_order(w)
        w = w[order]
        v = v[:, order].copy()
        _fix_signs(v)
        return SpectralSummary("eigen", w, v, v)
    if kind == "svd":
        u, s, vt = np.linalg.svd(a)
        order = _canonical_order(s)
        s = s[order]
        u = u[:, order].copy()
        v = vt.T[:, order].copy()
        _fix_signs(u, v)
        return SpectralSummary("svd", s, u, v)
    raise InvalidInputError(f"kind must be 'eigen' or 'svd', got {kind!r}")


def n_step_matrix(tm: TransitionMatrix, n_steps: int) -> TransitionMatrix:
    """The chain composed with itself n_steps times."""
    if n_steps < 1:
        raise InvalidInputError("n_steps must be at least 1")
    return TransitionMatrix.from_entries(np.linalg.matrix_power(tm.entries, n_steps))


def uniform_distribution(n: int) -> np.ndarray:
    """Uniform state distribution on n states."""
    if n < 1:
        raise InvalidInputError("n must be at least 1")
    return np.full(n, 1.0 / n)


def validate_distribution(d, n: int | None = None) -> np.ndarray:
    """Check that d is a probability vector (and optionally has length n)."""
    v = np.array(d, dtype=float)
    if v.ndim != 1:
        raise InvalidInputError(f"distribution must be one-dimensional, got shape {v.shape}")
    if n is not None and v.shape[0] != n:
        raise InvalidInputError(f"distribution has length {v.shape[0]}, expected {n}")
    if not np.all(np.isfinite(v)):
        raise InvalidInputError("distribution entries must be finite")
    if np.any(v < 0):
        raise InvalidInputError("distribution entries must be nonnegative")
    if abs(v.sum() - 1.0) > STOCHASTIC_TOL:
        raise InvalidInputError(f"distribution must sum to 1 within {STOCHASTIC_TOL}")
    return v
