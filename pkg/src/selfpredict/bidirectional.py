"""Paired forward and backward representation dynamics.

A single representation trained on forward prediction can only capture
spectral structure that a symmetric compression sees.  Training two
representations jointly, one predicting successors of the other and one
predicting predecessors, aligns the pair with the chain's singular
subspaces instead, so it reaches the singular value ceiling on chains
where the single dynamics provably cannot.

Everything here assumes a doubly stochastic chain under the uniform state
distribution; that is what makes the reversed process a chain with the same
stationary weights.  Routines raise NotDoublyStochasticError or
InvalidInputError when the assumption fails.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    InvalidInputError,
    NotDoublyStochasticError,
    ShapeMismatchError,
    StepSizeUnderflowError,
)
from .markov import TransitionMatrix, n_step_matrix, validate_distribution
from .metrics import MetricBundle, normalizers
from .dynamics import DynamicsConfig, TrajectoryRecord, covariance_solve, _max_abs_cosine

ORTHONORMAL_TOL = 1e-8
UNIFORM_TOL = 1e-12


@dataclass(frozen=True)
class BidirState:
    """The two representations: left predicts forward, right predicts backward."""

    left: np.ndarray
    right: np.ndarray

    @property
    def k(self) -> int:
        return self.left.shape[1]


def _check_state(state: BidirState, n: int) -> BidirState:
    lv = np.asarray(state.left, dtype=float)
    rv = np.asarray(state.right, dtype=float)
    if lv.ndim != 2 or rv.ndim != 2 or lv.shape != rv.shape:
        raise ShapeMismatchError(
            f"left and right must share a 2d shape, got {np.shape(state.left)} and {np.shape(state.right)}")
    if lv.shape[0] != n:
        raise ShapeMismatchError(f"representations have {lv.shape[0]} rows, chain has {n} states")
    if not 1 <= lv.shape[1] <= n:
        raise InvalidInputError(f"need 1 <= k <= n, got k={lv.shape[1]}")
    return BidirState(lv, rv)


def _require_doubly_stochastic(tm: TransitionMatrix) -> None:
    if not isinstance(tm, TransitionMatrix):
        raise InvalidInputError("expected a TransitionMatrix")
    if not tm.is_doubly_stochastic:
        raise NotDoublyStochasticError(
            "bidirectional dynamics need unit column sums so the reversed chain is stochastic")


def _require_uniform(d, n: int) -> np.ndarray:
    v = validate_distribution(d, n)
    if np.abs(v - 1.0 / n).max() > UNIFORM_TOL:
        raise InvalidInputError("bidirectional dynamics are defined for the uniform distribution")
    return v


def bidir_optimal_predictors(state: BidirState, tm: TransitionMatrix, d):
    """Optimal forward and backward predictors at orthonormal representations.

    Under the module preconditions (doubly stochastic chain, uniform d,
    both representations orthonormal within 1e-8) the normal equations
    collapse to fwd = left^T P right, and the backward predictor is its
    transpose, returned as exactly that by construction.
    """
    _require_doubly_stochastic(tm)
    st = _check_state(state, tm.n)
    _require_uniform(d, tm.n)
    k = st.k
    for name, v in (("left", st.left), ("right", st.right)):
        err = np.abs(v.T @ v - np.eye(k)).max()
        if err > ORTHONORMAL_TOL:
            raise InvalidInputError(
                f"{name} representation deviates from orthonormal by {err:.3e}")
    fwd = st.left.T @ tm.entries @ st.right
    return fwd, fwd.T.copy()


def bidir_ode_rhs(state: BidirState, tm: TransitionMatrix) -> BidirState:
    """Continuous-time flow of the pair under their optimal predictors.

    left' = (I - L L^T) P R fwd^T and right' = (I - R R^T) P^T L fwd with
    fwd = L^T P R (the backward predictor is fwd^T, hence the bare fwd in
    the second leg).
    """
    _require_doubly_stochastic(tm)
    st = _check_state(state, tm.n)
    a = tm.entries
    pr = a @ st.right
    fwd = st.left.T @ pr
    d_left = (pr - st.left @ (st.left.T @ pr)) @ fwd.T
    pl = a.T @ st.left
    d_right = (pl - st.right @ (st.right.T @ pl)) @ fwd
    return BidirState(d_left, d_right)


def _bundle(step_or_time, st: BidirState, a, c0_left, c0_right, svd_norm, resid):
    pred = st.left.T @ a @ st.left
    f = float(np.sum(pred * pred))
    cross = st.left.T @ a @ st.right
    f_tilde = float(np.sum(cross * cross))
    cl = st.left.T @ st.left
    cr = st.right.T @ st.right
    drift = max(float(np.abs(cl - c0_left).max()), float(np.abs(cr - c0_right).max()))
    cos = max(_max_abs_cosine(cl), _max_abs_cosine(cr))
    return TrajectoryRecord(float(step_or_time), MetricBundle(
        f=f, f_ratio=f_tilde / svd_norm, f_tilde=f_tilde,
        covariance_drift=drift, max_abs_cosine=cos, residual=resid))


def _flow_residual(st: BidirState, tm: TransitionMatrix) -> float:
    rhs = bidir_ode_rhs(st, tm)
    return float(np.sqrt(np.sum(rhs.left ** 2) + np.sum(rhs.right ** 2)))


def integrate_bidir(state0: BidirState, tm: TransitionMatrix, t_end: float = 100.0,
                    n_records: int = 100, rel_tol: float = 1e-9, abs_tol: float = 1e-9):
    """Integrate the paired flow; returns (records, final BidirState).

    Records carry f for the left representation alone, f_tilde for the
    pair, and f_ratio as f_tilde over the singular value ceiling, the
    quantity this dynamics is supposed to drive to one.
    """
    _require_doubly_stochastic(tm)
    st = _check_state(state0, tm.n)
    if not (np.isfinite(t_end) and t_end > 0):
        raise InvalidInputError("t_end must be positive and finite")
    if n_records < 1:
        raise InvalidInputError("n_records must be at least 1")
    a = tm.entries
    n, k = st.left.shape
    svd_norm = normalizers(tm, k).svd_norm
    c0_left = st.left.T @ st.left
    c0_right = st.right.T @ st.right
    half = n * k

    def rhs(_t, y):
        lv = y[:half].reshape(n, k)
        rv = y[half:].reshape(n, k)
        pr = a @ rv
        fwd = lv.T @ pr
        dl = (pr - lv @ (lv.T @ pr)) @ fwd.T
        pl = a.T @ lv
        dr = (pl - rv @ (rv.T @ pl)) @ fwd
        return np.concatenate([dl.ravel(), dr.ravel()])

    y0 = np.concatenate([st.left.ravel(), st.right.ravel()])
    t_eval = np.linspace(0.0, t_end, n_records + 1)
    sol = solve_ivp(rhs, (0.0, t_end), y0, method="RK45",
                    rtol=rel_tol, atol=abs_tol, t_eval=t_eval)
    if not sol.success:
        raise StepSizeUnderflowError(f"integration failed: {sol.message}")
    records = []
    for i, t in enumerate(sol.t):
        cur = BidirState(sol.y[:half, i].reshape(n, k), sol.y[half:, i].reshape(n, k))
        records.append(_bundle(t, cur, a, c0_left, c0_right, svd_norm,
                               _flow_residual(cur, tm)))
    final = BidirState(sol.y[:half, -1].reshape(n, k), sol.y[half:, -1].reshape(n, k))
    return records, final


def run_discrete_bidir(state0: BidirState, tm: TransitionMatrix, d, config: DynamicsConfig):
    """Discrete lockstep training of the pair with per-step optimal predictors.

    Both updates are computed from the same pre-step pair and applied
    together.  Predictors come from the k-by-k normal equations (the
    uniform weight cancels), so mild orthonormality drift along the run is
    handled rather than assumed away.  Only the plain configuration is
    supported: semi gradient, optimal predictor, squared loss, no target.
    """
    _require_doubly_stochastic(tm)
    st = _check_state(state0, tm.n)
    _require_uniform(d, tm.n)
    if (config.gradient_mode, config.predictor_mode, config.loss_kind) != ("semi", "optimal", "squared") \
            or config.target_beta is not None:
        raise InvalidInputError(
            "run_discrete_bidir supports semi gradient, optimal predictor, squared loss only")
    tm_run = n_step_matrix(tm, config.n_step) if config.n_step > 1 else tm
    a = tm_run.entries
    n, k = st.left.shape
    svd_norm = normalizers(tm_run, k).svd_norm
    left = st.left.copy()
    right = st.right.copy()
    c0_left = left.T @ left
    c0_right = right.T @ right
    records = [_bundle(0.0, BidirState(left, right), a, c0_left, c0_right, svd_norm,
                       _flow_residual(BidirState(left, right), tm_run))]
    scale = 2.0 * config.eta / n
    for step in range(1, config.iters + 1):
        pr = a @ right
        pl = a.T @ left
        fwd = covariance_solve(left.T @ left, left.T @ pr)
        bwd = covariance_solve(right.T @ right, right.T @ pl)
        d_left = scale * ((pr - left @ fwd) @ fwd.T)
        d_right = scale * ((pl - right @ bwd) @ bwd.T)
        left += d_left
        right += d_right
        if step % config.record_every == 0 or step == config.iters:
            cur = BidirState(left, right)
            records.append(_bundle(float(step), cur, a, c0_left, c0_right, svd_norm,
                                   _flow_residual(cur, tm_run)))
    return records, BidirState(left, right)
