"""Capped-L1 quadratic-surface twin SVM trainer.

Each of the two surfaces solves a nonsmooth capped-L1 problem through a
reweighted sequence of ridge-regularized weighted least squares: weights
are recomputed from the current residuals, then the weighted normal
equations are solved in closed form, either directly in lifted space or
through a Sherman-Morrison-Woodbury factorization of the two smaller
sample-space systems, whichever side is smaller.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .data import Dataset, NormalizationParams, fit_scaler, scale_dataset
from .errors import InvalidInputError, NumericError
from .lifting import LiftingMode, lift_matrix, unpack_weights
from .model import QuadraticSurface, TrainedModel


@dataclass(frozen=True)
class SolverConfig:
    """Hyperparameters of the capped-L1 trainer.

    c1 weighs the L2 regularization term, c2 the slack penalty on the
    opposite class, cap_eps is the saturation threshold of the capped-L1
    loss.  weight_floor guards the reciprocal weights against division
    by zero.
    """

    c1: float = 1.0
    c2: float = 1.0
    cap_eps: float = 1.0
    conv_tol: float = 1e-8
    max_iter: int = 30
    weight_floor: float = 1e-12
    stop_on_objective: bool = False
    branch: str = "auto"  # "auto" | "smw" | "direct"

    def __post_init__(self):
        if min(self.c1, self.c2, self.cap_eps, self.conv_tol, self.weight_floor) <= 0:
            raise InvalidInputError("c1, c2, cap_eps, conv_tol, weight_floor must be > 0")
        if self.max_iter < 1:
            raise InvalidInputError("max_iter must be >= 1")
        if self.branch not in ("auto", "smw", "direct"):
            raise InvalidInputError(f"unknown branch {self.branch!r}")


@dataclass(frozen=True)
class ReweightState:
    """Diagonal reweighting of one subproblem.

    q holds the weights on the subproblem's own-class residuals, u the
    weights on the opposite-class slacks.  (The second subproblem's pair,
    often written (f, g), is just another instance of the same structure.)
    """

    q: np.ndarray
    u: np.ndarray


@dataclass(frozen=True)
class SubproblemReport:
    """Per-surface fit diagnostics.

    final_state holds the reweighting used for the last solve, so the
    returned weight vector satisfies the weighted normal equations built
    from it up to linear-algebra precision.
    """

    objective_trace: np.ndarray
    iterations_used: int
    converged: bool
    branch_used: str
    final_state: ReweightState


@dataclass(frozen=True)
class FitReport:
    pos: SubproblemReport
    neg: SubproblemReport

    @property
    def converged(self) -> bool:
        return self.pos.converged and self.neg.converged


def _capped_weights(residuals: np.ndarray, cap_eps: float, floor: float) -> np.ndarray:
    """Reciprocal weight below the cap (boundary included), cap_eps above it.

    This is the iteratively reweighted rule L'(r)/r for the mixed loss
    L(r) = |r| below the cap and (eps/2) r^2 + eps - eps^3/2 above it:
    L(sqrt(t)) is concave and continuous for eps <= 1, so each weighted
    solve majorizes-and-minimizes that loss.  Keeping a small positive
    weight on saturated residuals retains margin pressure from far-side
    points.  The floor guards the reciprocal against division by zero.
    """
    a = np.abs(residuals)
    return np.where(a <= cap_eps, 1.0 / np.maximum(a, floor), cap_eps)


def compute_weights_pos(w_plus, Zp, Zm, cap_eps, weight_floor=1e-12) -> ReweightState:
    """Weights for the positive-surface subproblem at the current iterate.

    Own-class residuals are w.z_i over the positives; slacks are
    eta_j = 1 + w.z_j over the negatives.
    """
    q = _capped_weights(Zp.T @ w_plus, cap_eps, weight_floor)
    u = _capped_weights(1.0 + Zm.T @ w_plus, cap_eps, weight_floor)
    return ReweightState(q=q, u=u)


def compute_weights_neg(w_minus, Zp, Zm, cap_eps, weight_floor=1e-12) -> ReweightState:
    """Mirror of compute_weights_pos: residuals over the negatives,
    slacks eta_i = 1 - w.z_i over the positives."""
    q = _capped_weights(Zm.T @ w_minus, cap_eps, weight_floor)
    u = _capped_weights(1.0 - Zp.T @ w_minus, cap_eps, weight_floor)
    return ReweightState(q=q, u=u)


def _pick_branch(m_l: int, m_other: int, requested: str) -> str:
    if requested != "auto":
        return requested
    # Strictly greater: at equality the direct solve runs.
    return "smw" if m_l > m_other else "direct"


def _psd_solver(A):
    """Return a solve callable for a symmetric positive definite system.

    The system is positive definite in exact arithmetic (c1 > 0), but
    reciprocal weights spanning many orders of magnitude can push it past
    what Cholesky tolerates in floating point; fall back to a
    least-squares solve in that case.
    """
    try:
        factor = cho_factor(A, lower=True)
        return lambda B: cho_solve(factor, B)
    except LinAlgError:
        return lambda B: np.linalg.lstsq(A, B, rcond=None)[0]


def _solve_weighted(Z_own, Z_other, q, u, c1, c2, sign, branch):
    """Solve (Z_own diag(q) Z_own' + c1 I + c2 Z_other diag(u) Z_other') w
    = sign * c2 * Z_other u, by the requested branch."""
    m_l = Z_own.shape[0]
    rhs_core = Z_other @ u
    if branch == "direct":
        B = (Z_own * q) @ Z_own.T + c2 * (Z_other * u) @ Z_other.T
        B[np.diag_indices(m_l)] += c1
        return sign * c2 * _psd_solver(B)(rhs_core)
    # SMW branch: factor the two sample-space systems instead of the
    # m_l x m_l one.  Y = (c1 I + Z_own diag(q) Z_own')^{-1} applied
    # implicitly through an (m_own x m_own) Cholesky factor.  Columns
    # with zero weight contribute nothing to either low-rank term and
    # would break the diagonal inverses, so they are dropped.
    Z_own = Z_own[:, q > 0]
    q = q[q > 0]
    keep_other = u > 0
    Z_other_k = Z_other[:, keep_other]
    u_k = u[keep_other]
    A = Z_own.T @ Z_own
    A[np.diag_indices(A.shape[0])] += c1 / q
    A_solve = _psd_solver(A)

    def apply_y(B):
        if q.size == 0:
            return B / c1
        return (B - Z_own @ A_solve(Z_own.T @ B)) / c1

    Yv = apply_y(rhs_core)
    if u_k.size == 0:
        return sign * c2 * Yv
    YZ = apply_y(Z_other_k)
    K = Z_other_k.T @ YZ
    K[np.diag_indices(K.shape[0])] += 1.0 / (c2 * u_k)
    K_solve = _psd_solver(K)
    return sign * c2 * (Yv - YZ @ K_solve(Z_other_k.T @ Yv))


def update_w_plus(Zp, Zm, state: ReweightState, cfg: SolverConfig) -> np.ndarray:
    """One closed-form update of the positive-surface weight vector."""
    branch = _pick_branch(Zp.shape[0], Zm.shape[1], cfg.branch)
    return _solve_weighted(Zp, Zm, state.q, state.u, cfg.c1, cfg.c2, -1.0, branch)


def update_w_minus(Zp, Zm, state: ReweightState, cfg: SolverConfig) -> np.ndarray:
    """One closed-form update of the negative-surface weight vector."""
    branch = _pick_branch(Zm.shape[0], Zp.shape[1], cfg.branch)
    return _solve_weighted(Zm, Zp, state.q, state.u, cfg.c1, cfg.c2, +1.0, branch)


def _mixed_loss_sum(values: np.ndarray, cap_eps: float) -> float:
    """Sum of the loss the reweighting scheme descends on: |r| below the
    cap, (eps/2) r^2 + eps - eps^3/2 above it (continuous at |r| = eps)."""
    a = np.abs(values)
    e = cap_eps
    sat = 0.5 * e * a**2 + e - 0.5 * e**3
    return float(np.where(a <= e, a, sat).sum())


def capped_loss_sum(values: np.ndarray, cap_eps: float) -> float:
    """Sum of the capped-L1 loss min(|r|, eps)."""
    return float(np.minimum(np.abs(values), cap_eps).sum())


def objective_plus(w_plus, Zp, Zm, cfg: SolverConfig) -> float:
    """Objective of the positive-surface subproblem (mixed-loss form)."""
    return (
        _mixed_loss_sum(Zp.T @ w_plus, cfg.cap_eps)
        + 0.5 * cfg.c1 * float(w_plus @ w_plus)
        + cfg.c2 * _mixed_loss_sum(1.0 + Zm.T @ w_plus, cfg.cap_eps)
    )


def objective_neg(w_minus, Zp, Zm, cfg: SolverConfig) -> float:
    """Objective of the negative-surface subproblem (mixed-loss form)."""
    return (
        _mixed_loss_sum(Zm.T @ w_minus, cfg.cap_eps)
        + 0.5 * cfg.c1 * float(w_minus @ w_minus)
        + cfg.c2 * _mixed_loss_sum(1.0 - Zp.T @ w_minus, cfg.cap_eps)
    )


def stationarity_residual_plus(w_plus, Zp, Zm, state, cfg) -> float:
    """Norm of the weighted normal-equation gradient at w_plus."""
    grad = (
        Zp @ (state.q * (Zp.T @ w_plus))
        + cfg.c1 * w_plus
        + cfg.c2 * (Zm @ (state.u * (Zm.T @ w_plus + 1.0)))
    )
    return float(np.linalg.norm(grad))


def stationarity_residual_neg(w_minus, Zp, Zm, state, cfg) -> float:
    grad = (
        Zm @ (state.q * (Zm.T @ w_minus))
        + cfg.c1 * w_minus
        - cfg.c2 * (Zp @ (state.u * (1.0 - Zp.T @ w_minus)))
    )
    return float(np.linalg.norm(grad))


def _run_subproblem(weights_fn, update_fn, objective_fn, Zp, Zm, cfg, branch_used):
    m_l = Zp.shape[0]
    w = np.zeros(m_l)
    trace = []
    converged = False
    for t in range(cfg.max_iter):
        state = weights_fn(w, Zp, Zm, cfg.cap_eps, cfg.weight_floor)
        if t == 0:
            # The zero start carries no residual information (own-class
            # reciprocals would all hit the division floor), so the first
            # update is a plain unweighted least-squares step.
            state = ReweightState(q=np.ones_like(state.q), u=np.ones_like(state.u))
        w_new = update_fn(Zp, Zm, state, cfg)
        if not np.isfinite(w_new).all():
            raise NumericError(f"non-finite iterate at iteration {t}")
        obj = objective_fn(w_new, Zp, Zm, cfg)
        if cfg.stop_on_objective and trace:
            converged = abs(trace[-1] - obj) <= cfg.conv_tol * (1.0 + abs(trace[-1]))
        else:
            step = float(np.linalg.norm(w_new - w))
            converged = step <= cfg.conv_tol * (1.0 + float(np.linalg.norm(w)))
        trace.append(obj)
        w = w_new
        if converged:
            break
    return w, SubproblemReport(
        objective_trace=np.array(trace),
        iterations_used=len(trace),
        converged=converged,
        branch_used=branch_used,
        final_state=state,
    )


def fit(
    dataset: Dataset,
    cfg: SolverConfig,
    mode: LiftingMode = LiftingMode.FULL,
    scaler: NormalizationParams | None = None,
):
    """Train the capped-L1 twin classifier; returns (TrainedModel, FitReport).

    When ``scaler`` is None the [-1, 1] rescaling is fit on this dataset;
    passing one in lets callers normalize on a larger split beforehand.
    """
    if dataset.m_pos == 0 or dataset.m_neg == 0:
        raise InvalidInputError("both classes must be nonempty")
    if scaler is None:
        scaler = fit_scaler(dataset)
    scaled = scale_dataset(dataset, scaler)
    Zp = lift_matrix(scaled.X_pos, mode).T
    Zm = lift_matrix(scaled.X_neg, mode).T
    m_l = Zp.shape[0]

    w_pos, rep_pos = _run_subproblem(
        compute_weights_pos, update_w_plus, objective_plus, Zp, Zm, cfg,
        _pick_branch(m_l, Zm.shape[1], cfg.branch),
    )
    w_neg, rep_neg = _run_subproblem(
        compute_weights_neg, update_w_minus, objective_neg, Zp, Zm, cfg,
        _pick_branch(m_l, Zp.shape[1], cfg.branch),
    )

    n = dataset.n
    model = TrainedModel(
        surface_pos=QuadraticSurface(*unpack_weights(w_pos, n, mode)),
        surface_neg=QuadraticSurface(*unpack_weights(w_neg, n, mode)),
        mode=mode,
        scaler=scaler,
        n=n,
    )
    return model, FitReport(pos=rep_pos, neg=rep_neg)
