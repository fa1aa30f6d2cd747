"""Damped least-squares parameter search with line search.

The objective is supplied as a residual function r(p); the scalar cost is
C = r.r and its gradient is assembled as 2 J^T r from a central-difference
Jacobian.  Steps solve the damped normal equations

    dp = -alpha [J^T J + sigma I]^(-1) grad C

with sigma multiplied up on rejected steps and down on accepted ones, and
alpha picked by a backtracking line search that keeps the best candidate
(plain first-decrease acceptance stalls: with grad C = 2 J^T r the
undamped full step overshoots the Gauss-Newton point by a factor of two,
which still decreases the cost, so alpha near one half must stay
reachable).

Everything is deterministic: probe order, reductions and the thread-pool
Jacobian assembly are fixed, so identical inputs give bit-identical
results at any thread count.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConfigurationError, EvaluationError, StepFailure

_SIGMA_MAX = 1e18
_SIGMA_MIN = 1e-15

TERMINATION_PARAM = "param-tol"
TERMINATION_COST = "cost-tol"
TERMINATION_ERROR = "error-tol"
TERMINATION_MAX_ITER = "max-iter"


@dataclass(frozen=True)
class OptimizerConfig:
    eps_param: float = 1e-6          # stop when ||dp|| falls below
    eps_cost: float = 1e-6           # stop when C falls below
    error_tolerance: float = 0.002   # m; used when error_components > 0
    max_iterations: int = 500
    fd_step: float = 1e-6            # relative central-difference step
    sigma0: float = 1e-3
    sigma_up: float = 10.0
    sigma_down: float = 0.1
    ls_shrink: float = 0.5
    ls_max_trials: int = 40
    penalty_weight: float = 1e3      # 1/deg^2, exterior limit penalty
    threads: int = 1
    error_components: int = 0        # leading residuals forming the task error

    def __post_init__(self):
        for name in ("eps_param", "eps_cost", "error_tolerance", "fd_step", "sigma0"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be > 0")
        if not (self.sigma_up > 1.0 > self.sigma_down > 0.0):
            raise ConfigurationError("need sigma_up > 1 > sigma_down > 0")
        if not 0.0 < self.ls_shrink < 1.0:
            raise ConfigurationError("ls_shrink must be in (0, 1)")
        if self.max_iterations < 1 or self.ls_max_trials < 1:
            raise ConfigurationError("iteration counts must be >= 1")
        if self.threads < 1:
            raise ConfigurationError("threads must be >= 1")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    cost: float
    step_norm: float
    sigma: float
    alpha: float
    error_norm: float    # nan when the objective has no task-error block


@dataclass(frozen=True)
class OptResult:
    p_opt: np.ndarray
    cost: float
    error_norm: float
    iterations: int
    evaluations: int
    termination: str
    wall_time_s: float
    history: tuple[IterationRecord, ...]


def fd_jacobian(residual_fn, p, fd_step: float = 1e-6, threads: int = 1):
    """Central-difference residual Jacobian and cost gradient at p.

    Returns (J, grad, r0, n_evaluations) with grad = 2 J^T r0.  The step
    per coordinate is fd_step * max(1, |p_i|).
    """
    p = np.asarray(p, dtype=float)
    r0 = np.asarray(residual_fn(p), dtype=float)
    if not np.all(np.isfinite(r0)):
        raise EvaluationError("objective returned non-finite residuals at base point")

    def column(i: int) -> np.ndarray:
        h = fd_step * max(1.0, abs(p[i]))
        pp = p.copy()
        pp[i] += h
        pm = p.copy()
        pm[i] -= h
        rp = np.asarray(residual_fn(pp), dtype=float)
        rm = np.asarray(residual_fn(pm), dtype=float)
        if not (np.all(np.isfinite(rp)) and np.all(np.isfinite(rm))):
            raise EvaluationError(f"objective returned non-finite residuals at coordinate {i}")
        return (rp - rm) / (2.0 * h)

    indices = range(p.size)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cols = list(pool.map(column, indices))
    else:
        cols = [column(i) for i in indices]
    jac = np.column_stack(cols) if cols else np.zeros((r0.size, 0))
    grad = 2.0 * jac.T @ r0
    return jac, grad, r0, 1 + 2 * p.size


def lm_step(jac: np.ndarray, grad: np.ndarray, sigma: float, alpha: float = 1.0) -> np.ndarray:
    """Solve the damped normal equations for one step."""
    if sigma <= 0:
        raise StepFailure("damping must be > 0")
    a = jac.T @ jac + sigma * np.eye(jac.shape[1])
    if not np.all(np.isfinite(a)):
        raise StepFailure("non-finite normal equations")
    try:
        factor = scipy.linalg.cho_factor(a, check_finite=False)
        step = scipy.linalg.cho_solve(factor, grad, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise StepFailure(f"factorization failed: {exc}") from exc
    if not np.all(np.isfinite(step)):
        raise StepFailure("non-finite step")
    return -alpha * step


def line_search(cost_fn, p, dp, c0, shrink: float = 0.5, max_trials: int = 40):
    """Backtrack from alpha=1 keeping the best strictly-decreasing trial.

    ``cost_fn(p)`` returns (cost, payload); the payload of the winning
    candidate is passed through.  Returns (alpha, p_new, cost, payload)
    or None when no trial decreases the cost.
    """
    best = None
    alpha = 1.0
    for _ in range(max_trials):
        candidate = p + alpha * dp
        c, payload = cost_fn(candidate)
        if np.isfinite(c) and c < c0 and (best is None or c < best[2]):
            best = (alpha, candidate, c, payload)
        elif best is not None:
            break    # past the valley floor; the best trial stands
        alpha *= shrink
    return best


def clamp_to_limits(values, lower, upper) -> np.ndarray:
    """Clamp into [lower, upper]; the identity for feasible input."""
    return np.clip(np.asarray(values, dtype=float), lower, upper)


def limit_penalty(theta_deg: np.ndarray, lower, upper) -> float:
    """Quadratic exterior penalty over every sample and DoF, deg^2.

    Zero inside the limits; grid-dependent by design (summed per sample on
    the evaluation grid).
    """
    theta = np.asarray(theta_deg, dtype=float)
    over = np.maximum(0.0, theta - upper)
    under = np.maximum(0.0, lower - theta)
    viol = np.maximum(over, under)
    return float((viol**2).sum())


def optimize(residual_fn, p0, config: OptimizerConfig, project=None) -> OptResult:
    """Iterate Jacobian / damped step / line search until a stop fires.

    ``project`` maps a parameter vector onto the feasible set (clamping);
    it is applied to the start point and to accepted iterates.  Objectives
    are expected to apply the same projection internally, so probing and
    acceptance see one consistent cost surface.
    """
    t_start = time.perf_counter()
    if project is None:
        project = lambda v: v
    p = np.asarray(project(np.asarray(p0, dtype=float).copy()), dtype=float)
    n_cost_evals = 0

    def cost_at(vec):
        nonlocal n_cost_evals
        n_cost_evals += 1
        r = np.asarray(residual_fn(vec), dtype=float)
        return float(r @ r), r

    def err_norm(r):
        if config.error_components:
            return float(np.linalg.norm(r[: config.error_components]))
        return float("nan")

    c, r = cost_at(p)
    evaluations = 0
    history: list[IterationRecord] = []
    reason = None
    if c <= config.eps_cost:
        reason = TERMINATION_COST
    elif config.error_components and err_norm(r) <= config.error_tolerance:
        reason = TERMINATION_ERROR

    sigma = config.sigma0
    iterations = 0
    while reason is None and iterations < config.max_iterations:
        iterations += 1
        jac, grad, r, n_evals = fd_jacobian(residual_fn, p, config.fd_step, config.threads)
        evaluations += n_evals

        accepted = None
        for _ in range(100):
            try:
                dp = lm_step(jac, grad, sigma)
            except StepFailure:
                sigma = min(sigma * config.sigma_up, _SIGMA_MAX)
                continue
            if float(np.linalg.norm(dp)) <= config.eps_param:
                reason = TERMINATION_PARAM
                break
            trial = line_search(
                cost_at, p, dp, c, shrink=config.ls_shrink, max_trials=config.ls_max_trials
            )
            if trial is None:
                sigma = min(sigma * config.sigma_up, _SIGMA_MAX)
                if sigma >= _SIGMA_MAX:
                    reason = TERMINATION_PARAM
                    break
                continue
            accepted = (trial, dp)
            break
        if reason is not None or accepted is None:
            if reason is None:
                reason = TERMINATION_PARAM
            break

        (alpha, p_new, c_new, r_new), dp = accepted
        p = np.asarray(project(p_new), dtype=float)
        c, r = c_new, r_new
        sigma = max(sigma * config.sigma_down, _SIGMA_MIN)
        step_norm = float(np.linalg.norm(alpha * dp))
        history.append(
            IterationRecord(
                iteration=iterations,
                cost=c,
                step_norm=step_norm,
                sigma=sigma,
                alpha=alpha,
                error_norm=err_norm(r),
            )
        )
        if c <= config.eps_cost:
            reason = TERMINATION_COST
        elif config.error_components and err_norm(r) <= config.error_tolerance:
            reason = TERMINATION_ERROR
        elif step_norm <= config.eps_param:
            reason = TERMINATION_PARAM

    if reason is None:
        reason = TERMINATION_MAX_ITER
    return OptResult(
        p_opt=p,
        cost=c,
        error_norm=err_norm(r),
        iterations=iterations,
        evaluations=evaluations + n_cost_evals,
        termination=reason,
        wall_time_s=time.perf_counter() - t_start,
        history=tuple(history),
    )
