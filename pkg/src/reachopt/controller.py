"""Polynomial joint controllers and the straight-line quintic reference.

Each moving degree of freedom follows a 6th-order polynomial whose
coefficients are closed under rest-to-rest boundary conditions: position
prescribed at both ends, velocity and acceleration zero at both ends.
That leaves two free numbers per DoF (final angle and the 6th
coefficient), which are the optimization variables.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .body_model import BodyModel
from .errors import ContractError

DEFAULT_STEP_S = 0.001


@dataclass(frozen=True)
class TrajectoryParams:
    """Per-active-DoF controller parameters.

    ``theta_f`` (deg) and ``p6`` (deg/s^6) are aligned with ``active``,
    the indices of moving DoF in the model's posture vector.  The packed
    vector layout is [theta_f..., p6...].
    """

    theta_f: np.ndarray
    p6: np.ndarray
    t_f: float
    active: np.ndarray

    def __post_init__(self):
        theta_f = np.asarray(self.theta_f, dtype=float).reshape(-1)
        p6 = np.asarray(self.p6, dtype=float).reshape(-1)
        active = np.asarray(self.active, dtype=int).reshape(-1)
        if not (theta_f.size == p6.size == active.size):
            raise ContractError("theta_f, p6 and active must have equal length")
        if self.t_f <= 0:
            raise ContractError("t_f must be > 0")
        for arr in (theta_f, p6, active):
            arr.setflags(write=False)
        object.__setattr__(self, "theta_f", theta_f)
        object.__setattr__(self, "p6", p6)
        object.__setattr__(self, "active", active)

    @property
    def n_active(self) -> int:
        return self.active.size

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.theta_f, self.p6])

    @classmethod
    def from_vector(cls, vec, t_f: float, active) -> "TrajectoryParams":
        vec = np.asarray(vec, dtype=float).reshape(-1)
        active = np.asarray(active, dtype=int).reshape(-1)
        if vec.size != 2 * active.size:
            raise ContractError(
                f"parameter vector must have {2 * active.size} entries, got {vec.size}"
            )
        k = active.size
        return cls(theta_f=vec[:k], p6=vec[k:], t_f=t_f, active=active)

    @classmethod
    def zero_motion(cls, model: BodyModel, t_f: float, active=None) -> "TrajectoryParams":
        """Hold the neutral posture: theta_f = neutral, p6 = 0."""
        if active is None:
            active = model.active_dof()
        active = np.asarray(active, dtype=int)
        return cls(
            theta_f=model.neutral_posture[active],
            p6=np.zeros(active.size),
            t_f=t_f,
            active=active,
        )


@dataclass(frozen=True)
class JointTrajectory:
    """Sampled angles and exact polynomial derivatives on a uniform grid.

    Angles in degrees, velocities deg/s, accelerations deg/s^2.
    """

    times: np.ndarray        # (T,)
    theta: np.ndarray        # (T, n_dof)
    theta_dot: np.ndarray
    theta_ddot: np.ndarray

    @property
    def t_f(self) -> float:
        return float(self.times[-1])

    @property
    def step(self) -> float:
        return float(self.times[1] - self.times[0]) if self.times.size > 1 else 0.0


def closure_coefficients(theta0, theta_f, p6, t_f: float) -> np.ndarray:
    """Coefficients p0..p6 satisfying the rest-to-rest boundary conditions.

    With delta = theta_f - theta0:
        p0 = theta0, p1 = p2 = 0,
        p3 = (10*delta - p6*t_f^6) / t_f^3,
        p4 = (-15*delta + 3*p6*t_f^6) / t_f^4,
        p5 = (6*delta - 3*p6*t_f^6) / t_f^5.

    Inputs broadcast; output shape is (7,) + broadcast shape.
    """
    if t_f <= 0:
        raise ContractError("t_f must be > 0")
    theta0, theta_f, p6 = np.broadcast_arrays(
        np.asarray(theta0, dtype=float),
        np.asarray(theta_f, dtype=float),
        np.asarray(p6, dtype=float),
    )
    delta = theta_f - theta0
    t6 = t_f**6
    coeffs = np.zeros((7,) + delta.shape)
    coeffs[0] = theta0
    coeffs[3] = (10.0 * delta - p6 * t6) / t_f**3
    coeffs[4] = (-15.0 * delta + 3.0 * p6 * t6) / t_f**4
    coeffs[5] = (6.0 * delta - 3.0 * p6 * t6) / t_f**5
    coeffs[6] = p6
    return coeffs


def time_grid(t_f: float, step: float = DEFAULT_STEP_S) -> np.ndarray:
    """Uniform grid over [0, t_f] whose last sample is exactly t_f."""
    if t_f <= 0 or step <= 0:
        raise ContractError("t_f and step must be > 0")
    n = max(1, int(round(t_f / step))) + 1
    return np.linspace(0.0, t_f, n)


def eval_polynomials(coeffs: np.ndarray, times: np.ndarray):
    """Evaluate polynomials and their first two analytic derivatives.

    ``coeffs`` has shape (7, k) (or (7,) for one channel); returns three
    (T, k) arrays.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.ndim == 1:
        coeffs = coeffs[:, None]
    times = np.asarray(times, dtype=float)
    tp = times[:, None] ** np.arange(7)[None, :]                 # (T, 7)
    c1 = np.zeros_like(coeffs)
    c1[:6] = coeffs[1:] * np.arange(1, 7)[:, None]
    c2 = np.zeros_like(coeffs)
    c2[:5] = c1[1:6] * np.arange(1, 6)[:, None]
    pos = tp @ coeffs
    vel = tp @ c1
    acc = tp @ c2
    return pos, vel, acc


def eval_trajectory(coeffs: np.ndarray, t_f: float, step: float = DEFAULT_STEP_S) -> JointTrajectory:
    """Sample polynomial channels on the standard grid."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.ndim == 1:
        coeffs = coeffs[:, None]
    times = time_grid(t_f, step)
    pos, vel, acc = eval_polynomials(coeffs, times)
    return JointTrajectory(times=times, theta=pos, theta_dot=vel, theta_ddot=acc)


def build_joint_trajectory(
    model: BodyModel,
    params: TrajectoryParams,
    step: float = DEFAULT_STEP_S,
) -> JointTrajectory:
    """Full-model trajectory: active DoF follow their polynomials, the
    rest hold the neutral posture."""
    times = time_grid(params.t_f, step)
    n_t = times.size
    theta = np.tile(model.neutral_posture, (n_t, 1))
    theta_dot = np.zeros((n_t, model.n_dof))
    theta_ddot = np.zeros((n_t, model.n_dof))
    if params.n_active:
        theta0 = model.neutral_posture[params.active]
        coeffs = closure_coefficients(theta0, params.theta_f, params.p6, params.t_f)
        pos, vel, acc = eval_polynomials(coeffs, times)
        theta[:, params.active] = pos
        theta_dot[:, params.active] = vel
        theta_ddot[:, params.active] = acc
    return JointTrajectory(times=times, theta=theta, theta_dot=theta_dot, theta_ddot=theta_ddot)


def min_jerk_profile(s):
    """Scalar blend 10 s^3 - 15 s^4 + 6 s^5 on s in [0, 1]."""
    s = np.asarray(s, dtype=float)
    return 10.0 * s**3 - 15.0 * s**4 + 6.0 * s**5


def min_jerk_position(x0, xf, duration: float, t):
    """Point on the straight minimum-jerk path from x0 to xf at time t."""
    if duration <= 0:
        raise ContractError("duration must be > 0")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < -1e-12) or np.any(t_arr > duration + 1e-12):
        raise ContractError(f"t={t} outside [0, {duration}]")
    x0 = np.asarray(x0, dtype=float)
    xf = np.asarray(xf, dtype=float)
    blend = min_jerk_profile(t_arr / duration)
    if t_arr.ndim == 0:
        return x0 + (xf - x0) * blend
    return x0[None, :] + (xf - x0)[None, :] * blend[:, None]
