"""Residual objective connecting controller parameters to the composite cost.

The packed parameter vector is [theta_f..., p6...] over the active DoF.
Residuals are the three final end-effector error components, then one
scalar per physiological term shaped as ||e|| * sqrt(weight * integral),
then the joint-limit penalty in the same form, so that the squared
residual norm reproduces the composite criterion

    C = e.e * (1 + lambda_p * I_p + lambda_c * I_c + w * penalty).

Final angles are clamped into the joint limits before every evaluation;
mid-trajectory limit violations are charged through the penalty term.
"""

from __future__ import annotations

import numpy as np

from .. import cost as cost_mod
from ..body_model import BodyModel
from ..controller import DEFAULT_STEP_S, TrajectoryParams, build_joint_trajectory
from ..cost import CostSpec
from ..dynamics import GRAVITY_M_S2, evaluate_movement
from ..errors import ContractError
from ..optimizer import clamp_to_limits, limit_penalty


class ReachingObjective:
    """Callable residual function for one reaching scenario.

    Instances are stateless after construction and safe to evaluate from
    several threads at once.
    """

    def __init__(
        self,
        model: BodyModel,
        spec: CostSpec,
        active=None,
        step: float = DEFAULT_STEP_S,
        penalty_weight: float = 1e3,
        gravity: float = GRAVITY_M_S2,
    ):
        self.model = model
        self.spec = spec
        self.active = np.asarray(
            model.active_dof() if active is None else active, dtype=int
        )
        if self.active.size == 0:
            raise ContractError("objective needs at least one active DoF")
        self.step = step
        self.penalty_weight = penalty_weight
        self.gravity = gravity
        self.lower = model.limit_lower[self.active]
        self.upper = model.limit_upper[self.active]
        self.n_params = 2 * self.active.size
        # Residual layout: 3 error components, optional power/COM terms,
        # penalty last.  Fixed length per strategy.
        self.n_residuals = (
            3
            + int(cost_mod.uses_power(spec.strategy))
            + int(cost_mod.uses_com(spec.strategy))
            + 1
        )

    # -- parameter handling ------------------------------------------------

    def initial_params(self) -> np.ndarray:
        return TrajectoryParams.zero_motion(self.model, self.spec.t_f, self.active).to_vector()

    def params(self, vector) -> TrajectoryParams:
        return TrajectoryParams.from_vector(vector, self.spec.t_f, self.active)

    def project(self, vector) -> np.ndarray:
        """Clamp the final-angle block into the joint limits."""
        vector = np.asarray(vector, dtype=float).copy()
        k = self.active.size
        vector[:k] = clamp_to_limits(vector[:k], self.lower, self.upper)
        return vector

    # -- evaluation ----------------------------------------------------------

    def _evaluate(self, vector):
        params = self.params(self.project(vector))
        trajectory = build_joint_trajectory(self.model, params, self.step)
        output = evaluate_movement(self.model, trajectory, self.gravity)
        report = cost_mod.evaluate(self.spec, output)
        penalty = limit_penalty(
            trajectory.theta, self.model.limit_lower, self.model.limit_upper
        )
        return params, trajectory, output, report, penalty

    def residuals(self, vector) -> np.ndarray:
        spec = self.spec
        _, _, _, report, penalty = self._evaluate(vector)
        e_norm = report.error_norm
        parts = [report.e_f]
        if cost_mod.uses_power(spec.strategy):
            parts.append([e_norm * np.sqrt(spec.lambda0_power * report.phys_power)])
        if cost_mod.uses_com(spec.strategy):
            parts.append([e_norm * np.sqrt(spec.lambda0_com * report.phys_com)])
        parts.append([e_norm * np.sqrt(self.penalty_weight * penalty)])
        return np.concatenate(parts)

    __call__ = residuals

    def describe(self, vector):
        """Full evaluation for reporting: params, trajectory, dynamics,
        cost report and the limit penalty."""
        return self._evaluate(vector)
