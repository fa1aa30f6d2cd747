"""Composite movement criteria and their adaptive weighting.

The composite cost multiplies the squared final task error by a bracket
holding 1 plus weighted physiological integrals:

    C = e.e * (1 + lambda0_power * I_power + lambda0_com * I_com)

so the cost vanishes exactly when the target is hit, and a weight
calibrated to the reciprocal of an integral's scale makes its bracket
contribution order one near convergence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import DynamicsOutput, _trapz
from .errors import CalibrationError, ConfigurationError, ContractError

MIN_ERROR = "minError"
MIN_POWER = "minPower"
MIN_COM = "minCOM"
MIN_POWER_COM = "minPowerCOM"
STRATEGIES = (MIN_ERROR, MIN_POWER, MIN_COM, MIN_POWER_COM)

DEFAULT_ERROR_TOLERANCE_M = 0.002


def uses_power(strategy: str) -> bool:
    return strategy in (MIN_POWER, MIN_POWER_COM)


def uses_com(strategy: str) -> bool:
    return strategy in (MIN_COM, MIN_POWER_COM)


@dataclass(frozen=True)
class CostSpec:
    """Strategy selection plus weights, target and duration."""

    strategy: str
    target: np.ndarray
    t_f: float
    lambda0_power: float = 0.0
    lambda0_com: float = 0.0
    r_dof: np.ndarray | None = None   # per-DoF power weights, identity if None
    r_com: np.ndarray | None = None   # per-axis COM weights, identity if None
    tolerance_error: float = DEFAULT_ERROR_TOLERANCE_M

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigurationError(
                f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}"
            )
        target = np.asarray(self.target, dtype=float).reshape(-1)
        if target.shape != (3,):
            raise ConfigurationError("target must be a 3-vector")
        target.setflags(write=False)
        object.__setattr__(self, "target", target)
        if self.t_f <= 0:
            raise ConfigurationError("t_f must be > 0")
        if self.lambda0_power < 0 or self.lambda0_com < 0:
            raise ConfigurationError("lambda0 values must be >= 0")
        if self.tolerance_error <= 0:
            raise ConfigurationError("tolerance_error must be > 0")
        for name in ("r_dof", "r_com"):
            value = getattr(self, name)
            if value is not None:
                arr = np.asarray(value, dtype=float)
                if np.any(arr < 0):
                    raise ConfigurationError(f"{name} entries must be >= 0")
                arr.setflags(write=False)
                object.__setattr__(self, name, arr)

    def require_weights(self):
        """Check that the strategy's weights are positive (scenario use)."""
        if uses_power(self.strategy) and not self.lambda0_power > 0:
            raise ConfigurationError(f"{self.strategy} requires lambda0_power > 0")
        if uses_com(self.strategy) and not self.lambda0_com > 0:
            raise ConfigurationError(f"{self.strategy} requires lambda0_com > 0")


@dataclass(frozen=True)
class CostReport:
    """Evaluated terms of the composite criterion."""

    e_f: np.ndarray                # end-effector minus target at t_f, m
    task_error_sq: float           # e_f . e_f, m^2
    phys_power: float              # integral of weighted squared powers
    phys_com: float                # integral of weighted squared COM displacement
    composite: float

    @property
    def error_norm(self) -> float:
        return float(np.linalg.norm(self.e_f))


def task_error(end_effector_final, target) -> np.ndarray:
    """Component-wise end-effector error at movement end."""
    return np.asarray(end_effector_final, dtype=float) - np.asarray(target, dtype=float)


def power_integral(power_w: np.ndarray, times: np.ndarray, r_dof=None) -> float:
    """Trapezoid integral of the weighted squared power vector."""
    power = np.asarray(power_w, dtype=float)
    weighted = power**2 if r_dof is None else np.asarray(r_dof, dtype=float) * power**2
    return float(_trapz(weighted.sum(axis=1), times))


def com_integral(com_m: np.ndarray, times: np.ndarray, r_com=None) -> float:
    """Trapezoid integral of the weighted squared COM displacement from t=0."""
    com = np.asarray(com_m, dtype=float)
    disp = com - com[0]
    weighted = disp**2 if r_com is None else np.asarray(r_com, dtype=float) * disp**2
    return float(_trapz(weighted.sum(axis=1), times))


def composite_cost(
    task_error_sq: float,
    phys_power: float,
    phys_com: float,
    strategy: str,
    lambda0_power: float = 0.0,
    lambda0_com: float = 0.0,
) -> float:
    """The composite criterion for one evaluated movement."""
    if strategy not in STRATEGIES:
        raise ConfigurationError(f"unknown strategy {strategy!r}")
    if task_error_sq < 0:
        raise ContractError("task_error_sq must be >= 0")
    if phys_power < 0 or phys_com < 0:
        raise ContractError("physiological integrals are integrals of squares, got < 0")
    bracket = 1.0
    if uses_power(strategy):
        bracket += lambda0_power * phys_power
    if uses_com(strategy):
        bracket += lambda0_com * phys_com
    return task_error_sq * bracket


def evaluate(spec: CostSpec, output: DynamicsOutput) -> CostReport:
    """Assemble the cost report for a movement already run through dynamics."""
    e_f = task_error(output.end_effector[-1], spec.target)
    task_sq = float(e_f @ e_f)
    phys_power = (
        output.power_squared_integral
        if spec.r_dof is None
        else power_integral(output.power, output.times, spec.r_dof)
    )
    phys_com = (
        output.com_displacement_squared_integral
        if spec.r_com is None
        else com_integral(output.com, output.times, spec.r_com)
    )
    composite = composite_cost(
        task_sq, phys_power, phys_com, spec.strategy, spec.lambda0_power, spec.lambda0_com
    )
    return CostReport(
        e_f=e_f,
        task_error_sq=task_sq,
        phys_power=phys_power,
        phys_com=phys_com,
        composite=composite,
    )


def calibrate_lambda0(max_integral: float) -> float:
    """Weight that maps an integral of the given scale to 1 in the bracket.

    The scale is measured on a task-error-only run; callers fall back to a
    configured value when calibration fails.
    """
    if not np.isfinite(max_integral) or max_integral <= 0:
        raise CalibrationError(
            f"reference integral must be > 0, got {max_integral}"
        )
    return 1.0 / float(max_integral)
