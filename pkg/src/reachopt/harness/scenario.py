"""Scenario configuration and end-to-end simulation runs.

A scenario names a model, a target (explicit position or trunk-flexion
placement), a movement duration, a strategy and weights, and optimizer
settings.  ``run_scenario`` executes the whole pipeline: build model,
place target, calibrate weights from a task-error-only primary run when
requested, optimize, evaluate the winning movement, and emit output
files.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import yaml

from .. import cost as cost_mod
from ..body_model import BodyModel, build_from_anthropometrics, double_leg_masses, load_model
from ..controller import (
    DEFAULT_STEP_S,
    JointTrajectory,
    TrajectoryParams,
    min_jerk_profile,
    time_grid,
)
from ..cost import CostReport, CostSpec, calibrate_lambda0
from ..dynamics import GRAVITY_M_S2, DynamicsOutput, _trapz
from ..errors import CalibrationError, ConfigurationError, ParseError
from ..kinematics import forward_kinematics
from ..optimizer import OptimizerConfig, OptResult, optimize
from .objective import ReachingObjective
from .presets import resolve_active
from .targets import default_duration, place_target

AUTO = "auto"


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to reproduce one simulation run."""

    strategy: str = cost_mod.MIN_ERROR
    model_file: str | None = None
    height_m: float = 1.6912
    mass_kg: float = 68.59
    double_legs: bool = True
    preset: str | None = None
    trunk_flexion_deg: float | None = None
    target_m: tuple[float, float, float] | None = None
    duration_s: float | None = None
    lambda0_power: float | str = AUTO
    lambda0_com: float | str = AUTO
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    step_s: float = DEFAULT_STEP_S
    gravity_m_s2: float = GRAVITY_M_S2
    output_dir: str | None = None

    def __post_init__(self):
        if self.strategy not in cost_mod.STRATEGIES:
            raise ConfigurationError(f"unknown strategy {self.strategy!r}")
        has_flexion = self.trunk_flexion_deg is not None
        has_explicit = self.target_m is not None
        if has_flexion == has_explicit:
            raise ConfigurationError(
                "exactly one of trunk_flexion_deg and target_m must be given"
            )
        if has_explicit and self.duration_s is None:
            raise ConfigurationError("an explicit target needs duration_s")
        if self.duration_s is not None and self.duration_s <= 0:
            raise ConfigurationError("duration_s must be > 0")
        for name in ("lambda0_power", "lambda0_com"):
            value = getattr(self, name)
            if not (value == AUTO or (isinstance(value, (int, float)) and value >= 0)):
                raise ConfigurationError(f"{name} must be 'auto' or a number >= 0")


@dataclass(frozen=True)
class SimulationResult:
    """A finished scenario: optimization outcome plus evaluated movement."""

    config: ScenarioConfig
    model: BodyModel
    active: np.ndarray
    target: np.ndarray
    t_f: float
    lambda0_power: float
    lambda0_com: float
    opt: OptResult
    params: TrajectoryParams
    trajectory: JointTrajectory
    dynamics: DynamicsOutput
    cost_report: CostReport
    limit_penalty: float
    min_jerk: dict
    primary: OptResult | None
    summary: dict


def load_scenario(path) -> ScenarioConfig:
    """Read a scenario file (YAML)."""
    with open(path) as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ParseError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: expected a mapping at top level")
    return scenario_from_dict(doc)


def scenario_from_dict(doc: dict) -> ScenarioConfig:
    model = doc.get("model", {}) or {}
    target = doc.get("target", {}) or {}
    lambdas = doc.get("lambda0", {}) or {}
    opt = doc.get("optimizer", {}) or {}
    known_opt = {
        "eps_param": opt.get("eps_param", 1e-6),
        "eps_cost": opt.get("eps_cost", 1e-6),
        "error_tolerance": opt.get("error_tolerance_m", 0.002),
        "max_iterations": opt.get("max_iterations", 500),
        "fd_step": opt.get("fd_step", 1e-6),
        "sigma0": opt.get("sigma0", 1e-3),
        "sigma_up": opt.get("sigma_up", 10.0),
        "sigma_down": opt.get("sigma_down", 0.1),
        "ls_shrink": opt.get("ls_shrink", 0.5),
        "ls_max_trials": opt.get("ls_max_trials", 40),
        "penalty_weight": opt.get("penalty_weight", 1e3),
        "threads": opt.get("threads", 1),
    }
    explicit = target.get("position_m")
    return ScenarioConfig(
        strategy=doc.get("strategy", cost_mod.MIN_ERROR),
        model_file=model.get("file"),
        height_m=float(model.get("height_m", 1.6912)),
        mass_kg=float(model.get("mass_kg", 68.59)),
        double_legs=bool(model.get("double_legs", True)),
        preset=doc.get("preset"),
        trunk_flexion_deg=(
            float(target["trunk_flexion_deg"]) if "trunk_flexion_deg" in target else None
        ),
        target_m=tuple(float(v) for v in explicit) if explicit is not None else None,
        duration_s=float(doc["duration_s"]) if "duration_s" in doc else None,
        lambda0_power=lambdas.get("power", AUTO),
        lambda0_com=lambdas.get("com", AUTO),
        optimizer=OptimizerConfig(error_components=3, **known_opt),
        step_s=float(doc.get("step_s", DEFAULT_STEP_S)),
        gravity_m_s2=float(doc.get("gravity_m_s2", GRAVITY_M_S2)),
        output_dir=doc.get("output_dir"),
    )


def resolve_model(config: ScenarioConfig) -> BodyModel:
    if config.model_file:
        return load_model(config.model_file)
    model = build_from_anthropometrics(config.height_m, config.mass_kg)
    return double_leg_masses(model) if config.double_legs else model


def min_jerk_reference(x0, xf, duration: float, step: float = DEFAULT_STEP_S) -> dict:
    """Straight-path reference with analytic derivatives on the grid."""
    x0 = np.asarray(x0, dtype=float)
    xf = np.asarray(xf, dtype=float)
    times = time_grid(duration, step)
    s = times / duration
    blend = min_jerk_profile(s)
    d_blend = (30.0 * s**2 - 60.0 * s**3 + 30.0 * s**4) / duration
    dd_blend = (60.0 * s - 180.0 * s**2 + 120.0 * s**3) / duration**2
    delta = xf - x0
    return {
        "times": times,
        "position": x0[None, :] + blend[:, None] * delta[None, :],
        "velocity": d_blend[:, None] * delta[None, :],
        "acceleration": dd_blend[:, None] * delta[None, :],
    }


def _resolve_lambda(value, which: str, primary_dynamics: DynamicsOutput | None) -> float:
    if value != AUTO:
        return float(value)
    if primary_dynamics is None:
        raise ConfigurationError(f"lambda0_{which} is 'auto' but no primary run exists")
    integral = (
        primary_dynamics.power_squared_integral
        if which == "power"
        else primary_dynamics.com_displacement_squared_integral
    )
    return calibrate_lambda0(integral)


def run_scenario(config: ScenarioConfig, primary: SimulationResult | None = None) -> SimulationResult:
    """Execute one scenario end to end.

    ``primary`` optionally supplies a finished task-error-only run on the
    same model/target for weight calibration (``compare_strategies`` uses
    this to calibrate once per target).
    """
    model = resolve_model(config)
    active = resolve_active(model, config.preset)

    if config.target_m is not None:
        target = np.asarray(config.target_m, dtype=float)
        t_f = float(config.duration_s)
    else:
        target = place_target(model, config.trunk_flexion_deg)
        t_f = (
            float(config.duration_s)
            if config.duration_s is not None
            else default_duration(config.trunk_flexion_deg)
        )

    needs = []
    if cost_mod.uses_power(config.strategy) and config.lambda0_power == AUTO:
        needs.append("power")
    if cost_mod.uses_com(config.strategy) and config.lambda0_com == AUTO:
        needs.append("com")
    if needs and primary is None:
        primary_config = replace(
            config,
            strategy=cost_mod.MIN_ERROR,
            lambda0_power=0.0,
            lambda0_com=0.0,
            output_dir=None,
        )
        primary = run_scenario(primary_config)

    primary_dynamics = primary.dynamics if primary is not None else None
    lambda0_power = (
        _resolve_lambda(config.lambda0_power, "power", primary_dynamics)
        if cost_mod.uses_power(config.strategy)
        else 0.0
    )
    lambda0_com = (
        _resolve_lambda(config.lambda0_com, "com", primary_dynamics)
        if cost_mod.uses_com(config.strategy)
        else 0.0
    )

    spec = CostSpec(
        strategy=config.strategy,
        target=target,
        t_f=t_f,
        lambda0_power=lambda0_power,
        lambda0_com=lambda0_com,
        tolerance_error=config.optimizer.error_tolerance,
    )
    spec.require_weights()
    objective = ReachingObjective(
        model,
        spec,
        active=active,
        step=config.step_s,
        penalty_weight=config.optimizer.penalty_weight,
        gravity=config.gravity_m_s2,
    )
    opt = optimize(
        objective.residuals,
        objective.initial_params(),
        config.optimizer,
        project=objective.project,
    )
    params, trajectory, dynamics, report, penalty = objective.describe(opt.p_opt)

    neutral_ee = forward_kinematics(model, model.neutral_posture).end_effector
    reference = min_jerk_reference(neutral_ee, target, t_f, config.step_s)

    com_disp = dynamics.com[-1] - dynamics.com[0]
    summary = {
        "strategy": config.strategy,
        "final_error_m": report.error_norm,
        "task_error_sq_m2": report.task_error_sq,
        "total_power_squared_J2": dynamics.total_power_squared,
        "final_com_squared_m2": dynamics.final_com_squared,
        "total_energy_J": float(_trapz(dynamics.total_abs_power, dynamics.times)),
        "com_disp_ap_mm": float(com_disp[0] * 1000.0),
        "com_disp_ml_mm": float(com_disp[1] * 1000.0),
        "com_disp_vert_mm": float(com_disp[2] * 1000.0),
        "p6_norm": float(np.linalg.norm(params.p6)),
        "lambda0_power": lambda0_power,
        "lambda0_com": lambda0_com,
        "limit_penalty_deg2": penalty,
        "composite_cost": report.composite,
        "iterations": opt.iterations,
        "evaluations": opt.evaluations,
        "termination": opt.termination,
    }
    result = SimulationResult(
        config=config,
        model=model,
        active=active,
        target=target,
        t_f=t_f,
        lambda0_power=lambda0_power,
        lambda0_com=lambda0_com,
        opt=opt,
        params=params,
        trajectory=trajectory,
        dynamics=dynamics,
        cost_report=report,
        limit_penalty=penalty,
        min_jerk=reference,
        primary=primary.opt if primary is not None else None,
        summary=summary,
    )
    if config.output_dir:
        from .reports import emit_outputs

        emit_outputs(result, config.output_dir)
    return result


def compare_strategies(
    config: ScenarioConfig,
    strategies=cost_mod.STRATEGIES,
    trunk_flexions=(15.0, 30.0, 60.0),
) -> dict:
    """Run a strategy-by-target grid sharing one model and one primary
    (calibration) run per target.

    Returns {"results": {(flexion, strategy): SimulationResult},
    "rows": [...per-cell summary dicts...]}.  Cells whose optimization
    fails are annotated, not fatal.
    """
    results = {}
    rows = []
    for flexion in trunk_flexions:
        base = replace(
            config,
            trunk_flexion_deg=float(flexion),
            target_m=None,
            duration_s=None,
            output_dir=None,
        )
        primary = None
        for strategy in strategies:
            cell = replace(base, strategy=strategy)
            try:
                if strategy == cost_mod.MIN_ERROR and primary is None:
                    result = run_scenario(cell)
                    primary = result
                else:
                    if primary is None:
                        primary = run_scenario(replace(cell, strategy=cost_mod.MIN_ERROR))
                    result = run_scenario(cell, primary=primary)
            except (ConfigurationError, CalibrationError) as exc:
                rows.append(
                    {
                        "trunk_flexion_deg": float(flexion),
                        "strategy": strategy,
                        "status": f"failed: {exc}",
                    }
                )
                continue
            results[(float(flexion), strategy)] = result
            row = {
                "trunk_flexion_deg": float(flexion),
                "strategy": strategy,
                "status": result.opt.termination,
                "cpu_time_s": result.opt.wall_time_s,
            }
            row.update(
                {
                    key: result.summary[key]
                    for key in (
                        "total_power_squared_J2",
                        "final_com_squared_m2",
                        "total_energy_J",
                        "com_disp_ap_mm",
                        "com_disp_ml_mm",
                        "com_disp_vert_mm",
                        "final_error_m",
                        "p6_norm",
                    )
                }
            )
            rows.append(row)
    report = {"results": results, "rows": rows}
    if config.output_dir:
        from .reports import write_comparison

        write_comparison(rows, config.output_dir)
    return report
