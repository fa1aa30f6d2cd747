from .mocap import MocapSeries, ingest_mocap, load_mocap, save_mocap
from .objective import ReachingObjective
from .presets import PLANAR6_DOF, PRESETS, resolve_active
from .reports import emit_outputs, recompute_total_energy, write_comparison
from .scenario import (
    ScenarioConfig,
    SimulationResult,
    compare_strategies,
    load_scenario,
    min_jerk_reference,
    run_scenario,
    scenario_from_dict,
)
from .smoothing import savgol_filter
from .targets import default_duration, place_target, virtual_posture

__all__ = [
    "MocapSeries",
    "PLANAR6_DOF",
    "PRESETS",
    "ReachingObjective",
    "ScenarioConfig",
    "SimulationResult",
    "compare_strategies",
    "default_duration",
    "emit_outputs",
    "ingest_mocap",
    "load_mocap",
    "load_scenario",
    "min_jerk_reference",
    "place_target",
    "recompute_total_energy",
    "resolve_active",
    "run_scenario",
    "save_mocap",
    "savgol_filter",
    "scenario_from_dict",
    "virtual_posture",
    "write_comparison",
]
