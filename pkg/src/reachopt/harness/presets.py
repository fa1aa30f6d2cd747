"""Named subsets of optimization DoF.

The ``planar6`` preset restricts the search to six sagittal flexion DoF
for desk-scale end-to-end runs; every other DoF holds the neutral angle.
Presets select optimization variables only; joint limits and target
placement always use the full model.
"""

from __future__ import annotations

import numpy as np

from ..body_model import BodyModel
from ..errors import ConfigurationError

PLANAR6_DOF = (
    "ankle.flexion",
    "knee.flexion",
    "hip.flexion",
    "lumbar.flexion",
    "r_shoulder.flexion",
    "r_elbow.flexion",
)

PRESETS: dict[str, tuple[str, ...] | None] = {
    "full": None,
    "planar6": PLANAR6_DOF,
}


def resolve_active(model: BodyModel, preset: str | None) -> np.ndarray:
    """Active DoF indices for a preset (locked DoF are always excluded)."""
    if preset is None:
        preset = "full"
    if preset not in PRESETS:
        raise ConfigurationError(
            f"unknown preset {preset!r}; available: {sorted(PRESETS)}"
        )
    active = model.active_dof()
    names = PRESETS[preset]
    if names is None:
        return active
    wanted = {model.dof_index(name) for name in names}
    chosen = np.array([i for i in active if i in wanted], dtype=int)
    if chosen.size != len(names):
        raise ConfigurationError(
            f"preset {preset!r} selects locked or missing DoF on this model"
        )
    return chosen
