"""Target placement from virtual reaching postures.

A target is the end-effector position of a posture that flexes the trunk
forward by a prescribed angle while the reaching shoulder is flexed 90
degrees with the elbow extended.  Larger trunk flexion places the target
lower, so 15/30/60 degrees give the high/middle/low targets.
"""

from __future__ import annotations

import numpy as np

from ..body_model import BodyModel
from ..errors import ConfigurationError
from ..kinematics import forward_kinematics

TRUNK_FLEXION_CHOICES = (15.0, 30.0, 60.0)

# Movement durations (s) keyed by trunk flexion, high/middle/low.
DEFAULT_DURATIONS_S = {15.0: 0.56, 30.0: 0.575, 60.0: 0.68}

# Forward shoulder flexion is the negative side of the default model's
# flexion range (see the joint data file).
_SHOULDER_FLEXION_DEG = -90.0


def virtual_posture(model: BodyModel, trunk_flexion_deg: float) -> np.ndarray:
    """Joint angles of the target-defining posture.

    Trunk flexion splits between the lumbar and thoracic joints in
    proportion to their flexion ranges; the right shoulder is flexed 90
    degrees forward, the right elbow extended, everything else neutral.
    """
    names = model.dof_names()
    for required in ("lumbar.flexion", "thoracic.flexion", "r_shoulder.flexion"):
        if required not in names:
            raise ConfigurationError(f"model lacks DoF {required!r} for target placement")
    i_lumbar = names.index("lumbar.flexion")
    i_thoracic = names.index("thoracic.flexion")
    i_shoulder = names.index("r_shoulder.flexion")

    range_lumbar = model.limit_upper[i_lumbar]
    range_thoracic = model.limit_upper[i_thoracic]
    total = range_lumbar + range_thoracic
    posture = model.neutral_posture.copy()
    posture[i_lumbar] += trunk_flexion_deg * range_lumbar / total
    posture[i_thoracic] += trunk_flexion_deg * range_thoracic / total
    posture[i_shoulder] += _SHOULDER_FLEXION_DEG
    # Elbow extended = neutral; left unchanged.

    violations = model.limit_violations(posture)
    if np.any(violations > 0):
        bad = [names[i] for i in np.flatnonzero(violations > 0)]
        raise ConfigurationError(
            f"virtual posture for trunk flexion {trunk_flexion_deg} deg exceeds "
            f"joint limits at {', '.join(bad)}"
        )
    return posture


def place_target(model: BodyModel, trunk_flexion_deg: float) -> np.ndarray:
    """World position reached by the virtual posture's end effector."""
    posture = virtual_posture(model, trunk_flexion_deg)
    return forward_kinematics(model, posture).end_effector


def default_duration(trunk_flexion_deg: float) -> float:
    """Movement duration for one of the standard targets."""
    try:
        return DEFAULT_DURATIONS_S[float(trunk_flexion_deg)]
    except KeyError:
        raise ConfigurationError(
            f"no default duration for trunk flexion {trunk_flexion_deg}; "
            f"standard values are {sorted(DEFAULT_DURATIONS_S)}"
        ) from None
