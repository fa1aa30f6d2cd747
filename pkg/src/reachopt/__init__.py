"""Full-body reaching movement synthesis.

Polynomial joint controllers are tuned by a damped least-squares search
over composite criteria (task error, joint power, centre-of-mass
displacement) evaluated with algebraic inverse dynamics and forward
kinematics on an articulated skeleton.
"""

from .body_model import (
    AnthropometricTable,
    BodyModel,
    DoF,
    JointSpec,
    Segment,
    SegmentFractions,
    build_from_anthropometrics,
    default_anthropometric_table,
    default_model,
    double_leg_masses,
    load_model,
    save_model,
)
from .controller import (
    JointTrajectory,
    TrajectoryParams,
    build_joint_trajectory,
    closure_coefficients,
    eval_trajectory,
    min_jerk_position,
    time_grid,
)
from .cost import (
    STRATEGIES,
    CostReport,
    CostSpec,
    calibrate_lambda0,
    composite_cost,
    task_error,
)
from .dynamics import (
    DynamicsOutput,
    MotionState,
    compute_motion,
    evaluate_movement,
    inverse_dynamics,
    joint_power,
    viscoelastic_torque,
)
from .kinematics import SegmentPoses, forward_kinematics, joint_rotation, whole_body_com
from .optimizer import (
    OptimizerConfig,
    OptResult,
    clamp_to_limits,
    fd_jacobian,
    limit_penalty,
    line_search,
    lm_step,
    optimize,
)

__version__ = "0.1.0"
