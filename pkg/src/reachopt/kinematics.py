"""Forward kinematics of the segment tree.

All public functions take angles in degrees; trigonometry happens in
radians internally.  Evaluation is vectorized over time samples: the same
kernels serve single postures (T=1) and whole trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .body_model import BodyModel
from .errors import ContractError

DEG = np.pi / 180.0

DEFAULT_SEQUENCE = (
    (0.0, 1.0, 0.0),   # flexion/extension (sagittal)
    (1.0, 0.0, 0.0),   # abduction/adduction (frontal)
    (0.0, 0.0, 1.0),   # internal/external rotation (transverse)
)


def rotation_about_axis(axis, angles_rad) -> np.ndarray:
    """Rotation matrices about a fixed unit axis; angles may be an array.

    Returns shape (3, 3) for scalar input, (T, 3, 3) otherwise.
    """
    a = np.asarray(axis, dtype=float)
    t = np.asarray(angles_rad, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    c, s = np.cos(t), np.sin(t)
    cross = np.array([
        [0.0, -a[2], a[1]],
        [a[2], 0.0, -a[0]],
        [-a[1], a[0], 0.0],
    ])
    outer = np.outer(a, a)
    eye = np.eye(3)
    r = (
        c[:, None, None] * eye
        + s[:, None, None] * cross
        + (1.0 - c)[:, None, None] * outer
    )
    return r[0] if scalar else r


def joint_rotation(angles_deg, sequence=DEFAULT_SEQUENCE) -> np.ndarray:
    """Compose the intrinsic three-rotation sequence of one joint.

    ``sequence`` holds the three rotation axes in application order
    (flexion, abduction, rotation by default), each a unit vector in the
    parent frame.  Total function: any finite angles are accepted.
    """
    angles = np.asarray(angles_deg, dtype=float) * DEG
    if angles.shape[-1] != 3:
        raise ContractError("joint_rotation expects 3 angles")
    single = angles.ndim == 1
    angles = np.atleast_2d(angles)
    r = rotation_about_axis(sequence[0], angles[:, 0])
    r = r @ rotation_about_axis(sequence[1], angles[:, 1])
    r = r @ rotation_about_axis(sequence[2], angles[:, 2])
    return r[0] if single else r


@dataclass(frozen=True)
class SegmentPoses:
    """World-frame poses for one posture.

    ``rotations`` (S, 3, 3) and ``origins`` (S, 3) follow the model's
    segment order; ``com_positions`` are the per-segment COM points.
    """

    rotations: np.ndarray
    origins: np.ndarray
    com_positions: np.ndarray
    end_effector: np.ndarray
    com: np.ndarray


def fk_batch(model: BodyModel, angles_deg: np.ndarray):
    """World rotations/origins/COMs for a batch of postures.

    ``angles_deg`` has shape (T, n_dof).  Returns (rotations (T,S,3,3),
    origins (T,S,3), com_positions (T,S,3), end_effector (T,3), com (T,3)).
    """
    angles = np.asarray(angles_deg, dtype=float)
    if angles.ndim != 2 or angles.shape[1] != model.n_dof:
        raise ContractError(
            f"expected angles of shape (T, {model.n_dof}), got {angles.shape}"
        )
    q = angles * DEG
    n_t = angles.shape[0]
    n_seg = len(model.segments)

    rot = np.empty((n_t, n_seg, 3, 3))
    org = np.empty((n_t, n_seg, 3))
    for k, joint in enumerate(model.joints):
        parent = model.parent_index[k]
        child = model.child_index[k]
        axes = model.joint_axes[k]
        sl = slice(3 * k, 3 * k + 3)
        r_joint = (
            rotation_about_axis(axes[0], q[:, sl.start])
            @ rotation_about_axis(axes[1], q[:, sl.start + 1])
            @ rotation_about_axis(axes[2], q[:, sl.start + 2])
        )
        if parent < 0:
            rot[:, child] = r_joint
            org[:, child] = joint.offset
        else:
            rot[:, child] = rot[:, parent] @ r_joint
            org[:, child] = org[:, parent] + np.einsum(
                "tij,j->ti", rot[:, parent], joint.offset
            )

    com_offsets = np.array([s.com_offset for s in model.segments])
    com_pos = org + np.einsum("tsij,sj->tsi", rot, com_offsets)
    masses = np.array([s.mass for s in model.segments])
    com = (masses[None, :, None] * com_pos).sum(axis=1) / masses.sum()

    ee_idx = model.segment_index[model.end_effector_segment]
    ee = org[:, ee_idx] + np.einsum("tij,j->ti", rot[:, ee_idx], model.end_effector_offset)
    return rot, org, com_pos, ee, com


def forward_kinematics(model: BodyModel, posture_deg) -> SegmentPoses:
    """Root-to-leaf pose propagation for one posture (degrees)."""
    posture = np.asarray(posture_deg, dtype=float).reshape(-1)
    if posture.shape != (model.n_dof,):
        raise ContractError(
            f"posture must have {model.n_dof} entries, got {posture.shape}"
        )
    if not np.all(np.isfinite(posture)):
        raise ContractError("posture contains non-finite values")
    rot, org, com_pos, ee, com = fk_batch(model, posture[None, :])
    return SegmentPoses(
        rotations=rot[0],
        origins=org[0],
        com_positions=com_pos[0],
        end_effector=ee[0],
        com=com[0],
    )


def whole_body_com(model: BodyModel, poses: SegmentPoses) -> np.ndarray:
    """Mass-weighted mean of the segment COM positions."""
    masses = np.array([s.mass for s in model.segments])
    return (masses[:, None] * poses.com_positions).sum(axis=0) / masses.sum()
