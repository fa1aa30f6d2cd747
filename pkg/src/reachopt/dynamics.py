"""Algebraic inverse dynamics of the segment tree.

Joint torques come from an outward velocity/acceleration propagation and
an inward force/moment accumulation over the tree; no differential
equations are integrated.  Viscoelastic joint torque (stiffness about the
neutral posture plus damping) is added on top of the rigid-body terms.

Everything is vectorized over time samples.  Reductions run in a fixed
order so repeated evaluations are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .body_model import BodyModel, JointSpec
from .controller import JointTrajectory
from .errors import ContractError
from .kinematics import DEG, rotation_about_axis

GRAVITY_M_S2 = 9.81

_trapz = getattr(np, "trapezoid", np.trapz)


@dataclass(frozen=True)
class MotionState:
    """World-frame motion of every segment over a batch of samples.

    Shapes: rotations (T,S,3,3); origins/omega/v_origin/alpha/a_origin,
    com_positions/v_com/a_com (T,S,3); torque (T,n_dof) N.m; com and
    end_effector (T,3).
    """

    rotations: np.ndarray
    origins: np.ndarray
    omega: np.ndarray
    v_origin: np.ndarray
    alpha: np.ndarray
    a_origin: np.ndarray
    com_positions: np.ndarray
    v_com: np.ndarray
    a_com: np.ndarray
    com: np.ndarray
    end_effector: np.ndarray
    torque: np.ndarray


@dataclass(frozen=True)
class DynamicsOutput:
    """Per-sample dynamics of a movement plus its summary integrals.

    ``power`` is per-DoF mechanical power in W (angular velocity taken in
    rad/s); ``total_abs_power`` its absolute sum per sample.
    ``power_squared_integral`` is the time integral of the squared power
    vector; ``com_displacement_squared_integral`` the time integral of
    the squared COM displacement from the first sample; and
    ``final_com_squared`` the squared COM displacement at the last
    sample.
    """

    times: np.ndarray
    torque: np.ndarray
    power: np.ndarray
    total_abs_power: np.ndarray
    com: np.ndarray
    end_effector: np.ndarray
    total_power_squared: float
    final_com_squared: float
    power_squared_integral: float
    com_displacement_squared_integral: float


def _check_motion_inputs(model, theta, theta_dot, theta_ddot):
    arrays = []
    for name, arr in (("theta", theta), ("theta_dot", theta_dot), ("theta_ddot", theta_ddot)):
        arr = np.asarray(arr, dtype=float)
        if arr.ndim == 1:
            arr = arr[None, :]
        if arr.ndim != 2 or arr.shape[1] != model.n_dof:
            raise ContractError(
                f"{name} must have shape (T, {model.n_dof}), got {np.shape(arr)}"
            )
        if not np.all(np.isfinite(arr)):
            raise ContractError(f"{name} contains non-finite values")
        arrays.append(arr)
    if not (arrays[0].shape == arrays[1].shape == arrays[2].shape):
        raise ContractError("theta, theta_dot, theta_ddot shapes differ")
    return arrays


def compute_motion(
    model: BodyModel,
    theta_deg,
    theta_dot_deg_s,
    theta_ddot_deg_s2,
    gravity: float = GRAVITY_M_S2,
) -> MotionState:
    """Full outward/inward sweep for a batch of samples.

    Torques include the viscoelastic contribution from the model's joint
    stiffness and damping (zero for models that define none).
    """
    theta, theta_dot, theta_ddot = _check_motion_inputs(
        model, theta_deg, theta_dot_deg_s, theta_ddot_deg_s2
    )
    q = theta * DEG
    qd = theta_dot * DEG
    qdd = theta_ddot * DEG
    n_t = q.shape[0]
    n_seg = len(model.segments)
    g_vec = np.array([0.0, 0.0, -gravity])

    rot = np.empty((n_t, n_seg, 3, 3))
    org = np.empty((n_t, n_seg, 3))
    omega = np.empty((n_t, n_seg, 3))
    v_org = np.empty((n_t, n_seg, 3))
    alpha = np.empty((n_t, n_seg, 3))
    a_org = np.empty((n_t, n_seg, 3))
    axes_world = np.empty((n_t, len(model.joints), 3, 3))  # world direction per DoF

    for k, joint in enumerate(model.joints):
        parent = model.parent_index[k]
        child = model.child_index[k]
        a0, a1, a2 = model.joint_axes[k]
        i0 = 3 * k
        r1 = rotation_about_axis(a0, q[:, i0])
        r2 = rotation_about_axis(a1, q[:, i0 + 1])
        r3 = rotation_about_axis(a2, q[:, i0 + 2])
        r12 = r1 @ r2

        s1 = np.broadcast_to(a0, (n_t, 3))
        s2 = np.einsum("tij,j->ti", r1, a1)
        s3 = np.einsum("tij,j->ti", r12, a2)
        w1 = s1 * qd[:, i0, None]
        w12 = w1 + s2 * qd[:, i0 + 1, None]
        omega_loc = w12 + s3 * qd[:, i0 + 2, None]
        sdot_qd = qd[:, i0 + 1, None] * np.cross(w1, s2) + qd[:, i0 + 2, None] * np.cross(
            w12, s3
        )
        alpha_loc = (
            s1 * qdd[:, i0, None]
            + s2 * qdd[:, i0 + 1, None]
            + s3 * qdd[:, i0 + 2, None]
            + sdot_qd
        )
        r_joint = r12 @ r3

        if parent < 0:
            rot[:, child] = r_joint
            org[:, child] = joint.offset
            omega[:, child] = omega_loc
            alpha[:, child] = alpha_loc
            v_org[:, child] = 0.0
            a_org[:, child] = 0.0
            axes_world[:, k, 0] = s1
            axes_world[:, k, 1] = s2
            axes_world[:, k, 2] = s3
        else:
            r_p = rot[:, parent]
            d = np.einsum("tij,j->ti", r_p, joint.offset)
            w_p = omega[:, parent]
            al_p = alpha[:, parent]
            w_loc = np.einsum("tij,tj->ti", r_p, omega_loc)
            al_loc = np.einsum("tij,tj->ti", r_p, alpha_loc)
            rot[:, child] = r_p @ r_joint
            org[:, child] = org[:, parent] + d
            omega[:, child] = w_p + w_loc
            alpha[:, child] = al_p + al_loc + np.cross(w_p, w_loc)
            v_org[:, child] = v_org[:, parent] + np.cross(w_p, d)
            a_org[:, child] = (
                a_org[:, parent] + np.cross(al_p, d) + np.cross(w_p, np.cross(w_p, d))
            )
            axes_world[:, k, 0] = np.einsum("tij,tj->ti", r_p, s1)
            axes_world[:, k, 1] = np.einsum("tij,tj->ti", r_p, s2)
            axes_world[:, k, 2] = np.einsum("tij,tj->ti", r_p, s3)

    com_offsets = np.array([s.com_offset for s in model.segments])
    masses = np.array([s.mass for s in model.segments])
    inertias = np.array([s.inertia for s in model.segments])

    c_w = np.einsum("tsij,sj->tsi", rot, com_offsets)
    com_pos = org + c_w
    v_com = v_org + np.cross(omega, c_w)
    a_com = a_org + np.cross(alpha, c_w) + np.cross(omega, np.cross(omega, c_w))

    # Net force/moment each segment must receive (moment about its COM).
    force = masses[None, :, None] * (a_com - g_vec)
    inertia_w = np.einsum("tsij,sjk,tslk->tsil", rot, inertias, rot)
    i_omega = np.einsum("tsij,tsj->tsi", inertia_w, omega)
    moment = np.einsum("tsij,tsj->tsi", inertia_w, alpha) + np.cross(omega, i_omega)

    # Inward accumulation: f/n hold the load transmitted through each
    # segment's proximal joint (moment taken about that joint).
    f = force.copy()
    n = moment + np.cross(c_w, force)
    torque = np.empty((n_t, model.n_dof))
    for k in range(len(model.joints) - 1, -1, -1):
        parent = model.parent_index[k]
        child = model.child_index[k]
        torque[:, 3 * k : 3 * k + 3] = np.einsum(
            "tj,taj->ta", n[:, child], axes_world[:, k]
        )
        if parent >= 0:
            f[:, parent] += f[:, child]
            n[:, parent] += n[:, child] + np.cross(
                org[:, child] - org[:, parent], f[:, child]
            )

    torque = torque + model.stiffness * (theta - model.neutral_posture) + model.damping * theta_dot

    com = (masses[None, :, None] * com_pos).sum(axis=1) / masses.sum()
    ee_idx = model.segment_index[model.end_effector_segment]
    ee = org[:, ee_idx] + np.einsum(
        "tij,j->ti", rot[:, ee_idx], model.end_effector_offset
    )
    return MotionState(
        rotations=rot,
        origins=org,
        omega=omega,
        v_origin=v_org,
        alpha=alpha,
        a_origin=a_org,
        com_positions=com_pos,
        v_com=v_com,
        a_com=a_com,
        com=com,
        end_effector=ee,
        torque=torque,
    )


def inverse_dynamics(
    model: BodyModel,
    theta_deg,
    theta_dot_deg_s,
    theta_ddot_deg_s2,
    gravity: float = GRAVITY_M_S2,
) -> np.ndarray:
    """Joint torques (N.m) for one sample of joint-space motion."""
    state = compute_motion(model, theta_deg, theta_dot_deg_s, theta_ddot_deg_s2, gravity)
    return state.torque[0] if np.asarray(theta_deg).ndim == 1 else state.torque


def viscoelastic_torque(joint: JointSpec, theta_deg, theta_dot_deg_s, neutral_deg=None):
    """Passive torque of one joint: stiffness * (theta - neutral) + damping * theta_dot.

    Angles in degrees, rates in deg/s; coefficients are per-degree, so no
    unit conversion happens here.
    """
    theta = np.asarray(theta_deg, dtype=float)
    theta_dot = np.asarray(theta_dot_deg_s, dtype=float)
    neutral = np.zeros(3) if neutral_deg is None else np.asarray(neutral_deg, dtype=float)
    k = np.array([d.stiffness for d in joint.dof])
    b = np.array([d.damping for d in joint.dof])
    return k * (theta - neutral) + b * theta_dot


def joint_power(torque, omega_rad_s):
    """Per-DoF mechanical power (W) and the sum of absolute powers.

    ``omega_rad_s`` must already be in rad/s.
    """
    torque = np.asarray(torque, dtype=float)
    omega = np.asarray(omega_rad_s, dtype=float)
    if torque.shape != omega.shape:
        raise ContractError("torque and angular velocity shapes differ")
    power = torque * omega
    return power, np.abs(power).sum(axis=-1)


def evaluate_movement(
    model: BodyModel,
    trajectory: JointTrajectory,
    gravity: float = GRAVITY_M_S2,
) -> DynamicsOutput:
    """Torques, powers, COM and end-effector histories for one movement.

    Integrals use the trapezoid rule on the trajectory's own grid; the
    COM displacement is measured from the first sample.
    """
    state = compute_motion(
        model, trajectory.theta, trajectory.theta_dot, trajectory.theta_ddot, gravity
    )
    times = trajectory.times
    power, total_abs = joint_power(state.torque, trajectory.theta_dot * DEG)
    power_sq = (power**2).sum(axis=1)
    total_power_squared = float(_trapz(power_sq, times))
    com_disp = state.com - state.com[0]
    com_disp_sq = (com_disp**2).sum(axis=1)
    return DynamicsOutput(
        times=times,
        torque=state.torque,
        power=power,
        total_abs_power=total_abs,
        com=state.com,
        end_effector=state.end_effector,
        total_power_squared=total_power_squared,
        final_com_squared=float(com_disp_sq[-1]),
        power_squared_integral=total_power_squared,
        com_displacement_squared_integral=float(_trapz(com_disp_sq, times)),
    )
