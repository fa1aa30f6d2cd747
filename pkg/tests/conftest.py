import numpy as np
import pytest

from reachopt.body_model import BodyModel, DoF, JointSpec, Segment, default_model


def free_dof(plane, axis):
    return DoF(plane, axis, -360.0, 360.0)


def spherical_dof(flexion_axis=(0.0, 1.0, 0.0)):
    return (
        free_dof("flexion", flexion_axis),
        free_dof("abduction", (1.0, 0.0, 0.0)),
        free_dof("rotation", (0.0, 0.0, 1.0)),
    )


def make_pendulum(mass=1.0, com=0.5, length=1.0, inertia=None, stiffness=0.0, damping=0.0):
    """Single hanging rod pivoting at the origin; flexion measures the
    angle from straight down."""
    tensor = np.zeros((3, 3)) if inertia is None else np.asarray(inertia, dtype=float)
    seg = Segment("rod", mass, length, np.array([0.0, 0.0, -com]), tensor)
    dof = (
        DoF("flexion", (0.0, 1.0, 0.0), -360.0, 360.0, stiffness, damping),
        free_dof("abduction", (1.0, 0.0, 0.0)),
        free_dof("rotation", (0.0, 0.0, 1.0)),
    )
    joint = JointSpec("pivot", "ground", "rod", np.zeros(3), dof)
    return BodyModel((seg,), (joint,), "rod", np.array([0.0, 0.0, -length]))


def make_chain(n_links, masses=None, coms=None, lengths=None, inertias=None):
    """Serial chain of hanging rods, each joint a full 3-DoF spherical."""
    masses = masses or [1.0] * n_links
    lengths = lengths or [1.0] * n_links
    coms = coms or [0.5 * l for l in lengths]
    inertias = inertias or [np.zeros((3, 3))] * n_links
    segments = []
    joints = []
    for i in range(n_links):
        name = f"link{i}"
        segments.append(
            Segment(
                name,
                masses[i],
                lengths[i],
                np.array([0.0, 0.0, -coms[i]]),
                np.asarray(inertias[i], dtype=float),
            )
        )
        parent = "ground" if i == 0 else f"link{i-1}"
        offset = np.zeros(3) if i == 0 else np.array([0.0, 0.0, -lengths[i - 1]])
        joints.append(JointSpec(f"joint{i}", parent, name, offset, spherical_dof()))
    return BodyModel(
        tuple(segments),
        tuple(joints),
        f"link{n_links-1}",
        np.array([0.0, 0.0, -lengths[-1]]),
    )


@pytest.fixture(scope="session")
def model():
    return default_model()


@pytest.fixture(scope="session")
def pendulum():
    return make_pendulum()


@pytest.fixture(scope="session")
def two_link():
    return make_chain(2, masses=[1.2, 0.8], coms=[0.45, 0.35], lengths=[1.0, 0.8])
