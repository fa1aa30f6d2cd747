"""Articulated skeleton description and construction.

The skeleton is an open kinematic tree of rigid segments connected by
joints with three rotational degrees of freedom each (one per anatomical
plane).  Conventions used throughout the package:

* Segment frames are right-handed with x anterior, y to the subject's
  left, z up; all frames coincide with the world frame in the neutral
  standing posture.  A segment's frame origin sits at its proximal joint.
* The world origin is the ground attachment of the base joint (the ankle
  in the default model).
* Angles, joint limits, stiffness and damping are expressed in degrees
  (N.m/deg, N.m.s/deg); masses in kg, lengths in m.
* The per-joint degree-of-freedom order is (flexion, abduction, rotation),
  which is also the intrinsic rotation order applied by the kinematics.
  The posture vector is joint-major in the order the joints are listed.

A degree of freedom whose printed range is no wider than
``LOCKED_RANGE_DEG`` is treated as locked: it stays at the neutral angle
and is excluded from optimization variables.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

import numpy as np
import yaml

from .errors import ConfigurationError, ContractError, ParseError

GROUND = "ground"
PLANES = ("flexion", "abduction", "rotation")
LOCKED_RANGE_DEG = 0.02

_DEFAULT_AXES = {
    "flexion": (0.0, 1.0, 0.0),
    "abduction": (1.0, 0.0, 0.0),
    "rotation": (0.0, 0.0, 1.0),
}


def _as_vec3(value, what: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float).reshape(-1)
    if arr.shape != (3,):
        raise ConfigurationError(f"{what} must have 3 components, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ConfigurationError(f"{what} contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DoF:
    """One rotational degree of freedom of a joint."""

    plane: str
    axis: np.ndarray          # unit vector in the parent segment frame
    limit_lower: float        # deg
    limit_upper: float        # deg
    stiffness: float = 0.0    # N.m/deg
    damping: float = 0.0      # N.m.s/deg

    def __post_init__(self):
        if self.plane not in PLANES:
            raise ConfigurationError(f"unknown plane {self.plane!r}")
        axis = _as_vec3(self.axis, f"{self.plane} axis")
        norm = float(np.linalg.norm(axis))
        if not np.isclose(norm, 1.0, atol=1e-9):
            raise ConfigurationError(f"{self.plane} axis must be a unit vector")
        object.__setattr__(self, "axis", axis)
        if not self.limit_lower < self.limit_upper:
            raise ConfigurationError(
                f"{self.plane}: limit_lower {self.limit_lower} must be below "
                f"limit_upper {self.limit_upper}"
            )
        if self.stiffness < 0 or self.damping < 0:
            raise ConfigurationError(f"{self.plane}: stiffness and damping must be >= 0")

    @property
    def locked(self) -> bool:
        return (self.limit_upper - self.limit_lower) <= LOCKED_RANGE_DEG

    def __eq__(self, other):
        if not isinstance(other, DoF):
            return NotImplemented
        return (
            self.plane == other.plane
            and np.array_equal(self.axis, other.axis)
            and self.limit_lower == other.limit_lower
            and self.limit_upper == other.limit_upper
            and self.stiffness == other.stiffness
            and self.damping == other.damping
        )


@dataclass(frozen=True, eq=False)
class Segment:
    """Rigid segment: mass properties in its own frame.

    ``com_offset`` is the centre-of-mass position relative to the proximal
    joint; ``inertia`` is the 3x3 tensor about the centre of mass.
    """

    name: str
    mass: float
    length: float
    com_offset: np.ndarray
    inertia: np.ndarray

    def __post_init__(self):
        if self.mass <= 0:
            raise ConfigurationError(f"segment {self.name}: mass must be > 0")
        if self.length <= 0:
            raise ConfigurationError(f"segment {self.name}: length must be > 0")
        com = _as_vec3(self.com_offset, f"segment {self.name} com_offset")
        object.__setattr__(self, "com_offset", com)
        if np.linalg.norm(com) > self.length * (1 + 1e-9):
            raise ConfigurationError(
                f"segment {self.name}: |com_offset| exceeds segment length"
            )
        inertia = np.asarray(self.inertia, dtype=float)
        if inertia.shape != (3, 3):
            raise ConfigurationError(f"segment {self.name}: inertia must be 3x3")
        if not np.allclose(inertia, inertia.T, atol=1e-12):
            raise ConfigurationError(f"segment {self.name}: inertia must be symmetric")
        eigs = np.linalg.eigvalsh(inertia)
        if eigs.min() < -1e-12 * max(1.0, abs(eigs).max()):
            raise ConfigurationError(
                f"segment {self.name}: inertia must be positive semi-definite"
            )
        inertia = inertia.copy()
        inertia.setflags(write=False)
        object.__setattr__(self, "inertia", inertia)

    def __eq__(self, other):
        if not isinstance(other, Segment):
            return NotImplemented
        return (
            self.name == other.name
            and self.mass == other.mass
            and self.length == other.length
            and np.array_equal(self.com_offset, other.com_offset)
            and np.array_equal(self.inertia, other.inertia)
        )


@dataclass(frozen=True, eq=False)
class JointSpec:
    """Spherical joint with three named rotational degrees of freedom.

    ``offset`` locates the joint centre in the parent segment frame (for
    the base joint: in the world frame).
    """

    name: str
    parent_segment: str
    child_segment: str
    offset: np.ndarray
    dof: tuple[DoF, DoF, DoF]

    def __post_init__(self):
        object.__setattr__(self, "offset", _as_vec3(self.offset, f"joint {self.name} offset"))
        dof = tuple(self.dof)
        if len(dof) != 3:
            raise ConfigurationError(f"joint {self.name}: exactly 3 DoF required")
        if tuple(d.plane for d in dof) != PLANES:
            raise ConfigurationError(
                f"joint {self.name}: DoF must be ordered {PLANES}"
            )
        object.__setattr__(self, "dof", dof)

    def __eq__(self, other):
        if not isinstance(other, JointSpec):
            return NotImplemented
        return (
            self.name == other.name
            and self.parent_segment == other.parent_segment
            and self.child_segment == other.child_segment
            and np.array_equal(self.offset, other.offset)
            and self.dof == other.dof
        )


@dataclass(frozen=True, eq=False)
class BodyModel:
    """Immutable kinematic tree plus the neutral posture.

    Joints are listed in a fixed order that defines the posture-vector
    layout: DoF index = 3 * joint_index + plane_index with planes ordered
    (flexion, abduction, rotation).  Derived index arrays are precomputed
    so kinematics and dynamics can iterate the tree without lookups.
    """

    segments: tuple[Segment, ...]
    joints: tuple[JointSpec, ...]
    end_effector_segment: str
    end_effector_offset: np.ndarray
    neutral_posture: np.ndarray = None

    def __post_init__(self):
        segments = tuple(self.segments)
        joints = tuple(self.joints)
        object.__setattr__(self, "segments", segments)
        object.__setattr__(self, "joints", joints)
        names = [s.name for s in segments]
        if len(set(names)) != len(names):
            raise ConfigurationError("duplicate segment names")
        seg_index = {name: i for i, name in enumerate(names)}
        if GROUND in seg_index:
            raise ConfigurationError(f"segment name {GROUND!r} is reserved")

        base = [j for j in joints if j.parent_segment == GROUND]
        if len(base) != 1:
            raise ConfigurationError("exactly one joint must attach to ground")
        children_of: dict[str, list[int]] = {name: [] for name in names}
        child_seen: set[str] = set()
        for j in joints:
            if j.child_segment not in seg_index:
                raise ConfigurationError(
                    f"joint {j.name}: unknown child segment {j.child_segment!r}"
                )
            if j.parent_segment != GROUND and j.parent_segment not in seg_index:
                raise ConfigurationError(
                    f"joint {j.name}: unknown parent segment {j.parent_segment!r}"
                )
            if j.child_segment in child_seen:
                raise ConfigurationError(
                    f"segment {j.child_segment} has more than one parent joint"
                )
            child_seen.add(j.child_segment)
        if child_seen != set(names):
            orphans = sorted(set(names) - child_seen)
            raise ConfigurationError(f"segments without a parent joint: {orphans}")

        # Breadth-first order from the base; joints must be listed so that
        # parents precede children (checked, not re-sorted, to keep the
        # documented DoF order authoritative).
        for j in joints:
            if j.parent_segment != GROUND:
                children_of[j.parent_segment].append(seg_index[j.child_segment])
        visited: set[str] = set()
        queue = [base[0].child_segment]
        while queue:
            name = queue.pop(0)
            visited.add(name)
            queue.extend(names[i] for i in children_of[name])
        if visited != set(names):
            raise ConfigurationError("joint graph is not a tree rooted at ground")
        placed: set[str] = {GROUND}
        for j in joints:
            if j.parent_segment not in placed:
                raise ConfigurationError(
                    f"joint {j.name} is listed before its parent {j.parent_segment}"
                )
            placed.add(j.child_segment)

        if self.end_effector_segment not in seg_index:
            raise ConfigurationError(
                f"unknown end-effector segment {self.end_effector_segment!r}"
            )
        object.__setattr__(
            self,
            "end_effector_offset",
            _as_vec3(self.end_effector_offset, "end_effector_offset"),
        )

        n_dof = 3 * len(joints)
        if self.neutral_posture is None:
            neutral = np.zeros(n_dof)
        else:
            neutral = np.asarray(self.neutral_posture, dtype=float).reshape(-1)
            if neutral.shape != (n_dof,):
                raise ConfigurationError(
                    f"neutral_posture must have {n_dof} entries, got {neutral.shape}"
                )
        neutral = neutral.copy()
        neutral.setflags(write=False)
        object.__setattr__(self, "neutral_posture", neutral)

        # Derived arrays (read-only views shared by kinematics/dynamics).
        lower = np.array([d.limit_lower for j in joints for d in j.dof])
        upper = np.array([d.limit_upper for j in joints for d in j.dof])
        stiffness = np.array([d.stiffness for j in joints for d in j.dof])
        damping = np.array([d.damping for j in joints for d in j.dof])
        axes = np.array([[d.axis for d in j.dof] for j in joints])  # (J, 3, 3)
        offsets = np.array([j.offset for j in joints])              # (J, 3)
        parent_index = np.array(
            [-1 if j.parent_segment == GROUND else seg_index[j.parent_segment] for j in joints]
        )
        child_index = np.array([seg_index[j.child_segment] for j in joints])
        for arr in (lower, upper, stiffness, damping, axes, offsets, parent_index, child_index):
            arr.setflags(write=False)
        object.__setattr__(self, "limit_lower", lower)
        object.__setattr__(self, "limit_upper", upper)
        object.__setattr__(self, "stiffness", stiffness)
        object.__setattr__(self, "damping", damping)
        object.__setattr__(self, "joint_axes", axes)
        object.__setattr__(self, "joint_offsets", offsets)
        object.__setattr__(self, "parent_index", parent_index)
        object.__setattr__(self, "child_index", child_index)
        object.__setattr__(self, "segment_index", seg_index)

        bad = np.flatnonzero((neutral < lower - 1e-9) | (neutral > upper + 1e-9))
        if bad.size:
            raise ConfigurationError(
                f"neutral posture violates limits at {', '.join(self.dof_names()[i] for i in bad)}"
            )

    # -- bookkeeping ----------------------------------------------------

    @property
    def n_dof(self) -> int:
        return 3 * len(self.joints)

    def dof_names(self) -> list[str]:
        return [f"{j.name}.{p}" for j in self.joints for p in PLANES]

    def dof_index(self, name: str) -> int:
        try:
            return self.dof_names().index(name)
        except ValueError:
            raise ConfigurationError(f"unknown DoF {name!r}") from None

    def locked_mask(self) -> np.ndarray:
        return np.array([d.locked for j in self.joints for d in j.dof])

    def active_dof(self) -> np.ndarray:
        """Indices of DoF that take part in optimization (not locked)."""
        return np.flatnonzero(~self.locked_mask())

    def segment(self, name: str) -> Segment:
        try:
            return self.segments[self.segment_index[name]]
        except KeyError:
            raise ConfigurationError(f"unknown segment {name!r}") from None

    def joint(self, name: str) -> JointSpec:
        for j in self.joints:
            if j.name == name:
                return j
        raise ConfigurationError(f"unknown joint {name!r}")

    def limit_violations(self, angles) -> np.ndarray:
        """Per-DoF violation magnitude in degrees (0 where inside limits)."""
        angles = np.asarray(angles, dtype=float)
        return np.maximum(0.0, np.maximum(self.limit_lower - angles, angles - self.limit_upper))

    def total_mass(self) -> float:
        return float(sum(s.mass for s in self.segments))

    def __eq__(self, other):
        if not isinstance(other, BodyModel):
            return NotImplemented
        return (
            self.segments == other.segments
            and self.joints == other.joints
            and self.end_effector_segment == other.end_effector_segment
            and np.array_equal(self.end_effector_offset, other.end_effector_offset)
            and np.array_equal(self.neutral_posture, other.neutral_posture)
        )


# -- anthropometric construction -----------------------------------------


@dataclass(frozen=True)
class SegmentFractions:
    """Scaling fractions for one segment of an anthropometric table."""

    mass: float          # fraction of body mass
    length: float        # fraction of stature
    com: float           # fraction of segment length, from the proximal joint
    radius_of_gyration: tuple[float, float, float]  # fractions of length, x/y/z axes
    direction: int       # +1 distal end points up (+z), -1 down (-z)
    parent: str          # parent segment name or "ground"
    joint: str           # joint name connecting parent -> this segment
    attach_long: float = 1.0      # attachment along parent axis, fraction of parent length
    attach_lateral: float = 0.0   # attachment y offset, fraction of stature


@dataclass(frozen=True)
class AnthropometricTable:
    """Segment scaling table plus end-effector designation.

    The entries are ordered; construction follows the listed order so
    parents must precede children.
    """

    entries: tuple[tuple[str, SegmentFractions], ...]
    end_effector: str

    def __post_init__(self):
        if not self.entries:
            raise ConfigurationError("anthropometric table has no segments")
        mass_total = 0.0
        names = set()
        for name, frac in self.entries:
            names.add(name)
            for label, value in (
                ("mass", frac.mass),
                ("length", frac.length),
                ("com", frac.com),
            ):
                if not 0 < value <= 1:
                    raise ConfigurationError(
                        f"table entry {name}: {label} fraction {value} outside (0, 1]"
                    )
            for rg in frac.radius_of_gyration:
                if not 0 < rg <= 1:
                    raise ConfigurationError(
                        f"table entry {name}: radius-of-gyration fraction {rg} outside (0, 1]"
                    )
            if frac.direction not in (-1, 1):
                raise ConfigurationError(f"table entry {name}: direction must be +1 or -1")
            mass_total += frac.mass
        if mass_total > 1 + 1e-9:
            raise ConfigurationError(
                f"table mass fractions sum to {mass_total:.4f} > 1"
            )
        if self.end_effector not in names:
            raise ConfigurationError(
                f"end_effector {self.end_effector!r} is not a table segment"
            )


def build_from_anthropometrics(
    height: float,
    mass: float,
    table: AnthropometricTable | None = None,
    joint_data: dict | None = None,
) -> BodyModel:
    """Scale the anthropometric table by stature and body mass.

    Joint limits, stiffness and damping come from ``joint_data`` (the
    shipped range-of-motion table by default); joints absent from it get
    free +/-180 deg limits with no viscoelasticity.
    """
    if height <= 0 or mass <= 0:
        raise ContractError("height and mass must be > 0")
    if table is None:
        table = default_anthropometric_table()
    if joint_data is None:
        joint_data = _load_joint_table()

    segments = []
    joints = []
    lengths: dict[str, float] = {}
    directions: dict[str, int] = {}
    for name, frac in table.entries:
        length = frac.length * height
        seg_mass = frac.mass * mass
        direction = frac.direction
        com = np.array([0.0, 0.0, direction * frac.com * length])
        inertia = np.diag([seg_mass * (rg * length) ** 2 for rg in frac.radius_of_gyration])
        segments.append(Segment(name, seg_mass, length, com, inertia))
        lengths[name] = length
        directions[name] = direction

        if frac.parent == GROUND:
            offset = np.zeros(3)
        else:
            if frac.parent not in lengths:
                raise ConfigurationError(
                    f"table entry {name}: parent {frac.parent!r} not defined earlier"
                )
            offset = np.array([
                0.0,
                frac.attach_lateral * height,
                directions[frac.parent] * frac.attach_long * lengths[frac.parent],
            ])
        joints.append(
            JointSpec(
                name=frac.joint,
                parent_segment=frac.parent,
                child_segment=name,
                offset=offset,
                dof=_dof_from_table(frac.joint, joint_data),
            )
        )

    ee_name = table.end_effector
    ee_offset = np.array([0.0, 0.0, directions[ee_name] * lengths[ee_name]])
    return BodyModel(
        segments=tuple(segments),
        joints=tuple(joints),
        end_effector_segment=ee_name,
        end_effector_offset=ee_offset,
    )


def _dof_from_table(joint_name: str, joint_data: dict) -> tuple[DoF, DoF, DoF]:
    spec = joint_data.get(joint_name)
    dof = []
    for plane in PLANES:
        if spec is None or plane not in spec:
            dof.append(DoF(plane, _DEFAULT_AXES[plane], -180.0, 180.0))
            continue
        entry = spec[plane]
        dof.append(
            DoF(
                plane=plane,
                axis=entry.get("axis", _DEFAULT_AXES[plane]),
                limit_lower=float(entry["lower"]),
                limit_upper=float(entry["upper"]),
                stiffness=float(entry.get("stiffness", 0.0)),
                damping=float(entry.get("damping", 0.0)),
            )
        )
    return tuple(dof)


def double_leg_masses(model: BodyModel) -> BodyModel:
    """Double thigh and shank mass properties.

    Stands in for the second leg of the single-leg tree.  Not idempotent:
    applying twice quadruples.
    """
    targets = {"thigh", "shank"}
    present = {s.name for s in model.segments}
    missing = targets - present
    if missing:
        raise ConfigurationError(f"model lacks leg segments: {sorted(missing)}")
    segments = tuple(
        Segment(s.name, 2 * s.mass, s.length, s.com_offset, 2 * s.inertia)
        if s.name in targets
        else s
        for s in model.segments
    )
    return BodyModel(
        segments=segments,
        joints=model.joints,
        end_effector_segment=model.end_effector_segment,
        end_effector_offset=model.end_effector_offset,
        neutral_posture=model.neutral_posture,
    )


# -- file I/O --------------------------------------------------------------


def save_model(model: BodyModel, path) -> None:
    """Write a model file (YAML, one section per segment and joint)."""
    doc = {
        "segments": [
            {
                "name": s.name,
                "mass_kg": float(s.mass),
                "length_m": float(s.length),
                "com_offset_m": [float(v) for v in s.com_offset],
                "inertia_kgm2": [[float(v) for v in row] for row in s.inertia],
            }
            for s in model.segments
        ],
        "joints": [
            {
                "name": j.name,
                "parent": j.parent_segment,
                "child": j.child_segment,
                "offset_m": [float(v) for v in j.offset],
                "dof": {
                    d.plane: {
                        "axis": [float(v) for v in d.axis],
                        "limit_lower_deg": float(d.limit_lower),
                        "limit_upper_deg": float(d.limit_upper),
                        "stiffness_nm_per_deg": float(d.stiffness),
                        "damping_nms_per_deg": float(d.damping),
                    }
                    for d in j.dof
                },
            }
            for j in model.joints
        ],
        "end_effector": {
            "segment": model.end_effector_segment,
            "offset_m": [float(v) for v in model.end_effector_offset],
        },
        "neutral_posture_deg": [float(v) for v in model.neutral_posture],
    }
    with open(path, "w") as fh:
        yaml.safe_dump(doc, fh, sort_keys=False)


def load_model(path) -> BodyModel:
    """Read a model file written by :func:`save_model`."""
    with open(path) as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ParseError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: expected a mapping at top level")
    try:
        segments = tuple(
            Segment(
                name=s["name"],
                mass=float(s["mass_kg"]),
                length=float(s["length_m"]),
                com_offset=s["com_offset_m"],
                inertia=s["inertia_kgm2"],
            )
            for s in doc["segments"]
        )
        joints = tuple(
            JointSpec(
                name=j["name"],
                parent_segment=j["parent"],
                child_segment=j["child"],
                offset=j["offset_m"],
                dof=tuple(
                    DoF(
                        plane=plane,
                        axis=j["dof"][plane]["axis"],
                        limit_lower=float(j["dof"][plane]["limit_lower_deg"]),
                        limit_upper=float(j["dof"][plane]["limit_upper_deg"]),
                        stiffness=float(j["dof"][plane]["stiffness_nm_per_deg"]),
                        damping=float(j["dof"][plane]["damping_nms_per_deg"]),
                    )
                    for plane in PLANES
                ),
            )
            for j in doc["joints"]
        )
        ee = doc["end_effector"]
        neutral = doc.get("neutral_posture_deg")
    except KeyError as exc:
        raise ParseError(f"{path}: missing field {exc}") from exc
    return BodyModel(
        segments=segments,
        joints=joints,
        end_effector_segment=ee["segment"],
        end_effector_offset=ee["offset_m"],
        neutral_posture=neutral,
    )


# -- shipped data ----------------------------------------------------------


def _data_text(filename: str) -> str:
    return resources.files("reachopt.data").joinpath(filename).read_text()


def _load_joint_table() -> dict:
    return yaml.safe_load(_data_text("joint_table.yaml"))["joints"]


def default_anthropometric_table() -> AnthropometricTable:
    """The shipped segment-fraction table."""
    doc = yaml.safe_load(_data_text("anthropometry.yaml"))
    entries = []
    for item in doc["segments"]:
        entries.append(
            (
                item["name"],
                SegmentFractions(
                    mass=float(item["mass_fraction"]),
                    length=float(item["length_fraction"]),
                    com=float(item["com_fraction"]),
                    radius_of_gyration=tuple(float(v) for v in item["radius_of_gyration"]),
                    direction=int(item["direction"]),
                    parent=item["parent"],
                    joint=item["joint"],
                    attach_long=float(item.get("attach_long", 1.0)),
                    attach_lateral=float(item.get("attach_lateral", 0.0)),
                ),
            )
        )
    return AnthropometricTable(entries=tuple(entries), end_effector=doc["end_effector"])


DEFAULT_HEIGHT_M = 1.6912
DEFAULT_MASS_KG = 68.59


def default_model() -> BodyModel:
    """The shipped 12-segment model at the default anthropometrics.

    Thigh and shank mass properties are doubled, standing in for the
    contralateral leg of the single-leg tree.
    """
    model = build_from_anthropometrics(DEFAULT_HEIGHT_M, DEFAULT_MASS_KG)
    return double_leg_masses(model)


def load_default_model_file() -> BodyModel:
    """Load the committed default-model data file."""
    with resources.as_file(resources.files("reachopt.data").joinpath("default_model.yaml")) as p:
        return load_model(p)
