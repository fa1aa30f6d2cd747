"""Motion-capture ingestion: smoothing, differentiation, dynamics.

Recordings are delimiter-separated text: optional ``# key: value``
metadata lines, then a header row ``time,<dof name>,...`` and one row per
sample with angles in degrees at a uniform rate.  Angle columns must
follow the model's DoF order and Euler convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..body_model import BodyModel
from ..controller import JointTrajectory
from ..dynamics import GRAVITY_M_S2, DynamicsOutput, evaluate_movement
from ..errors import ContractError, ParseError
from .smoothing import DEFAULT_ORDER, DEFAULT_WINDOW, savgol_filter


@dataclass(frozen=True)
class MocapSeries:
    """Uniformly sampled joint angles with provenance metadata."""

    times: np.ndarray          # (N,) s
    angles: np.ndarray         # (N, n_dof) deg
    rate_hz: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        angles = np.asarray(self.angles, dtype=float)
        if times.ndim != 1 or angles.ndim != 2 or angles.shape[0] != times.size:
            raise ContractError("times and angles shapes are inconsistent")
        if times.size < 2:
            raise ContractError("a recording needs at least two samples")
        steps = np.diff(times)
        if np.any(steps <= 0):
            raise ContractError("time stamps must be strictly increasing")
        if not np.allclose(steps, steps[0], rtol=1e-6, atol=1e-9):
            raise ContractError("sampling must be uniform")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "angles", angles)


def load_mocap(path, n_dof: int | None = None) -> MocapSeries:
    """Parse a recording file; raises ParseError with a line number."""
    metadata = {}
    header = None
    rows = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if ":" in line:
                    key, _, value = line[1:].partition(":")
                    metadata[key.strip()] = value.strip()
                continue
            if header is None:
                header = [c.strip() for c in line.split(",")]
                if header[0] != "time":
                    raise ParseError(f"{path}:{lineno}: first column must be 'time'")
                continue
            parts = line.split(",")
            if len(parts) != len(header):
                raise ParseError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(parts)}"
                )
            try:
                rows.append([float(v) for v in parts])
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
    if header is None or not rows:
        raise ParseError(f"{path}: no samples found")
    data = np.array(rows)
    times = data[:, 0]
    angles = data[:, 1:]
    if n_dof is not None and angles.shape[1] != n_dof:
        raise ParseError(
            f"{path}: {angles.shape[1]} angle columns, model has {n_dof} DoF"
        )
    rate = 1.0 / float(np.mean(np.diff(times)))
    return MocapSeries(times=times, angles=angles, rate_hz=rate, metadata=metadata)


def differentiate(values: np.ndarray, dt: float):
    """First and second time derivatives: central inside, one-sided at the ends."""
    d1 = np.gradient(values, dt, axis=0)
    d2 = np.gradient(d1, dt, axis=0)
    return d1, d2


def ingest_mocap(
    model: BodyModel,
    path,
    window: int = DEFAULT_WINDOW,
    order: int = DEFAULT_ORDER,
    gravity: float = GRAVITY_M_S2,
) -> tuple[MocapSeries, DynamicsOutput]:
    """Load, smooth, differentiate and run a recording through dynamics."""
    series = load_mocap(path, n_dof=model.n_dof)
    smooth = savgol_filter(series.angles, window=window, order=order)
    dt = float(series.times[1] - series.times[0])
    vel, acc = differentiate(smooth, dt)
    trajectory = JointTrajectory(
        times=series.times, theta=smooth, theta_dot=vel, theta_ddot=acc
    )
    output = evaluate_movement(model, trajectory, gravity)
    return series, output


def save_mocap(series: MocapSeries, path, dof_names) -> None:
    """Write a recording in the documented format."""
    with open(path, "w") as fh:
        for key, value in series.metadata.items():
            fh.write(f"# {key}: {value}\n")
        fh.write("time," + ",".join(dof_names) + "\n")
        for t, row in zip(series.times, series.angles):
            fields = [format(t, ".9g")] + [format(v, ".9g") for v in row]
            fh.write(",".join(fields) + "\n")
