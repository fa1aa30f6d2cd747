"""Output files for runs and strategy comparisons.

All files are comma-separated text with a header row, floats at 9
significant digits, written in fixed order: identical runs produce
byte-identical files.  Timing never enters per-run files (it is not
reproducible); the comparison grid carries it as an explicitly
non-reproducible column.
"""

from __future__ import annotations

import os

import numpy as np

from ..dynamics import _trapz


def _fmt(value) -> str:
    return format(float(value), ".9g")


def _write_rows(path, header, rows):
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def emit_outputs(result, out_dir) -> None:
    """Write time series, summary, optimizer log and reference path."""
    os.makedirs(out_dir, exist_ok=True)
    dyn = result.dynamics
    traj = result.trajectory
    names = result.model.dof_names()

    header = (
        ["time_s"]
        + [f"q_{n}_deg" for n in names]
        + [f"tau_{n}_Nm" for n in names]
        + [f"p_{n}_W" for n in names]
        + ["total_abs_power_W", "ee_x_m", "ee_y_m", "ee_z_m", "com_x_m", "com_y_m", "com_z_m"]
    )
    rows = []
    for i, t in enumerate(dyn.times):
        row = (
            [_fmt(t)]
            + [_fmt(v) for v in traj.theta[i]]
            + [_fmt(v) for v in dyn.torque[i]]
            + [_fmt(v) for v in dyn.power[i]]
            + [_fmt(dyn.total_abs_power[i])]
            + [_fmt(v) for v in dyn.end_effector[i]]
            + [_fmt(v) for v in dyn.com[i]]
        )
        rows.append(row)
    _write_rows(os.path.join(out_dir, "timeseries.csv"), header, rows)

    summary_rows = []
    for key, value in result.summary.items():
        text = value if isinstance(value, str) else _fmt(value)
        summary_rows.append([key, text])
    _write_rows(os.path.join(out_dir, "summary.csv"), ["key", "value"], summary_rows)

    log_rows = [
        [
            str(rec.iteration),
            _fmt(rec.cost),
            _fmt(rec.step_norm),
            _fmt(rec.sigma),
            _fmt(rec.alpha),
            _fmt(rec.error_norm),
        ]
        for rec in result.opt.history
    ]
    _write_rows(
        os.path.join(out_dir, "optimizer_log.csv"),
        ["iteration", "cost", "step_norm", "sigma", "alpha", "error_norm"],
        log_rows,
    )

    ref = result.min_jerk
    ref_rows = []
    for i, t in enumerate(ref["times"]):
        ref_rows.append(
            [_fmt(t)]
            + [_fmt(v) for v in ref["position"][i]]
            + [_fmt(v) for v in ref["velocity"][i]]
            + [_fmt(v) for v in ref["acceleration"][i]]
        )
    _write_rows(
        os.path.join(out_dir, "minjerk.csv"),
        ["time_s", "x_m", "y_m", "z_m", "vx_m_s", "vy_m_s", "vz_m_s", "ax_m_s2", "ay_m_s2", "az_m_s2"],
        ref_rows,
    )


_COMPARISON_COLUMNS = (
    "trunk_flexion_deg",
    "strategy",
    "status",
    "total_power_squared_J2",
    "final_com_squared_m2",
    "cpu_time_s",
    "total_energy_J",
    "com_disp_ap_mm",
    "com_disp_ml_mm",
    "com_disp_vert_mm",
    "final_error_m",
    "p6_norm",
)


def write_comparison(rows, out_dir) -> None:
    """Write the strategy-by-target grid (CSV plus a plain-text table)."""
    os.makedirs(out_dir, exist_ok=True)
    csv_rows = []
    for row in rows:
        csv_row = []
        for col in _COMPARISON_COLUMNS:
            value = row.get(col, "")
            if isinstance(value, str) or value == "":
                csv_row.append(str(value))
            else:
                csv_row.append(_fmt(value))
        csv_rows.append(csv_row)
    _write_rows(
        os.path.join(out_dir, "comparison.csv"), list(_COMPARISON_COLUMNS), csv_rows
    )

    lines = []
    widths = [max(len(col), 12) for col in _COMPARISON_COLUMNS]
    lines.append(
        "  ".join(col.ljust(w) for col, w in zip(_COMPARISON_COLUMNS, widths))
    )
    for csv_row in csv_rows:
        lines.append("  ".join(v.ljust(w) for v, w in zip(csv_row, widths)))
    with open(os.path.join(out_dir, "comparison.txt"), "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def recompute_total_energy(timeseries_path) -> float:
    """Trapezoid integral of the emitted total-power column (cross-check)."""
    data = np.genfromtxt(timeseries_path, delimiter=",", names=True)
    return float(_trapz(data["total_abs_power_W"], data["time_s"]))
