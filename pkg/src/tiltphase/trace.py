"""Line-delimited trace records, one per controller cycle.

A trace file starts with a schema header line `# tiltphase-trace v1` and a
field-name comment, followed by comma-separated records in the fixed field
order below. Floats are written with repr so replays are byte-reproducible.
"""

from __future__ import annotations

from typing import List

from tiltphase.controller import ActivationSet

SCHEMA = "tiltphase-trace v1"

FIELDS = (
    "t", "mu",
    "pxB", "pyB", "pxE", "pyE", "pxd", "pyd",
    "pxa", "pya", "pxs", "pys", "pxc", "pyc",
    "sx", "sy", "hmax", "pxl", "pyl", "pxo", "pyo", "pxS", "pyS", "fg",
    "EL", "ER", "inst", "sd", "flags",
)


def record_values(t: float, act: ActivationSet) -> tuple:
    return (
        t, act.mu,
        act.body_tilt[0], act.body_tilt[1],
        act.expected_tilt[0], act.expected_tilt[1],
        act.deviation[0], act.deviation[1],
        act.arm_tilt[0], act.arm_tilt[1],
        act.support_foot_tilt[0], act.support_foot_tilt[1],
        act.continuous_foot_tilt[0], act.continuous_foot_tilt[1],
        act.hip_shift[0], act.hip_shift[1],
        act.max_hip_height,
        act.lean_tilt[0], act.lean_tilt[1],
        act.swing_out_tilt[0], act.swing_out_tilt[1],
        act.swing_ground_plane[0], act.swing_ground_plane[1],
        act.gait_frequency,
        act.crossing_energy_left, act.crossing_energy_right,
        act.instability, act.deviation_speed,
        "|".join(act.flags),
    )


def format_record(values: tuple) -> str:
    parts = []
    for v in values:
        parts.append(repr(v) if isinstance(v, float) else str(v))
    return ",".join(parts)


def write_trace(path, records: List[tuple], csv: bool = False) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if csv:
            fh.write(",".join(FIELDS) + "\n")
        else:
            fh.write(f"# {SCHEMA}\n")
            fh.write("# " + ",".join(FIELDS) + "\n")
        for rec in records:
            fh.write(format_record(rec) + "\n")


def read_trace(path) -> List[dict]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("t,"):
                continue
            parts = line.split(",")
            if len(parts) != len(FIELDS):
                raise ValueError(
                    f"malformed trace record: {len(parts)} fields, expected {len(FIELDS)}"
                )
            rec = {}
            for name, raw in zip(FIELDS, parts):
                rec[name] = raw if name == "flags" else float(raw)
            out.append(rec)
    return out
