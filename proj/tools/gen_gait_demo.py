"""Writes the synthetic walking demonstration used by the shipped scenarios.

Each joint is a minimum-jerk transfer from its start to its goal angle plus a
periodic gait pattern that fades in over the first second and out over the
last one. The right leg runs half a stride behind the left.
"""

import argparse
import numpy as np

DURATION_S = 7.0
STRIDE_S = 1.4
RAMP_S = 1.0


def smoothstep(x):
    x = np.clip(x, 0.0, 1.0)
    return x**3 * (10.0 - 15.0 * x + 6.0 * x * x)


def envelope(t):
    return smoothstep(t / RAMP_S) * smoothstep((DURATION_S - t) / RAMP_S)


def transfer(t, start, goal):
    return start + (goal - start) * smoothstep(t / DURATION_S)


def joint_angle(kind, t, phase):
    w = 2.0 * np.pi / STRIDE_S
    e = envelope(t)
    if kind == "hip":
        return transfer(t, 0.0, 0.12) + e * (0.30 * np.sin(w * t + phase) + 0.05 * np.sin(2 * w * t + phase))
    if kind == "knee":
        return transfer(t, -0.20, -0.35) + e * (
            -0.30 - 0.30 * np.sin(w * t + phase) - 0.08 * np.sin(2 * w * t + 2 * phase + 1.0))
    if kind == "ankle":
        return transfer(t, 0.0, 0.08) + e * (0.15 * np.sin(w * t + phase + 0.5) + 0.04 * np.sin(2 * w * t + phase))
    raise ValueError(kind)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("output")
    parser.add_argument("--dt", type=float, default=0.002)
    args = parser.parse_args()

    steps = int(round(DURATION_S / args.dt))
    t = np.arange(steps + 1) * args.dt
    columns = {}
    for side, phase in (("l", 0.0), ("r", np.pi)):
        for kind in ("hip", "knee", "ankle"):
            columns[f"{kind}_{side}"] = joint_angle(kind, t, phase)
    names = ["hip_l", "knee_l", "ankle_l", "hip_r", "knee_r", "ankle_r"]
    with open(args.output, "w") as f:
        f.write("t," + ",".join(names) + "\n")
        for k in range(len(t)):
            f.write(f"{t[k]:.6g}," + ",".join(f"{columns[n][k]:.9g}" for n in names) + "\n")


if __name__ == "__main__":
    main()
