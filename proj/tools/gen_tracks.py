"""Generate the shipped synthetic circuits as x,y,w_left,w_right CSV files.

Each circuit is a periodic cubic spline through hand-placed control points,
sampled every ~0.5 m. Usage: python tools/gen_tracks.py [out_dir]
"""

import pathlib
import sys

import numpy as np
from scipy.interpolate import splev, splprep

WIDTH = 1.1  # half-width [m]
SCALE = 2.0  # control points below are in units of 2 m

CIRCUITS = {
    # long straights joined by a hairpin and a fast sweeper, plus a chicane
    "circuit_a": [
        (0, 0), (20, 0), (40, 0), (52, 4), (56, 14), (50, 24), (40, 26),
        (32, 32), (24, 28), (16, 34), (6, 34), (-6, 30), (-12, 20), (-10, 8),
    ],
    # oval-ish with a tight infield section
    "circuit_b": [
        (0, 0), (25, 0), (45, 2), (55, 12), (50, 24), (38, 26), (30, 18),
        (22, 22), (14, 30), (2, 30), (-8, 22), (-10, 10),
    ],
    # flowing kidney shape with a double-apex corner
    "circuit_c": [
        (0, 0), (15, -4), (30, -2), (42, 6), (46, 18), (38, 28), (26, 26),
        (20, 18), (12, 22), (6, 32), (-6, 32), (-14, 22), (-12, 8),
    ],
}


def sample_circuit(points, spacing=0.5):
    pts = SCALE * np.asarray(points, dtype=float)
    tck, _ = splprep([pts[:, 0], pts[:, 1]], s=0.0, per=1)
    dense = np.linspace(0.0, 1.0, 20000, endpoint=False)
    x, y = splev(dense, tck)
    seg = np.hypot(np.diff(x, append=x[0]), np.diff(y, append=y[0]))
    s = np.concatenate([[0.0], np.cumsum(seg)])
    length = s[-1]
    n = int(round(length / spacing))
    targets = np.linspace(0.0, length, n, endpoint=False)
    u = np.interp(targets, s, np.append(dense, 1.0))
    x, y = splev(u, tck)
    return np.column_stack([x, y]), length


def main():
    out = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "data/tracks")
    out.mkdir(parents=True, exist_ok=True)
    for name, points in CIRCUITS.items():
        xy, length = sample_circuit(points)
        path = out / f"{name}.csv"
        with path.open("w") as f:
            f.write("x_m,y_m,w_left_m,w_right_m\n")
            for x, y in xy:
                f.write(f"{x:.4f},{y:.4f},{WIDTH:.2f},{WIDTH:.2f}\n")
        print(f"{path}: {len(xy)} points, {length:.1f} m")


if __name__ == "__main__":
    main()
