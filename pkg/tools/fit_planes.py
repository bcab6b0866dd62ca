"""Fit and bundle nadir planes for the shipped systems.

Run from the repository root:  python3 tools/fit_planes.py [system ...]
Writes src/hvdc_spc/data/<system>_planes.json with the unilateral and the
bilateral plane of every area.
"""

from __future__ import annotations

import sys
import time
from pathlib import Path

from hvdc_spc.nadir import BILATERAL, UNILATERAL, fit_area_plane, save_planes
from hvdc_spc.system import load_system

DATA = Path(__file__).resolve().parents[1] / "src" / "hvdc_spc" / "data"
SYSTEMS = ("two_area", "two_area_small", "three_area")


def main(names):
    for name in names or SYSTEMS:
        spec = load_system(DATA / f"{name}.json")
        planes = []
        for area in spec.area_ids:
            for scheme in (UNILATERAL, BILATERAL):
                t0 = time.perf_counter()
                p = fit_area_plane(spec, area, scheme)
                d = p.diagnostics
                print(f"{name} {area} {scheme}: err={d['mean_relative_error']:.4f} "
                      f"ff={d['false_feasible_count']} ({time.perf_counter() - t0:.1f} s)", flush=True)
                planes.append(p)
        save_planes(planes, DATA / f"{name}_planes.json", system=spec.name)


if __name__ == "__main__":
    main(sys.argv[1:])
