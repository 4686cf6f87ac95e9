"""Attractor counts of the xi approximant portrait under two readings of the
window [-7,8] x [-1,30]i: as the state region of the anchors, and as the
time set with the anchor region widened to hold every retained zero."""

import argparse
import time

from holoflow.cli import DEFAULT_ZEROS
from holoflow.xi_newton import TIME_SET, default_portrait_region, flow_portrait, load_zeros


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", default="60x120")
    ap.add_argument("--zeros", default=str(DEFAULT_ZEROS))
    args = ap.parse_args()
    nx, ny = map(int, args.grid.split("x"))
    zt = load_zeros(args.zeros)
    for m in (4, 40):
        for name, region in (("state window", TIME_SET), ("time set", default_portrait_region(zt, m))):
            t0 = time.perf_counter()
            p = flow_portrait(zt, m, region=region, grid=(nx, ny))
            dt = time.perf_counter() - t0
            print(f"m={m:3d}  {name:12s} region={region}  attractors={len(p.attractors()):2d}  "
                  f"failures={len(p.failures)}  {dt:.1f} s")


if __name__ == "__main__":
    main()
