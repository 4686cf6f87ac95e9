"""How many 2 pi i turns does the tracked root of P_m need to come back?

Imaginary time keeps |product| fixed, so the root runs along one component
of a level curve.  It returns after k turns when that component encloses k
zeros; the enclosed zeros are counted independently from the winding of the
traced curve.
"""

import argparse
import math

import numpy as np

from holoflow.ctime import TimePath
from holoflow.flow import winding_number
from holoflow.xi_newton import build_system, continue_root, load_zeros
from holoflow.cli import DEFAULT_ZEROS


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=int, default=40)
    ap.add_argument("--z0", type=complex, default=2 + 20j)
    ap.add_argument("--max-turns", type=int, default=24)
    ap.add_argument("--zeros", default=str(DEFAULT_ZEROS))
    args = ap.parse_args()
    sysm = build_system(load_zeros(args.zeros), args.m, args.z0)
    for k in range(1, args.max_turns + 1):
        run = continue_root(sysm, TimePath.straight(2j * math.pi * k))
        gap = abs(run.final - sysm.z0)
        print(f"k={k:2d}  |z(2 pi i k) - z0| = {gap:.3e}")
        if gap < 1e-8:
            break
    else:
        print("no return within", args.max_turns, "turns")
        return
    curve = np.asarray(run.roots)
    enclosed = [r for r in sysm.rho if winding_number(curve, r) != 0]
    print(f"returns after {k} turns; level curve encloses {len(enclosed)} zeros")
    print("branch events:", len(run.branch_events))


if __name__ == "__main__":
    main()
