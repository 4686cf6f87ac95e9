"""Imaginary-cycle mismatch of the cosh Newton flow as the real-time offset
sweeps, for an anchor off and on the separatrix."""

import argparse
import cmath
import math

import numpy as np

from holoflow.ctime import bifurcation_offsets, imaginary_monodromy


def newton(z: complex) -> complex:
    w = z - 0.5
    return -cmath.cosh(w) / cmath.sinh(w)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tau-max", type=float, default=3.0)
    ap.add_argument("--n", type=int, default=61)
    args = ap.parse_args()
    tau1 = np.linspace(0.0, args.tau_max, args.n)
    for z0 in (3 + 0.3j, 3 + 0j):
        mism = imaginary_monodromy(newton, z0, tau1)
        flips = bifurcation_offsets(mism, tau1)
        tstar = math.log(abs(cmath.cosh(z0 - 0.5)))
        print(f"z0={z0}: flips at {[round(f, 3) for f in flips]}, log|cosh(z0-1/2)| = {tstar:.3f}")
        for t, m in zip(tau1[::6], mism[::6]):
            print(f"   tau1={t:5.2f}  mismatch={m:.3e}")


if __name__ == "__main__":
    main()
