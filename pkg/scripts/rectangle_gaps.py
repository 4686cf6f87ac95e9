"""Closure gaps of complex-time rectangles for z' = cosh(z - 1/2).

For each rectangle the boundary is integrated numerically and the label is
read off the separatrix lines it crosses.  The closed form
z(t) = 1/2 + log tan(pi/4 + (t + c)/2) is singular where tan(...) is 0 or
infinite; the number of those points inside the rectangle is printed next to
the gap, since only an enclosed singularity can open the boundary curve.
"""

import argparse
import cmath
import math

from holoflow.ctime import cosh_separatrices, probe_rectangle
from holoflow.systems import cosh_shift


def singular_times(z0: complex, window: float = 10.0) -> list[complex]:
    c = 2 * cmath.atan(cmath.exp(z0 - 0.5)) - math.pi / 2
    # tan(pi/4 + (t+c)/2) = 0 or inf  <=>  t + c = -pi/2 + k pi
    out = []
    for k in range(-8, 9):
        t = -math.pi / 2 + k * math.pi - c
        if abs(t) < window:
            out.append(t)
    return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--z0", type=complex, default=3 - 0.3j)
    args = ap.parse_args()
    z0 = args.z0
    sing = singular_times(z0)
    print("singular times:", ", ".join(f"{t.real:.4f}{t.imag:+.4f}i" for t in sing))
    geo = cosh_separatrices()
    print(f"{'T1':>6} {'T2':>6} {'label':>8} {'gap':>10} enclosed")
    for T1 in (0.1, 0.5, 1.0, 4.0):
        for T2 in (0.03, 0.1, 0.3, 1.0):
            res = probe_rectangle(cosh_shift, z0, T1, T2, separatrices=geo)
            inside = sum(0 < t.real < T1 and 0 < t.imag < T2 for t in sing)
            print(f"{T1:6.2f} {T2:6.2f} {res.classification.value:>8} {res.closure_gap:10.3e} {inside}")


if __name__ == "__main__":
    main()
