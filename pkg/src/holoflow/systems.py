"""Named systems used by the command line and the regression tests."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .compactify import Kind, infinity_critical_points
from .flow import trace_separatrix
from .poly_core import ComplexPoly, parse_poly, to_real_field

__all__ = ["System", "resolve_system", "BUILTINS", "cosh_shift"]

BUILTINS = ("z2p1", "cosh-shift", "xi-approx")


def cosh_shift(z: complex) -> complex:
    return cmath.cosh(z - 0.5)


@dataclass(frozen=True)
class System:
    name: str
    field: Callable[[complex], complex]
    poly: ComplexPoly | None = None
    rho: np.ndarray | None = None  # zeros of the xi approximant

    @property
    def is_polynomial(self) -> bool:
        return self.poly is not None

    def equilibria(self, window: tuple[float, float, float, float]) -> list[complex]:
        x0, x1, y0, y1 = window
        if self.poly is not None:
            pts = [complex(r) for r in self.poly.roots()]
        elif self.name == "cosh-shift":
            k0 = math.floor(y0 / math.pi - 0.5)
            k1 = math.ceil(y1 / math.pi - 0.5)
            pts = [complex(0.5, (k + 0.5) * math.pi) for k in range(k0, k1 + 1)]
        else:
            pts = [complex(r) for r in self.rho]
        pts = [z for z in pts if x0 <= z.real <= x1 and y0 <= z.imag <= y1]
        return sorted(pts, key=lambda z: (z.imag, z.real))

    def separatrices(self, window, eps: float = 1e-3, t_limit: float = 50.0,
                     opts=None) -> list[np.ndarray]:
        """Polynomials: traced from the saddles at infinity.  cosh-shift: the
        lines ``Im z = k pi`` across the window.  Otherwise none."""
        x0, x1, y0, y1 = window
        if self.poly is not None:
            if self.poly.degree < 2:
                return []
            out = []
            for eq in infinity_critical_points(to_real_field(self.poly)):
                if eq.kind is Kind.SADDLE:
                    out.append(trace_separatrix(self.poly, eq, eps, t_limit, opts).states)
            return out
        if self.name == "cosh-shift":
            k0, k1 = math.ceil(y0 / math.pi), math.floor(y1 / math.pi)
            return [np.array([complex(x0, k * math.pi), complex(x1, k * math.pi)])
                    for k in range(k0, k1 + 1)]
        return []


def resolve_system(spec: str, *, zeros=None, m: int | None = None) -> System:
    """``z2p1``, ``cosh-shift``, ``xi-approx`` (needs a zero table and ``m``)
    or a JSON coefficient list."""
    spec = spec.strip()
    if spec == "z2p1":
        p = ComplexPoly([1, 0, 1])
        return System("z2p1", p.eval, p)
    if spec == "cosh-shift":
        return System("cosh-shift", cosh_shift)
    if spec == "xi-approx":
        if zeros is None or m is None:
            raise ValueError("xi-approx needs a zero table and m")
        if m <= 0 or m % 2 or m // 2 > zeros.count:
            raise ValueError("m must be even with m/2 <= number of ordinates")
        rho = zeros.zeros(m // 2)

        def newton(z: complex) -> complex:
            return -1.0 / complex(np.sum(1.0 / (z - rho)))

        return System("xi-approx", newton, rho=rho)
    p = parse_poly(spec)
    return System(spec, p.eval, p)
