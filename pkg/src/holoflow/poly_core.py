"""Complex polynomials and their identification with real planar fields.

A polynomial ``f(z) = sum_k alpha_k z^k`` with ``alpha_k = a_k + i b_k``
defines the real system ``x' = P(x, y)``, ``y' = Q(x, y)`` where
``P + iQ = f(x + iy)``.  Real bivariate polynomials are stored as dense
triangular coefficient arrays ``C[i, j]`` (coefficient of ``x**i * y**j``,
zero whenever ``i + j > d``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from math import comb
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

__all__ = [
    "ComplexPoly",
    "RealPlanarField",
    "xi_eta",
    "to_real_field",
    "parse_poly",
]

#: relative threshold under which a top coefficient counts as zero
LEADING_TOL = 1e-14


def _trim(coeffs: np.ndarray) -> np.ndarray:
    if coeffs.size == 0:
        return np.zeros(1, dtype=complex)
    scale = np.max(np.abs(coeffs))
    if scale == 0.0:
        return np.zeros(1, dtype=complex)
    k = coeffs.size - 1
    while k > 0 and abs(coeffs[k]) < LEADING_TOL * scale:
        k -= 1
    return coeffs[: k + 1].copy()


@dataclass(frozen=True, eq=False)
class ComplexPoly:
    """Dense complex polynomial, coefficients in ascending degree."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = _trim(np.asarray(self.coeffs, dtype=complex).ravel())
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_roots(cls, roots: Sequence[complex], lead: complex = 1.0) -> "ComplexPoly":
        return cls(lead * npoly.polyfromroots(np.asarray(roots, dtype=complex)))

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    @property
    def leading(self) -> complex:
        return complex(self.coeffs[-1])

    def is_zero(self) -> bool:
        return self.degree == 0 and self.coeffs[0] == 0

    def __call__(self, z):
        return self.eval(z)

    def eval(self, z):
        """Horner evaluation; ``z`` may be a scalar or an array."""
        if np.ndim(z) == 0:
            z = complex(z)
            acc = 0j
            for a in self.coeffs[::-1].tolist():
                acc = acc * z + a
            return acc
        z = np.asarray(z, dtype=complex)
        acc = np.zeros_like(z)
        for a in self.coeffs[::-1]:
            acc = acc * z + a
        return acc

    def derivative(self) -> "ComplexPoly":
        if self.degree == 0:
            return ComplexPoly([0.0])
        k = np.arange(1, self.coeffs.size)
        return ComplexPoly(k * self.coeffs[1:])

    def roots(self) -> np.ndarray:
        if self.degree == 0:
            return np.zeros(0, dtype=complex)
        return npoly.polyroots(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, ComplexPoly):
            return NotImplemented
        return self.coeffs.shape == other.coeffs.shape and bool(
            np.all(self.coeffs == other.coeffs)
        )

    def __hash__(self):
        return hash(tuple(self.coeffs.tolist()))

    def __repr__(self):
        terms = ", ".join(f"{c:.6g}" for c in self.coeffs.tolist())
        return f"ComplexPoly([{terms}])"

    def to_json(self) -> list[list[float]]:
        return [[c.real, c.imag] for c in self.coeffs.tolist()]


def parse_poly(text: str) -> ComplexPoly:
    """Parse the CLI syntax: JSON array of ``[re, im]`` pairs, ascending degree.

    Plain numbers are accepted as real coefficients.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"polynomial is not valid JSON: {exc}") from None
    if not isinstance(raw, list) or not raw:
        raise ValueError("polynomial must be a non-empty JSON array")
    coeffs = []
    for entry in raw:
        if isinstance(entry, (int, float)):
            coeffs.append(complex(entry))
        elif isinstance(entry, list) and len(entry) == 2:
            coeffs.append(complex(float(entry[0]), float(entry[1])))
        else:
            raise ValueError(f"bad coefficient entry {entry!r}")
    return ComplexPoly(coeffs)


def xi_eta(k: int, x, y):
    """Real and imaginary parts of ``(x + iy)**k`` from the binomial sums."""
    if k < 0:
        raise ValueError("k must be non-negative")
    xi = 0.0
    eta = 0.0
    for l in range(k // 2 + 1):
        xi = xi + comb(k, 2 * l) * (-1) ** l * x ** (k - 2 * l) * y ** (2 * l)
    for l in range((k - 1) // 2 + 1 if k >= 1 else 0):
        eta = eta + comb(k, 2 * l + 1) * (-1) ** l * x ** (k - 2 * l - 1) * y ** (2 * l + 1)
    return xi, eta


def _xi_eta_coeffs(k: int, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Coefficient arrays of xi_k and eta_k, shape (d+1, d+1)."""
    xi = np.zeros((d + 1, d + 1))
    eta = np.zeros((d + 1, d + 1))
    for l in range(k // 2 + 1):
        xi[k - 2 * l, 2 * l] = comb(k, 2 * l) * (-1) ** l
    for l in range((k - 1) // 2 + 1 if k >= 1 else 0):
        eta[k - 2 * l - 1, 2 * l + 1] = comb(k, 2 * l + 1) * (-1) ** l
    return xi, eta


def _total_degree(c: np.ndarray) -> int:
    n = c.shape[0]
    deg = -1
    for i in range(n):
        for j in range(n - i):
            if c[i, j] != 0:
                deg = max(deg, i + j)
    return max(deg, 0)


@dataclass(frozen=True, eq=False)
class RealPlanarField:
    """Polynomial field ``(P, Q)`` on the real plane.

    ``P`` and ``Q`` are triangular coefficient arrays of common shape
    ``(d+1, d+1)``.  ``holomorphic`` records whether the field came from a
    complex polynomial, in which case ``source`` holds it.
    """

    P: np.ndarray
    Q: np.ndarray
    source: ComplexPoly | None = field(default=None, compare=False)

    def __post_init__(self):
        P = np.array(self.P, dtype=float)
        Q = np.array(self.Q, dtype=float)
        n = max(P.shape[0], Q.shape[0])
        Pn = np.zeros((n, n))
        Qn = np.zeros((n, n))
        Pn[: P.shape[0], : P.shape[1]] = P
        Qn[: Q.shape[0], : Q.shape[1]] = Q
        mask = np.add.outer(np.arange(n), np.arange(n)) >= n
        if np.any(Pn[mask] != 0) or np.any(Qn[mask] != 0):
            raise ValueError("coefficients above the total degree bound")
        d = max(_total_degree(Pn), _total_degree(Qn))
        Pn = Pn[: d + 1, : d + 1].copy()
        Qn = Qn[: d + 1, : d + 1].copy()
        Pn.setflags(write=False)
        Qn.setflags(write=False)
        object.__setattr__(self, "P", Pn)
        object.__setattr__(self, "Q", Qn)

    @property
    def degree(self) -> int:
        return self.P.shape[0] - 1

    @property
    def holomorphic(self) -> bool:
        return self.source is not None

    def homogeneous(self, k: int) -> "RealPlanarField":
        """The degree-``k`` homogeneous part ``(P_k, Q_k)``."""
        d = self.degree
        mask = np.add.outer(np.arange(d + 1), np.arange(d + 1)) == k
        return RealPlanarField(np.where(mask, self.P, 0.0), np.where(mask, self.Q, 0.0))

    def parts(self) -> list["RealPlanarField"]:
        return [self.homogeneous(k) for k in range(self.degree + 1)]

    def __call__(self, x, y):
        return npoly.polyval2d(x, y, self.P), npoly.polyval2d(x, y, self.Q)

    @cached_property
    def top(self) -> "RealPlanarField":
        """The leading homogeneous part ``(P_d, Q_d)``."""
        return self.homogeneous(self.degree)

    def eval_top(self, x, y):
        """``(P_d(x, y), Q_d(x, y))``."""
        return self.top(x, y)

    def jacobian(self, x, y) -> np.ndarray:
        Px = npoly.polyval2d(x, y, npoly.polyder(self.P, axis=0))
        Py = npoly.polyval2d(x, y, npoly.polyder(self.P, axis=1))
        Qx = npoly.polyval2d(x, y, npoly.polyder(self.Q, axis=0))
        Qy = npoly.polyval2d(x, y, npoly.polyder(self.Q, axis=1))
        return np.array([[Px, Py], [Qx, Qy]])


def to_real_field(f: ComplexPoly) -> RealPlanarField:
    """Real identification of ``z' = f(z)``: ``P_k = a_k xi_k - b_k eta_k``,
    ``Q_k = a_k eta_k + b_k xi_k``."""
    d = f.degree
    P = np.zeros((d + 1, d + 1))
    Q = np.zeros((d + 1, d + 1))
    for k, alpha in enumerate(f.coeffs.tolist()):
        xi, eta = _xi_eta_coeffs(k, d)
        a, b = alpha.real, alpha.imag
        P += a * xi - b * eta
        Q += a * eta + b * xi
    return RealPlanarField(P, Q, source=f)
