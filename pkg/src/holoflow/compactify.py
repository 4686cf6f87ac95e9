"""Behaviour of polynomial fields at infinity.

Three compactifications are offered: inverse polar coordinates (only through
the degree bookkeeping of :func:`khat`), the Poincare hemisphere with its
tangent charts, and the unit-ball map ``T``.  Critical points at infinity are
the zeros of ``G(X, Y) = X Q_d(X, Y) - Y P_d(X, Y)`` on the unit circle.

Time-rescaling factors (``Z**(d-1)``, ``X**(d-1)``, the ball factor) are
never materialised; only the rescaled fields are exposed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.optimize import brentq, minimize_scalar

from .poly_core import RealPlanarField

__all__ = [
    "SpherePoint",
    "PolarDegrees",
    "Kind",
    "InfinityEquilibrium",
    "IdentZeroEquator",
    "DegenerateEigenvector",
    "sphere_project",
    "sphere_to_plane",
    "equator_G",
    "equator_field",
    "infinity_critical_points",
    "chart_field_coeffs",
    "tangent_dynamics",
    "chart_jacobian",
    "ball_compactify",
    "ball_inverse",
    "ball_field",
    "ball_boundary_field",
    "khat",
    "separatrix_seed",
    "is_critical_b",
    "is_critical_c",
    "is_critical_d",
]

EQUATOR_ROOT_TOL = 1e-12
CLASSIFY_TOL = 1e-9
DEFAULT_EPS = 1e-3


class IdentZeroEquator(ValueError):
    """``X Q_d - Y P_d`` vanishes identically: the whole equator is critical."""


class DegenerateEigenvector(ValueError):
    """No chart eigenvector leaves the equator."""


@dataclass(frozen=True)
class SpherePoint:
    X: float
    Y: float
    Z: float

    def __post_init__(self):
        if self.Z < 0:
            raise ValueError("point must lie on the closed northern hemisphere")
        if abs(self.X**2 + self.Y**2 + self.Z**2 - 1.0) > 1e-12:
            raise ValueError("point is not on the unit sphere")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.X, self.Y, self.Z)


def sphere_project(x: float, y: float) -> SpherePoint:
    r = math.sqrt(1.0 + x * x + y * y)
    return SpherePoint(x / r, y / r, 1.0 / r)


def sphere_to_plane(p: SpherePoint) -> tuple[float, float]:
    if p.Z <= 0:
        raise ValueError("equator points have no finite image")
    return p.X / p.Z, p.Y / p.Z


# ---------------------------------------------------------------- equator


def equator_G(F: RealPlanarField, X, Y):
    """``X Q_d(X, Y) - Y P_d(X, Y)``."""
    Pd, Qd = F.eval_top(X, Y)
    return X * Qd - Y * Pd


def equator_field(F: RealPlanarField, X: float, Y: float) -> tuple[float, float]:
    """Rescaled dynamics on the equator, ``(-Y G, X G)``."""
    if abs(X * X + Y * Y - 1.0) > 1e-9:
        raise ValueError(f"({X}, {Y}) is not on the unit circle")
    G = equator_G(F, X, Y)
    return -Y * G, X * G


# ------------------------------------------------------- Prop. predicates


def is_critical_b(F: RealPlanarField, p, tol: float = 1e-9) -> bool:
    return abs(equator_G(F, p[0], p[1])) <= tol


def is_critical_c(F: RealPlanarField, p, tol: float = 1e-9) -> bool:
    """``(P_d, Q_d)(p)`` is a real multiple of ``p`` (least-squares alpha)."""
    v = np.array(F.eval_top(p[0], p[1]))
    p = np.asarray(p, dtype=float)
    alpha = float(v @ p) / float(p @ p)
    return bool(np.max(np.abs(v - alpha * p)) <= tol)


def is_critical_d(F: RealPlanarField, p, tol: float = 1e-9) -> bool:
    """``(P_d, Q_d)(p) = (p . (P_d, Q_d)(p)) p``."""
    v = np.array(F.eval_top(p[0], p[1]))
    p = np.asarray(p, dtype=float)
    return bool(np.max(np.abs(v - float(p @ v) * p)) <= tol)


# ------------------------------------------------------------ chart fields


def chart_field_coeffs(F: RealPlanarField, chart: str = "X") -> tuple[np.ndarray, np.ndarray]:
    """Coefficient arrays ``A[i, j]`` (of ``beta**i * gamma**j``) of the
    tangent-chart field.

    For the X chart (``beta = Y/X``, ``gamma = Z/X``) the field is
    ``(Qh - beta Ph, -gamma Ph)`` with ``Ph(beta, gamma) = gamma**d P(1/gamma,
    beta/gamma)`` and likewise ``Qh``.  The Y chart (``beta = X/Y``,
    ``gamma = Z/Y``) swaps the roles of ``P`` and ``Q``.
    """
    d = F.degree
    if chart == "X":
        A, B = F.P, F.Q
    elif chart == "Y":
        A, B = F.Q, F.P
    else:
        raise ValueError("chart must be 'X' or 'Y'")
    n = d + 2
    Ah = np.zeros((n, n))
    Bh = np.zeros((n, n))
    for i in range(d + 1):
        for j in range(d + 1 - i):
            # X chart: x**i y**j -> beta**j gamma**(d-i-j); Y chart swaps x, y
            if chart == "X":
                bi, gj = j, d - i - j
            else:
                bi, gj = i, d - i - j
            Ah[bi, gj] += A[i, j]
            Bh[bi, gj] += B[i, j]
    beta = np.zeros((2, 1))
    beta[1, 0] = 1.0
    gamma = np.zeros((1, 2))
    gamma[0, 1] = 1.0
    f1 = _pad(Bh, n) - _pad(_mul2d(beta, Ah), n)
    f2 = -_pad(_mul2d(gamma, Ah), n)
    return f1, f2


def _mul2d(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros((a.shape[0] + b.shape[0] - 1, a.shape[1] + b.shape[1] - 1))
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            if a[i, j] != 0:
                out[i : i + b.shape[0], j : j + b.shape[1]] += a[i, j] * b
    return out


def _pad(a: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros((n, n))
    m0, m1 = min(a.shape[0], n), min(a.shape[1], n)
    out[:m0, :m1] = a[:m0, :m1]
    return out


def tangent_dynamics(F: RealPlanarField, beta: float, gamma: float, chart: str = "X"):
    f1, f2 = chart_field_coeffs(F, chart)
    return (float(npoly.polyval2d(beta, gamma, f1)), float(npoly.polyval2d(beta, gamma, f2)))


def chart_jacobian(F: RealPlanarField, beta: float, gamma: float = 0.0, chart: str = "X") -> np.ndarray:
    f1, f2 = chart_field_coeffs(F, chart)
    return np.array(
        [
            [npoly.polyval2d(beta, gamma, npoly.polyder(f1, axis=0)),
             npoly.polyval2d(beta, gamma, npoly.polyder(f1, axis=1))],
            [npoly.polyval2d(beta, gamma, npoly.polyder(f2, axis=0)),
             npoly.polyval2d(beta, gamma, npoly.polyder(f2, axis=1))],
        ]
    )


# --------------------------------------------------------------- ball map


def ball_compactify(x) -> np.ndarray:
    """``u = 2 x / (1 + sqrt(1 + 4 |x|**2))``, inverse of :func:`ball_inverse`."""
    x = np.asarray(x, dtype=float)
    r2 = float(x @ x)
    return 2.0 * x / (1.0 + math.sqrt(1.0 + 4.0 * r2))


def ball_inverse(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    s2 = float(u @ u)
    if s2 >= 1.0:
        raise ValueError("u must lie in the open unit ball")
    return u / (1.0 - s2)


def ball_field(F: RealPlanarField, u) -> np.ndarray:
    """Rescaled compactified field on the closed unit ball.

    ``(1-|u|^2)^d [(1+|u|^2) v - 2 (u.v) u]`` with ``v = (P, Q)`` at the
    preimage; on the boundary the polynomial limit ``2 v_d - 2 (u.v_d) u``.
    """
    u = np.asarray(u, dtype=float)
    d = F.degree
    s2 = float(u @ u)
    w = 1.0 - s2
    # (1-|u|^2)^d P(u/w) = sum_k P_k(u) w^(d-k)
    v = np.zeros(2)
    for k, part in enumerate(F.parts()):
        pk, qk = part(u[0], u[1])
        v += np.array([pk, qk]) * w ** (d - k)
    return (1.0 + s2) * v - 2.0 * float(u @ v) * u


def ball_boundary_field(F: RealPlanarField, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    v = np.array(F.eval_top(u[0], u[1]))
    return 2.0 * v - 2.0 * float(u @ v) * u


# ------------------------------------------------------------- polar khat


@dataclass(frozen=True)
class PolarDegrees:
    I: int
    J: int

    @property
    def khat(self) -> int:
        return self.I - self.J


def khat(F: RealPlanarField) -> PolarDegrees:
    """``I`` and ``J`` read off the leading coefficient along ``theta = 0``
    and ``theta = pi/2`` for a field built from a complex polynomial.

    ``I`` is the highest power of ``r`` in ``r'`` and ``J + 1`` the highest
    power in ``r theta'`` that survives on either ray; only the ray cases
    used to tabulate ``I - J`` are inspected.
    """
    if F.source is None:
        raise ValueError("khat needs a field built from a complex polynomial")
    f = F.source
    d = f.degree
    if d < 1:
        raise ValueError("degree must be at least 1")
    a = f.coeffs.real
    b = f.coeffs.imag

    def top(c):
        nz = [k for k in range(d + 1) if c[k] != 0]
        return max(nz) if nz else None

    # theta = 0: r' = sum r^k a_k, r theta' = sum r^k b_k
    # theta = pi/2: r' = sum r^k Q_k(0,1), r theta' = -sum r^k P_k(0,1)
    q01 = np.zeros(d + 1)
    p01 = np.zeros(d + 1)
    for k in range(d + 1):
        if k % 2 == 0:
            xi, eta = (-1) ** (k // 2), 0
        else:
            xi, eta = 0, (-1) ** ((k - 1) // 2)
        q01[k] = a[k] * eta + b[k] * xi
        p01[k] = a[k] * xi - b[k] * eta
    I_cands = [t for t in (top(a), top(q01)) if t is not None]
    J_cands = [t - 1 for t in (top(b), top(p01)) if t is not None]
    I = max(I_cands) if I_cands else 1
    J = max(J_cands) if J_cands else -1
    return PolarDegrees(I, J)


# ----------------------------------------------------- points at infinity


class Kind(str, Enum):
    SADDLE = "saddle"
    NODE = "node"
    DEGENERATE_OTHER = "degenerate-other"


@dataclass(frozen=True)
class InfinityEquilibrium:
    p: tuple[float, float]
    alpha: float
    chart: str  # "X" or "Y"
    beta0: float
    chart_jacobian: np.ndarray
    eigenvalues: tuple[complex, complex]
    kind: Kind
    antipode_flow_reversed: bool
    degree: int

    @property
    def chart_sign(self) -> int:
        """Sign of the chart's defining coordinate at ``p`` (X or Y)."""
        c = self.p[0] if self.chart == "X" else self.p[1]
        return 1 if c > 0 else -1

    def to_json(self) -> dict:
        return {
            "p": [self.p[0], self.p[1]],
            "alpha": self.alpha,
            "chart": self.chart,
            "chart_jacobian": self.chart_jacobian.tolist(),
            "eigenvalues": [[e.real, e.imag] for e in self.eigenvalues],
            "kind": self.kind.value,
            "antipode_flow_reversed": self.antipode_flow_reversed,
        }


def _classify(J: np.ndarray) -> tuple[tuple[complex, complex], Kind]:
    ev = np.linalg.eigvals(J)
    ev = sorted((complex(e) for e in ev), key=lambda e: (e.real, e.imag))
    e1, e2 = ev
    if min(abs(e1), abs(e2)) < CLASSIFY_TOL:
        return (e1, e2), Kind.DEGENERATE_OTHER
    real = abs(e1.imag) < CLASSIFY_TOL and abs(e2.imag) < CLASSIFY_TOL
    if real and e1.real * e2.real < -CLASSIFY_TOL:
        return (e1, e2), Kind.SADDLE
    if real:
        return (e1, e2), Kind.NODE
    return (e1, e2), Kind.DEGENERATE_OTHER


def _equator_angles(F: RealPlanarField) -> list[float]:
    d = F.degree
    g = lambda th: float(equator_G(F, math.cos(th), math.sin(th)))
    n = max(256, 64 * (d + 2))
    # half circle suffices: G(theta + pi) = (-1)**(d+1) G(theta)
    theta0 = -math.pi / (3.0 * n + 1.0)
    grid = theta0 + math.pi * np.arange(n + 1) / n
    vals = np.asarray(equator_G(F, np.cos(grid), np.sin(grid)), dtype=float)
    scale = max(1.0, float(np.max(np.abs(vals))))
    if np.max(np.abs(vals)) < 1e-13 * max(1.0, float(np.max(np.abs(F.P))) + float(np.max(np.abs(F.Q)))):
        raise IdentZeroEquator("X Q_d - Y P_d vanishes identically on the equator")
    roots: list[float] = []
    for i in range(n):
        a, b = grid[i], grid[i + 1]
        va, vb = vals[i], vals[i + 1]
        if va == 0.0:
            roots.append(float(a))
        elif va * vb < 0:
            roots.append(brentq(g, a, b, xtol=EQUATOR_ROOT_TOL, rtol=4 * np.finfo(float).eps))
    # tangential zeros (no sign change)
    for i in range(1, n):
        if abs(vals[i]) <= abs(vals[i - 1]) and abs(vals[i]) <= abs(vals[i + 1]) and vals[i - 1] * vals[i + 1] > 0:
            res = minimize_scalar(lambda t: abs(g(t)), bounds=(grid[i - 1], grid[i + 1]),
                                  method="bounded", options={"xatol": EQUATOR_ROOT_TOL})
            if abs(res.fun) < 1e-10 * scale:
                roots.append(float(res.x))
    roots = [r for r in roots if theta0 <= r < theta0 + math.pi]
    # snap to the coordinate axes when G vanishes there exactly
    for axis, (X, Y) in ((0.0, (1.0, 0.0)), (math.pi / 2, (0.0, 1.0))):
        if float(equator_G(F, X, Y)) == 0.0:
            roots = [axis if abs(r - axis) < 1e-9 else r for r in roots]
    roots.sort()
    dedup: list[float] = []
    for r in roots:
        if not dedup or r - dedup[-1] > 1e-9:
            dedup.append(r)
    return dedup


def _equilibrium(F: RealPlanarField, p: tuple[float, float]) -> InfinityEquilibrium:
    d = F.degree
    Pd, Qd = F.eval_top(p[0], p[1])
    alpha = float(p[0] * Pd + p[1] * Qd)
    if abs(p[0]) >= abs(p[1]):
        chart, beta0 = "X", p[1] / p[0]
    else:
        chart, beta0 = "Y", p[0] / p[1]
    J = chart_jacobian(F, beta0, 0.0, chart)
    ev, kind = _classify(J)
    return InfinityEquilibrium(
        p=p,
        alpha=alpha,
        chart=chart,
        beta0=float(beta0),
        chart_jacobian=J,
        eigenvalues=ev,
        kind=kind,
        antipode_flow_reversed=(d % 2 == 0),
        degree=d,
    )


def infinity_critical_points(F: RealPlanarField) -> list[InfinityEquilibrium]:
    """All critical points at infinity, sorted by angle in ``[0, 2 pi)``."""
    if F.degree < 1:
        raise ValueError("degree must be at least 1")
    pts = []
    for th in _equator_angles(F):
        p = (math.cos(th), math.sin(th))
        pts.append(p)
        pts.append((-p[0], -p[1]))
    # exact zeros on the axes stay exact
    cleaned = []
    for p in pts:
        x, y = p
        if abs(x) < 1e-15:
            x, y = 0.0, math.copysign(1.0, y)
        if abs(y) < 1e-15:
            x, y = math.copysign(1.0, x), 0.0
        cleaned.append((x, y))
    cleaned.sort(key=lambda q: math.atan2(q[1], q[0]) % (2 * math.pi))
    return [_equilibrium(F, p) for p in cleaned]


# -------------------------------------------------------- separatrix seed


def separatrix_seed(eq: InfinityEquilibrium, eps: float = DEFAULT_EPS, *, return_sphere: bool = False):
    """Finite-plane point ``O(1/eps)`` from the origin on (to ``O(eps**2)``)
    the separatrix attached to ``eq``.

    The chart point ``(beta0, 0)`` is pushed by ``eps`` along the Jacobian
    eigenvector with a non-zero ``gamma`` component, oriented into the
    northern hemisphere.
    """
    if eq.kind is not Kind.SADDLE:
        raise ValueError(f"seed requested for a non-saddle ({eq.kind.value})")
    if not 0 < eps <= 0.1:
        raise ValueError("eps must lie in (0, 0.1]")
    J = eq.chart_jacobian
    w, V = np.linalg.eig(J)
    cand = [np.real_if_close(V[:, i]).astype(float) for i in range(2)]
    cand = [v for v in cand if abs(v[1]) > 1e-12 * np.linalg.norm(v)]
    if not cand:
        raise DegenerateEigenvector("both eigenvectors are tangent to the equator")
    v = max(cand, key=lambda v: abs(v[1]) / np.linalg.norm(v))
    v = v / np.linalg.norm(v)
    # gamma = Z / (chart coordinate) must carry the sign of that coordinate
    s = eq.chart_sign
    if v[1] * s < 0:
        v = -v
    b, g = eq.beta0 + eps * v[0], eps * v[1]
    norm = math.sqrt(1.0 + b * b + g * g)
    if eq.chart == "X":
        X, Y, Z = s / norm, s * b / norm, s * g / norm
    else:
        X, Y, Z = s * b / norm, s / norm, s * g / norm
    point = SpherePoint(float(X), float(Y), float(Z))
    x, y = sphere_to_plane(point)
    z = complex(x, y)
    return (z, point) if return_sphere else z
