"""Real-time holomorphic flows: trajectories, escape, periodic orbits,
winding numbers, transit times and separatrix tracing."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .compactify import DEFAULT_EPS, InfinityEquilibrium, Kind, separatrix_seed
from .ode import DormandPrince, IntegratorOptions, StepUnderflow, run
from .poly_core import ComplexPoly

__all__ = [
    "TerminationKind",
    "Termination",
    "Trajectory",
    "PeriodicOrbit",
    "StepUnderflow",
    "SingularOnPath",
    "CenterOnOrbit",
    "NotBetweenCenters",
    "as_field",
    "integrate",
    "newton_field",
    "transit_time",
    "winding_number",
    "detect_periodic",
    "trace_separatrix",
    "index_flip_check",
    "locate_separatrix",
]

Field = Callable[[complex], complex]


class SingularOnPath(ValueError):
    pass


class CenterOnOrbit(ValueError):
    pass


class NotBetweenCenters(ValueError):
    pass


class TerminationKind(str, Enum):
    TIME_LIMIT = "time_limit"
    ESCAPED = "escaped"
    PERIOD_CLOSED = "period_closed"
    STALLED = "stalled_at_equilibrium"


@dataclass(frozen=True)
class Termination:
    kind: TerminationKind
    direction: complex | None = None
    t_max: float | None = None
    period: float | None = None
    winding: int | None = None


@dataclass(frozen=True)
class Trajectory:
    """Samples of ``z(t)``.

    ``times`` are flow times, monotone in the direction of integration
    (decreasing for backward runs).
    """

    times: np.ndarray
    states: np.ndarray
    termination: Termination

    @property
    def escaped(self) -> bool:
        return self.termination.kind is TerminationKind.ESCAPED

    def __len__(self):
        return len(self.times)


def as_field(f) -> Field:
    if isinstance(f, ComplexPoly):
        return f.eval
    if callable(f):
        return f
    raise TypeError(f"cannot use {type(f).__name__} as a vector field")


def integrate(
    field: Field | ComplexPoly,
    z0: complex,
    t_span: tuple[float, float],
    opts: IntegratorOptions | None = None,
) -> Trajectory:
    """Integrate ``z' = field(z)`` over ``t_span`` (backward if ``t1 < t0``)."""
    fun = as_field(field)
    t0, t1 = map(float, t_span)
    sign = 1.0 if t1 >= t0 else -1.0
    g = fun if sign > 0 else (lambda z: -fun(z))
    res = run(g, complex(z0), abs(t1 - t0), opts)
    times = np.array([t0 + sign * smp.s for smp in res.samples])
    states = np.array([smp.z for smp in res.samples], dtype=complex)
    if res.status == "escaped":
        term = Termination(TerminationKind.ESCAPED, direction=complex(res.info["direction"]),
                           t_max=float(times[-1]))
    elif res.status == "stalled":
        term = Termination(TerminationKind.STALLED)
    else:
        term = Termination(TerminationKind.TIME_LIMIT)
    return Trajectory(times, states, term)


def newton_field(f: ComplexPoly, desingularized: bool = False) -> Field:
    """``-f/f'``, or the same field times ``|f'|**2``, i.e. ``-f conj(f')``.

    The desingularised field has the same flow lines and is regular at the
    zeros of ``f'``.
    """
    df = f.derivative()
    if df.is_zero():
        raise ValueError("f' vanishes identically")
    fe, dfe = f.eval, df.eval
    if desingularized:
        return lambda z: -fe(z) * dfe(z).conjugate()
    return lambda z: -fe(z) / dfe(z)


def transit_time(f: Field | ComplexPoly, path: Sequence[complex], tol: float = 1e-10) -> complex:
    """Line integral of ``1/f`` along the polyline ``path``."""
    fun = as_field(f)
    pts = [complex(p) for p in path]
    for p in pts:
        if abs(fun(p)) < 1e-12:
            raise SingularOnPath(f"f vanishes near {p!r}")
    total = 0j
    for a, b in zip(pts[:-1], pts[1:]):
        if a == b:
            continue
        seg = b - a
        val, _ = quad(lambda s: seg / fun(a + s * seg), 0.0, 1.0, complex_func=True,
                      epsabs=tol * 1e-2, epsrel=tol, limit=200)
        total += val
    return total


# ------------------------------------------------------------ periodic


@dataclass(frozen=True)
class PeriodicOrbit:
    samples: np.ndarray  # closed polyline, last point is the closing point
    period: float
    gap: float

    @property
    def signed_area(self) -> float:
        z = self.samples
        return 0.5 * float(np.sum((z[:-1].conjugate() * z[1:]).imag))

    @property
    def orientation(self) -> int:
        """+1 for counterclockwise, -1 for clockwise."""
        return 1 if self.signed_area > 0 else -1

    def contains(self, w: complex) -> bool:
        return winding_number(self, w) != 0


def _poly_distance(poly: np.ndarray, w: complex) -> float:
    a, b = poly[:-1], poly[1:]
    ab = b - a
    denom = np.abs(ab) ** 2
    t = np.where(denom > 0, ((w - a) * ab.conjugate()).real / np.where(denom > 0, denom, 1), 0.0)
    t = np.clip(t, 0.0, 1.0)
    return float(np.min(np.abs(a + t * ab - w)))


def winding_number(orbit: PeriodicOrbit | Sequence[complex], center: complex) -> int:
    """Winding number of a closed polyline around ``center``."""
    z = np.asarray(orbit.samples if isinstance(orbit, PeriodicOrbit) else orbit, dtype=complex)
    if z[0] != z[-1]:
        z = np.append(z, z[0])
    scale = max(1.0, float(np.max(np.abs(z - center))))
    if _poly_distance(z, center) < 1e-12 * scale:
        raise CenterOnOrbit(f"{center!r} lies on the orbit")
    w = z - center
    turns = float(np.sum(np.angle(w[1:] / w[:-1]))) / (2 * math.pi)
    n = round(turns)
    if abs(turns - n) >= 0.05:
        raise CenterOnOrbit(f"winding sum {turns:.3f} is not close to an integer")
    return int(n)


def detect_periodic(
    field: Field | ComplexPoly,
    z0: complex,
    opts: IntegratorOptions | None = None,
    *,
    closure_tol: float = 1e-8,
    t_limit: float = 200.0,
    min_excursion: float = 1e-5,
    max_step: float = 0.05,
) -> PeriodicOrbit | None:
    """Integrate from ``z0`` until the orbit closes, escapes or times out.

    Closure is detected on the section through ``z0`` normal to the initial
    velocity: a crossing in the initial flow direction, after the orbit has
    moved at least ``min_excursion`` away, whose gap is below ``closure_tol``
    and whose velocity is aligned (cosine > 0.999) with the initial one.
    """
    fun = as_field(field)
    z0 = complex(z0)
    v0 = complex(fun(z0))
    if abs(v0) < 1e-13 * (1 + abs(z0)):
        return None
    u0 = v0 / abs(v0)
    opts = (opts or IntegratorOptions()).with_(max_step=max_step)
    sec = lambda z: ((z - z0) * u0.conjugate()).real
    state = {"far": 0.0, "hit": None}

    def on_step(st: DormandPrince) -> bool:
        z_old, z_new = st.z_old, st.z
        state["far"] = max(state["far"], abs(z_new - z0))
        if state["far"] < min_excursion:
            return False
        g_old, g_new = sec(z_old), sec(z_new)
        if not (g_old < 0 <= g_new):
            return False
        f_old = fun(z_old)
        h = st.s - st.s_old
        phi = lambda dh: sec(st.trial(z_old, f_old, dh)) if dh > 0 else g_old
        if g_new == 0:
            dh = h
        else:
            dh = brentq(phi, 0.0, h, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        zc = st.trial(z_old, f_old, dh) if dh > 0 else z_old
        vc = complex(fun(zc))
        gap = abs(zc - z0)
        align = (vc * u0.conjugate()).real / abs(vc) if vc != 0 else -1.0
        if gap < closure_tol and align > 0.999:
            state["hit"] = (st.s_old + dh, zc, gap)
            return True
        return False

    try:
        res = run(fun, z0, t_limit, opts, on_step=on_step, detect_stall=True)
    except StepUnderflow:
        return None
    if res.status != "stopped" or state["hit"] is None:
        return None
    period, zc, gap = state["hit"]
    pts = [smp.z for smp in res.samples[:-1]] + [zc, z0]
    return PeriodicOrbit(np.array(pts, dtype=complex), period, gap)


# ---------------------------------------------------------- separatrices


def trace_separatrix(
    f: ComplexPoly,
    eq: InfinityEquilibrium,
    eps: float = DEFAULT_EPS,
    t_limit: float = 50.0,
    opts: IntegratorOptions | None = None,
) -> Trajectory:
    """Trace the separatrix attached to a saddle at infinity.

    Incoming separatrices (``alpha > 0``) are traced in backward time from
    the seed, outgoing ones forward.
    """
    if eq.kind is not Kind.SADDLE:
        raise ValueError("separatrices are traced from saddles only")
    seed = separatrix_seed(eq, eps)
    t1 = -t_limit if eq.alpha > 0 else t_limit
    return integrate(f, seed, (0.0, t1), opts)


def _side_points(fun: Field, z_star: complex, eps: float) -> tuple[complex, complex]:
    v = complex(fun(z_star))
    n = 1j * v / abs(v) if abs(v) > 1e-13 * (1 + abs(z_star)) else 1.0 + 0j
    return z_star + eps * n, z_star - eps * n


def index_flip_check(
    field: Field | ComplexPoly,
    z_star: complex,
    eps: float = 1e-4,
    opts: IntegratorOptions | None = None,
    **periodic_kw,
) -> bool:
    """True iff periodic orbits just either side of ``z_star`` wind in
    opposite senses around their (distinct) centres."""
    fun = as_field(field)
    za, zb = _side_points(fun, complex(z_star), eps)
    oa = detect_periodic(fun, za, opts, **periodic_kw)
    ob = detect_periodic(fun, zb, opts, **periodic_kw)
    if oa is None or ob is None:
        raise NotBetweenCenters("a side point is not on a periodic orbit")
    if _poly_distance(oa.samples, zb) < 1e3 * periodic_kw.get("closure_tol", 1e-8):
        raise NotBetweenCenters("both side points lie on the same orbit")
    try:
        nested = oa.contains(zb) or ob.contains(za)
    except CenterOnOrbit:
        nested = True
    if nested:
        raise NotBetweenCenters("both orbits surround the same centre")
    return oa.orientation * ob.orientation == -1


def locate_separatrix(
    field: Field | ComplexPoly,
    z_lo: complex,
    z_hi: complex,
    tol: float = 1e-7,
    opts: IntegratorOptions | None = None,
    **periodic_kw,
) -> complex:
    """Bisect the segment ``[z_lo, z_hi]`` for the separatrix between two
    families of periodic orbits of opposite orientation.

    A midpoint whose orbit is not periodic (finite escape) is on the
    separatrix and is returned directly.
    """
    fun = as_field(field)
    oa = detect_periodic(fun, z_lo, opts, **periodic_kw)
    ob = detect_periodic(fun, z_hi, opts, **periodic_kw)
    if oa is None or ob is None or oa.orientation == ob.orientation:
        raise NotBetweenCenters("endpoints must be periodic with opposite orientation")
    s_lo = oa.orientation
    a, b = complex(z_lo), complex(z_hi)
    while abs(b - a) > tol:
        m = 0.5 * (a + b)
        om = detect_periodic(fun, m, opts, **periodic_kw)
        if om is None:
            return m
        if om.orientation == s_lo:
            a = m
        else:
            b = m
    return 0.5 * (a + b)
