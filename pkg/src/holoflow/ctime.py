"""Holomorphic flows in complex time ``t = tau1 + i tau2``.

Along a straight time segment with unit direction ``u`` the solution obeys
``dz/ds = u f(z)`` in arclength ``s``, so every complex-time path reduces to
a sequence of real integrations.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .flow import Field, as_field, trace_separatrix
from .compactify import Kind, infinity_critical_points
from .ode import IntegratorOptions, StepUnderflow, run
from .poly_core import ComplexPoly, to_real_field

__all__ = [
    "TimePath",
    "PathSolution",
    "BlowUp",
    "BranchProximity",
    "integrate_path",
    "SeparatrixFamily",
    "LineFamily",
    "PolylineFamily",
    "SeparatrixGeometry",
    "cosh_separatrices",
    "polynomial_separatrices",
    "Classification",
    "RectangleProbeResult",
    "probe_rectangle",
    "detect_branch_points",
    "SurfaceSample",
    "surface_sample",
    "imaginary_monodromy",
    "bifurcation_offsets",
]

CLOSURE_TOL = 1e-6


class BranchProximity(UserWarning):
    """A Newton-flow denominator came close to zero along the path."""


class BlowUp(StepUnderflow):
    """The solution left every bounded set along the time path."""

    def __init__(self, t: complex, z: complex):
        RuntimeError.__init__(self, f"solution blows up near t={t!r} (z={z!r})")
        self.t = t
        self.z = z
        self.s = abs(t)
        self.h = 0.0


@dataclass(frozen=True)
class TimePath:
    vertices: tuple[complex, ...]

    def __post_init__(self):
        v = tuple(complex(x) for x in self.vertices)
        if len(v) < 1:
            raise ValueError("a time path needs at least one vertex")
        for a, b in zip(v[:-1], v[1:]):
            if a == b:
                raise ValueError("consecutive vertices must be distinct")
        object.__setattr__(self, "vertices", v)

    @property
    def closed(self) -> bool:
        return len(self.vertices) > 2 and self.vertices[0] == self.vertices[-1]

    @classmethod
    def straight(cls, T: complex, start: complex = 0j) -> "TimePath":
        return cls((start,) if T == start else (start, T))

    @classmethod
    def rectangle(cls, T1: float, T2: float) -> "TimePath":
        return cls((0j, complex(T1), complex(T1, T2), complex(0, T2), 0j))

    @classmethod
    def loop(cls, R: float, n: int = 64, center: complex | None = None) -> "TimePath":
        """Closed counterclockwise ``n``-gon inscribed in the circle of radius
        ``R`` about ``center`` (default ``R``, so the loop starts at 0)."""
        if R <= 0:
            raise ValueError("loop radius must be positive")
        c = complex(R) if center is None else complex(center)
        start = cmath.phase(-c) if c != 0 else 0.0
        pts = [c + R * cmath.exp(1j * (start + 2 * math.pi * k / n)) for k in range(n)]
        if center is None:
            pts[0] = 0j
        return cls(tuple(pts) + (pts[0],))

    @classmethod
    def parse(cls, spec: str) -> "TimePath":
        """``straight T`` | ``rect T1 T2`` | ``loop R`` (T may be complex,
        e.g. ``2+3j``)."""
        parts = spec.split()
        if not parts:
            raise ValueError("empty path spec")
        kind, args = parts[0], parts[1:]
        try:
            if kind == "straight" and len(args) == 1:
                return cls.straight(complex(args[0]))
            if kind == "rect" and len(args) == 2:
                return cls.rectangle(float(args[0]), float(args[1]))
            if kind == "loop" and len(args) == 1:
                return cls.loop(float(args[0]))
        except ValueError as exc:
            raise ValueError(f"bad path spec {spec!r}: {exc}") from None
        raise ValueError(f"bad path spec {spec!r}")


@dataclass
class PathSolution:
    times: np.ndarray
    states: np.ndarray
    warnings: list[tuple[complex, complex, float]] = field(default_factory=list)

    @property
    def final(self) -> complex:
        return complex(self.states[-1])

    def __iter__(self):
        return iter(zip(self.times.tolist(), self.states.tolist()))


def integrate_path(
    field: Field | ComplexPoly,
    z0: complex,
    path: TimePath,
    opts: IntegratorOptions | None = None,
    *,
    max_ds: float = 0.05,
    denominator: Callable[[complex], complex] | None = None,
    branch_tol: float = 1e-6,
) -> PathSolution:
    """Solve along a piecewise linear complex-time path.

    ``denominator`` (e.g. ``f'`` for a Newton flow) is monitored and every
    sample where it drops below ``branch_tol`` is recorded as a warning
    ``(t, z, |denominator|)``.
    """
    fun = as_field(field)
    opts = (opts or IntegratorOptions()).with_(max_step=max_ds)
    times = [path.vertices[0]]
    states = [complex(z0)]
    warns: list[tuple[complex, complex, float]] = []
    z = complex(z0)
    for a, b in zip(path.vertices[:-1], path.vertices[1:]):
        seg = b - a
        u = seg / abs(seg)
        res = run(lambda w, u=u: u * fun(w), z, abs(seg), opts, detect_stall=False)
        if res.status == "escaped":
            raise BlowUp(a + u * res.final.s, res.final.z)
        for smp in res.samples[1:]:
            times.append(a + u * smp.s)
            states.append(smp.z)
            if denominator is not None:
                dv = abs(denominator(smp.z))
                if dv < branch_tol:
                    warns.append((times[-1], smp.z, dv))
                    warnings.warn(BranchProximity(f"|denominator| = {dv:.2e} at t={times[-1]!r}"),
                                  stacklevel=2)
        times[-1] = b
        z = res.final.z
    return PathSolution(np.array(times, dtype=complex), np.array(states, dtype=complex), warns)


# ------------------------------------------------------ separatrix sets


class SeparatrixFamily:
    def crossed(self, states: np.ndarray) -> bool:
        raise NotImplementedError


@dataclass(frozen=True)
class LineFamily(SeparatrixFamily):
    """Separatrices given as the zero set of a real indicator function;
    crossing means a strict sign change between consecutive samples."""

    indicator: Callable[[np.ndarray], np.ndarray]

    def crossed(self, states: np.ndarray) -> bool:
        v = np.asarray(self.indicator(np.asarray(states)))
        return bool(np.any(v[:-1] * v[1:] < 0))


def _segments_intersect(p: np.ndarray, q: np.ndarray) -> bool:
    """Any proper intersection between the polylines ``p`` and ``q``."""
    if len(p) < 2 or len(q) < 2:
        return False
    a0, a1 = p[:-1], p[1:]
    # bounding box prefilter on q
    qmin_x, qmax_x = q.real.min(), q.real.max()
    qmin_y, qmax_y = q.imag.min(), q.imag.max()
    keep = ~(
        (np.maximum(a0.real, a1.real) < qmin_x) | (np.minimum(a0.real, a1.real) > qmax_x)
        | (np.maximum(a0.imag, a1.imag) < qmin_y) | (np.minimum(a0.imag, a1.imag) > qmax_y)
    )
    a0, a1 = a0[keep], a1[keep]
    if a0.size == 0:
        return False
    b0, b1 = q[:-1], q[1:]
    cross = lambda u, v: u.real * v.imag - u.imag * v.real
    for s0, s1 in zip(a0, a1):
        d = s1 - s0
        e = b1 - b0
        den = cross(d, e)
        w = b0 - s0
        with np.errstate(divide="ignore", invalid="ignore"):
            t = cross(w, e) / den
            u = cross(w, d) / den
        hit = (den != 0) & (t > 0) & (t < 1) & (u > 0) & (u < 1)
        if np.any(hit):
            return True
    return False


@dataclass(frozen=True)
class PolylineFamily(SeparatrixFamily):
    """Separatrices given as sampled polylines (e.g. traced numerically)."""

    polylines: tuple[np.ndarray, ...]

    def crossed(self, states: np.ndarray) -> bool:
        states = np.asarray(states, dtype=complex)
        return any(_segments_intersect(states, pl) for pl in self.polylines)


@dataclass(frozen=True)
class SeparatrixGeometry:
    real_time: SeparatrixFamily
    imag_time: SeparatrixFamily


def cosh_separatrices() -> SeparatrixGeometry:
    """``z' = cosh(z - 1/2)``: real-time separatrices ``Im z = k pi``,
    imaginary-time separatrices on ``Im z = (k + 1/2) pi``."""
    return SeparatrixGeometry(
        LineFamily(lambda z: np.sin(np.imag(z))),
        LineFamily(lambda z: np.cos(np.imag(z))),
    )


def polynomial_separatrices(f: ComplexPoly, eps: float = 1e-3, t_limit: float = 50.0) -> SeparatrixGeometry:
    """Separatrices traced from the saddles at infinity of ``f`` (real time)
    and of ``i f`` (imaginary time)."""

    def traced(g: ComplexPoly) -> PolylineFamily:
        lines = []
        for eq in infinity_critical_points(to_real_field(g)):
            if eq.kind is Kind.SADDLE:
                lines.append(trace_separatrix(g, eq, eps, t_limit).states)
        return PolylineFamily(tuple(lines))

    return SeparatrixGeometry(traced(f), traced(ComplexPoly(1j * f.coeffs)))


# ------------------------------------------------------- rectangle probe


class Classification(str, Enum):
    NO_SEP = "NoSep"
    IM_SEP = "ImSep"
    RE_SEP = "ReSep"
    BOTH_SEP = "BothSep"


@dataclass
class RectangleProbeResult:
    rectangle: tuple[float, float]
    closure_gap: float
    classification: Classification
    branch_events: list[tuple[complex, complex, float]]
    solution: PathSolution = field(repr=False)

    def to_json(self) -> dict:
        return {
            "rectangle": list(self.rectangle),
            "closure_gap": self.closure_gap,
            "classification": self.classification.value,
            "branch_events": [
                {"t": [t.real, t.imag], "z": [z.real, z.imag], "abs_dfdz": a}
                for t, z, a in self.branch_events
            ],
        }


def probe_rectangle(
    field: Field | ComplexPoly,
    z0: complex,
    T1: float,
    T2: float,
    opts: IntegratorOptions | None = None,
    *,
    separatrices: SeparatrixGeometry | None = None,
    closure_tol: float = CLOSURE_TOL,
    denominator: Callable[[complex], complex] | None = None,
    max_ds: float = 0.02,
) -> RectangleProbeResult:
    """Integrate around ``0 -> T1 -> T1 + i T2 -> i T2 -> 0``.

    The label records which separatrix families the image of the boundary
    crosses: real-time separatrices are crossed along the imaginary-time
    legs and imaginary-time separatrices along the real-time legs.  Without
    a geometry the label is derived from the gap alone (NoSep or BothSep).
    """
    if T1 <= 0 or T2 <= 0:
        raise ValueError("T1 and T2 must be positive")
    sol = integrate_path(field, z0, TimePath.rectangle(T1, T2), opts, max_ds=max_ds,
                         denominator=denominator)
    gap = abs(sol.final - complex(z0))
    if separatrices is None:
        label = Classification.NO_SEP if gap < closure_tol else Classification.BOTH_SEP
    else:
        re = separatrices.real_time.crossed(sol.states)
        im = separatrices.imag_time.crossed(sol.states)
        label = {
            (False, False): Classification.NO_SEP,
            (False, True): Classification.IM_SEP,
            (True, False): Classification.RE_SEP,
            (True, True): Classification.BOTH_SEP,
        }[(re, im)]
    return RectangleProbeResult((float(T1), float(T2)), gap, label, sol.warnings, sol)


# ------------------------------------------------------- branch points


def detect_branch_points(
    f: ComplexPoly,
    region: tuple[float, float, float, float] | None = None,
) -> list[complex]:
    """Zeros of ``f'`` inside ``region = (xmin, xmax, ymin, ymax)`` that are
    not also zeros of ``f``, sorted by (real, imag)."""
    df = f.derivative()
    if df.degree == 0:
        return []
    d2f = df.derivative()
    scale = max(1.0, float(np.max(np.abs(f.coeffs))))
    out = []
    for r in df.roots():
        r = complex(r)
        for _ in range(50):
            num, den = df.eval(r), d2f.eval(r)
            if den == 0:
                break
            step = num / den
            r -= step
            if abs(step) <= 1e-12 * max(1.0, abs(r)):
                break
        if abs(f.eval(r)) <= 1e-10 * scale * max(1.0, abs(r)) ** f.degree:
            continue
        if region is not None:
            x0, x1, y0, y1 = region
            if not (x0 <= r.real <= x1 and y0 <= r.imag <= y1):
                continue
        out.append(r)
    out.sort(key=lambda w: (round(w.real, 12), round(w.imag, 12)))
    return out


# ------------------------------------------------------- surface graphs


@dataclass
class SurfaceSample:
    tau1: np.ndarray
    tau2: np.ndarray
    z: np.ndarray  # shape (len(tau2), len(tau1)), NaN marks a hole

    @property
    def holes(self) -> np.ndarray:
        return np.isnan(self.z.real)

    def rows(self):
        for i, t2 in enumerate(self.tau2):
            for j, t1 in enumerate(self.tau1):
                yield float(t1), float(t2), complex(self.z[i, j])


def surface_sample(
    field: Field | ComplexPoly,
    z0: complex,
    tau1: Sequence[float],
    tau2: Sequence[float],
    opts: IntegratorOptions | None = None,
    *,
    max_ds: float = 0.05,
) -> SurfaceSample:
    """Graph of ``t -> z(t)`` over a lattice.

    The real-time axis row ``tau2 = 0`` is swept first (node to node from
    ``t = 0``), then every column is filled along imaginary time.  ``tau1``
    and ``tau2`` must contain 0.  A node whose segment blows up becomes a
    hole and so does everything beyond it in the same sweep.
    """
    fun = as_field(field)
    t1 = np.asarray(sorted(set(float(v) for v in tau1)))
    t2 = np.asarray(sorted(set(float(v) for v in tau2)))
    if 0.0 not in t1 or 0.0 not in t2:
        raise ValueError("lattice must contain the origin")
    Z = np.full((t2.size, t1.size), np.nan + 1j * np.nan, dtype=complex)
    i0 = int(np.searchsorted(t2, 0.0))
    j0 = int(np.searchsorted(t1, 0.0))
    Z[i0, j0] = complex(z0)

    def sweep(values, start_idx, start_z, make_t, setter):
        for direction in (1, -1):
            z = start_z
            idx = start_idx
            while 0 <= idx + direction < len(values):
                a, b = make_t(values[idx]), make_t(values[idx + direction])
                try:
                    z = integrate_path(fun, z, TimePath((a, b)), opts, max_ds=max_ds).final
                except (StepUnderflow, RuntimeError, OverflowError):
                    break
                idx += direction
                setter(idx, z)

    def set_row(j, z):
        Z[i0, j] = z

    sweep(t1, j0, complex(z0), lambda v: complex(v, 0.0), set_row)
    for j in range(t1.size):
        if np.isnan(Z[i0, j].real):
            continue

        def set_col(i, z, j=j):
            Z[i, j] = z

        sweep(t2, i0, complex(Z[i0, j]), lambda v, j=j: complex(t1[j], v), set_col)
    return SurfaceSample(t1, t2, Z)


def imaginary_monodromy(
    field: Field | ComplexPoly,
    z0: complex,
    tau1: Sequence[float],
    cycle: float = 2 * math.pi,
    opts: IntegratorOptions | None = None,
    *,
    max_ds: float = 0.05,
) -> np.ndarray:
    """State mismatch ``|z(tau1 + i cycle) - z(tau1)|`` of the imaginary-time
    cycle started at each real-time offset (NaN where unreachable).

    For Newton flows ``f(z(t)) = f(z0) exp(-t)`` makes ``2 pi`` the natural
    imaginary cycle; a discrete change of the mismatch as ``tau1`` sweeps is
    the bifurcation signature.
    """
    fun = as_field(field)
    t1 = np.asarray(sorted(float(v) for v in tau1))
    out = np.full(t1.size, np.nan)
    z = complex(z0)
    t_prev = 0.0
    for k, tv in enumerate(t1):
        try:
            if tv != t_prev:
                z = integrate_path(fun, z, TimePath((complex(t_prev), complex(tv))), opts,
                                   max_ds=max_ds).final
            t_prev = tv
        except (StepUnderflow, RuntimeError, OverflowError):
            break
        try:
            zc = integrate_path(fun, z, TimePath((complex(tv), complex(tv, cycle))), opts,
                                max_ds=max_ds).final
        except (StepUnderflow, RuntimeError, OverflowError):
            continue
        out[k] = abs(zc - z)
    return out


def bifurcation_offsets(mismatch: np.ndarray, tau1: Sequence[float], tol: float = CLOSURE_TOL) -> list[float]:
    """Real-time offsets where the imaginary cycle switches between closing
    and not closing (midpoints of the flipping lattice cells)."""
    t1 = np.asarray(sorted(float(v) for v in tau1))
    out = []
    closes = [None if np.isnan(m) else bool(m < tol) for m in mismatch]
    for k in range(1, len(closes)):
        if closes[k - 1] is not None and closes[k] is not None and closes[k - 1] != closes[k]:
            out.append(0.5 * (t1[k - 1] + t1[k]))
    return out
