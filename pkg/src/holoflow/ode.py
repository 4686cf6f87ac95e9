"""Adaptive Dormand-Prince 5(4) integration of autonomous complex ODEs.

The integrator works on a single complex state and a real parameter ``s``.
Callers that need backward or complex time multiply the field by a unit
complex factor before handing it over (``z' = c f(z)``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

__all__ = [
    "IntegratorOptions",
    "StepUnderflow",
    "DormandPrince",
    "Sample",
    "RunResult",
    "run",
]

Field = Callable[[complex], complex]


class StepUnderflow(RuntimeError):
    """Step size dropped below the floor with no termination predicate met."""

    def __init__(self, s: float, z: complex, h: float):
        super().__init__(f"step underflow at s={s:.17g}, z={z!r}, h={h:.3e}")
        self.s = s
        self.z = z
        self.h = h


@dataclass(frozen=True)
class IntegratorOptions:
    rtol: float = 1e-10
    atol: float = 1e-12
    max_step: float = math.inf
    min_step: float = 1e-15
    escape_radius: float = 1e8
    #: escape is also declared once |z|/|f(z)| (a blow-up time scale) drops
    #: below this while |z| > 1; needed for flows that overflow before
    #: reaching ``escape_radius`` (cosh, high degree)
    blowup_horizon: float = 1e-10
    stall_tol: float = 1e-13
    stall_count: int = 3
    max_steps: int = 2_000_000

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("tolerances must be positive")
        if self.escape_radius <= 0:
            raise ValueError("escape_radius must be positive")

    def with_(self, **kw) -> "IntegratorOptions":
        return replace(self, **kw)


# Dormand-Prince coefficients
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = _A[6]
# b - b_hat (5th minus embedded 4th order weights)
_E = (
    71 / 57600,
    0.0,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)
# continuous extension, y(s + x h) = y + h * sum_i k_i * sum_j P[i][j] x^(j+1)
_P = (
    (1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432),
    (0.0, 0.0, 0.0, 0.0),
    (0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799),
    (0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072),
    (0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632),
    (0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844),
    (0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423),
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_NUMERIC_ERRORS = (OverflowError, ZeroDivisionError, FloatingPointError, ValueError)


def _finite(z: complex) -> bool:
    return math.isfinite(z.real) and math.isfinite(z.imag)


class DormandPrince:
    """Single-trajectory stepper.  Not shared between trajectories."""

    def __init__(self, fun: Field, z0: complex, opts: IntegratorOptions, h0: float | None = None):
        self.fun = fun
        self.opts = opts
        self.s = 0.0
        self.z = complex(z0)
        self.f = complex(fun(self.z))
        if not _finite(self.f):
            raise FloatingPointError(f"field is not finite at z0={z0!r}")
        self.h = h0 if h0 is not None else self._initial_step()
        self.k: list[complex] | None = None
        self.s_old = 0.0
        self.z_old = self.z

    def _initial_step(self) -> float:
        o = self.opts
        scale = o.atol + o.rtol * abs(self.z)
        d0 = abs(self.z) / scale
        d1 = abs(self.f) / scale
        h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
        h0 = min(h0, o.max_step)
        try:
            z1 = self.z + h0 * self.f
            f1 = complex(self.fun(z1))
            d2 = abs(f1 - self.f) / scale / h0
        except _NUMERIC_ERRORS:
            return max(h0 * 1e-3, o.min_step * 10)
        if not _finite(f1):
            return max(h0 * 1e-3, o.min_step * 10)
        if max(d1, d2) <= 1e-15:
            h1 = max(1e-6, h0 * 1e-3)
        else:
            h1 = (0.01 / max(d1, d2)) ** (1 / 5)
        return min(100 * h0, h1, o.max_step)

    def _stages(self, z: complex, f0: complex, h: float) -> tuple[complex, list[complex]]:
        fun = self.fun
        k = [f0]
        for i in range(1, 7):
            zi = z
            for a, kj in zip(_A[i], k):
                zi = zi + h * a * kj
            k.append(complex(fun(zi)))
        # row 6 of A equals B, so the stage-6 argument is the new state
        z_new = z
        for b, kj in zip(_B, k):
            z_new = z_new + h * b * kj
        return z_new, k

    def trial(self, z: complex, f0: complex, h: float) -> complex:
        """One step of size ``h`` from ``z`` without error control."""
        return self._stages(z, f0, h)[0]

    def step(self, h_limit: float = math.inf) -> float:
        """Advance by one accepted step, returning the step length taken."""
        o = self.opts
        h = min(self.h, h_limit, o.max_step)
        while True:
            if h < o.min_step and h < h_limit:
                raise StepUnderflow(self.s, self.z, h)
            try:
                z_new, k = self._stages(self.z, self.f, h)
                ok = all(_finite(v) for v in k) and _finite(z_new)
            except _NUMERIC_ERRORS:
                ok = False
            if not ok:
                h *= 0.25
                continue
            err = 0j
            for e, kj in zip(_E, k):
                err += e * kj
            scale = o.atol + o.rtol * max(abs(self.z), abs(z_new))
            en = abs(h * err) / scale
            if en <= 1.0:
                fac = _MAX_FACTOR if en == 0 else min(_MAX_FACTOR, _SAFETY * en ** -0.2)
                self.s_old, self.z_old = self.s, self.z
                self.s += h
                self.z = z_new
                self.f = k[6]
                self.k = k
                self.h = h * max(1.0, fac) if en < 1.0 else h
                return h
            h *= max(_MIN_FACTOR, _SAFETY * en ** -0.2)

    def dense(self, s: float) -> complex:
        """Continuous extension on the last accepted step."""
        if self.k is None:
            return self.z
        h = self.s - self.s_old
        x = (s - self.s_old) / h
        acc = 0j
        for ki, row in zip(self.k, _P):
            q = row[0] * x + row[1] * x**2 + row[2] * x**3 + row[3] * x**4
            acc += ki * q
        return self.z_old + h * acc


@dataclass
class Sample:
    s: float
    z: complex


@dataclass
class RunResult:
    samples: list[Sample]
    status: str  # "done" | "escaped" | "stalled" | "stopped"
    info: dict = field(default_factory=dict)

    @property
    def final(self) -> Sample:
        return self.samples[-1]


def _escape_direction(z_prev: complex, z_last: complex) -> complex:
    # direction q(r) = p + c/r extrapolated in 1/r collapses to the chord
    chord = z_last - z_prev
    if abs(chord) > 0 and abs(z_last) > 0 and abs(chord) > 1e-12 * abs(z_last):
        p = chord / abs(chord)
        # guard: chord must point outward
        if (p * z_last.conjugate()).real > 0:
            return p
    return z_last / abs(z_last)


def run(
    fun: Field,
    z0: complex,
    length: float,
    opts: IntegratorOptions | None = None,
    *,
    on_step: Callable[[DormandPrince], bool] | None = None,
    detect_stall: bool = True,
) -> RunResult:
    """Integrate ``z' = fun(z)`` for ``s`` in ``[0, length]``.

    Terminates early on escape (``|z| > escape_radius`` or blow-up horizon),
    on a persistent equilibrium stall, or when ``on_step`` returns True.
    """
    opts = opts or IntegratorOptions()
    if length < 0:
        raise ValueError("length must be non-negative")
    stepper = DormandPrince(fun, z0, opts)
    samples = [Sample(0.0, stepper.z)]
    stall_run = 0
    for _ in range(opts.max_steps):
        remaining = length - stepper.s
        if remaining <= 1e-14 * max(1.0, length):
            return RunResult(samples, "done")
        try:
            stepper.step(remaining)
        except StepUnderflow:
            z = stepper.z
            if abs(z) > 1 and abs(z) > 1e4 * abs(z0):
                # last-resort escape: step collapse during unbounded growth
                return RunResult(
                    samples,
                    "escaped",
                    {"direction": _escape_direction(samples[-2].z if len(samples) > 1 else z0, z),
                     "s_max": stepper.s, "reason": "underflow"},
                )
            raise
        samples.append(Sample(stepper.s, stepper.z))
        z, f = stepper.z, stepper.f
        az = abs(z)
        if az > opts.escape_radius or (az > 1 and az < opts.blowup_horizon * abs(f)):
            return RunResult(
                samples,
                "escaped",
                {"direction": _escape_direction(samples[-2].z, z), "s_max": stepper.s,
                 "reason": "radius" if az > opts.escape_radius else "horizon"},
            )
        if detect_stall:
            if abs(f) < opts.stall_tol * (1 + az):
                stall_run += 1
                if stall_run >= opts.stall_count:
                    return RunResult(samples, "stalled", {"z": z})
            else:
                stall_run = 0
        if on_step is not None and on_step(stepper):
            return RunResult(samples, "stopped")
    raise RuntimeError("maximum number of steps exceeded")
