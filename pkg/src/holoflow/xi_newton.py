"""Finite zero-product approximation of the Newton flow of the Riemann xi
function.

With zeros ``rho_n = 1/2 +- i t_n`` the time-``T`` state of the Newton flow
started at ``z0`` solves

    prod_n (z - rho_n) / (z0 - rho_n) = exp(-T).

Roots are tracked in log space: ``L(z) = sum_n log((z - rho_n)/(z0 - rho_n))``
is continued along the root path so that ``L(z(T)) = -T`` holds exactly
rather than modulo ``2 pi i``.
"""

from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable, Sequence, TextIO

import numpy as np

from .ctime import TimePath

__all__ = [
    "ParseError",
    "MonotonicityError",
    "AnchorIsZero",
    "BranchPointHit",
    "ContinuationUnderflow",
    "ZeroTable",
    "load_zeros",
    "ApproxSystem",
    "build_system",
    "ContinuationOptions",
    "ContinuationRun",
    "continue_root",
    "InvariantReport",
    "invariant_report",
    "Portrait",
    "flow_portrait",
    "default_portrait_region",
    "TIME_SET",
]

#: time set over which portraits are solved
TIME_SET = (-7.0, 8.0, -1.0, 30.0)


class ParseError(ValueError):
    def __init__(self, msg: str, line: int):
        super().__init__(f"line {line}: {msg}")
        self.line = line


class MonotonicityError(ValueError):
    def __init__(self, msg: str, line: int):
        super().__init__(f"line {line}: {msg}")
        self.line = line


class AnchorIsZero(ValueError):
    pass


class BranchPointHit(RuntimeError):
    """Continuation stalled at a critical point of the product."""

    def __init__(self, T: complex, z: complex, nearest: complex, dpdz: float):
        super().__init__(f"branch point near z={nearest!r} (T={T!r}, |dP/dz|={dpdz:.3e})")
        self.T = T
        self.z = z
        self.nearest = nearest
        self.dpdz = dpdz


class ContinuationUnderflow(RuntimeError):
    def __init__(self, T: complex, z: complex, dT: float):
        super().__init__(f"time step underflow at T={T!r}, z={z!r}, dT={dT:.3e}")
        self.T = T
        self.z = z
        self.dT = dT


# ---------------------------------------------------------------- zeros


@dataclass(frozen=True)
class ZeroTable:
    ordinates: tuple[float, ...]

    @property
    def count(self) -> int:
        return len(self.ordinates)

    def zeros(self, n: int | None = None) -> np.ndarray:
        """``1/2 + i t_k`` and conjugates for the first ``n`` ordinates,
        interleaved as ``rho_1, conj(rho_1), rho_2, ...``."""
        t = np.asarray(self.ordinates[: self.count if n is None else n])
        out = np.empty(2 * t.size, dtype=complex)
        out[0::2] = 0.5 + 1j * t
        out[1::2] = 0.5 - 1j * t
        return out


def _lines(source) -> Iterable[str]:
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            data = fh.read()
    elif isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    else:
        data = source.read()
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"not UTF-8 ({exc.reason})", 0) from None
    return io.StringIO(data)


def load_zeros(source: BinaryIO | TextIO | bytes | str | os.PathLike) -> ZeroTable:
    """Read ordinates, one decimal per line; blank and ``#`` lines skipped."""
    values: list[float] = []
    for lineno, raw in enumerate(_lines(source), start=1):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        try:
            v = float(text)
        except ValueError:
            raise ParseError(f"not a decimal number: {text!r}", lineno) from None
        if not math.isfinite(v) or v <= 0:
            raise ParseError(f"ordinate must be positive and finite, got {text!r}", lineno)
        if values and v <= values[-1]:
            raise MonotonicityError(f"{v!r} does not exceed the previous ordinate {values[-1]!r}",
                                    lineno)
        values.append(v)
    if not values:
        raise ParseError("no ordinates found", 0)
    return ZeroTable(tuple(values))


# --------------------------------------------------------------- system


def _pair_logsum(z: complex, rho: np.ndarray) -> complex:
    # conjugate pairs are summed first so real anchors give real sums
    lg = np.log(z - rho)
    return complex(np.sum(lg[0::2] + lg[1::2]))


@dataclass(frozen=True, eq=False)
class ApproxSystem:
    m: int
    rho: np.ndarray
    z0: complex
    log_denom: complex  # sum of principal logs of z0 - rho_n

    @property
    def denom(self) -> complex:
        return complex(np.exp(self.log_denom))

    def log_ratio(self, z: complex) -> complex:
        """Principal-branch ``sum log(z - rho) - log_denom``."""
        return _pair_logsum(complex(z), self.rho) - self.log_denom

    def ratio(self, z: complex) -> complex:
        return complex(np.exp(self.log_ratio(z)))

    def dlog(self, z: complex) -> complex:
        """``sum 1/(z - rho_n)``, the logarithmic derivative of the product."""
        return complex(np.sum(1.0 / (complex(z) - self.rho)))

    def P(self, z: complex, T: complex) -> complex:
        return self.ratio(z) - complex(np.exp(-T))

    def dPdz(self, z: complex) -> complex:
        return self.ratio(z) * self.dlog(z)

    def newton_field(self, z: complex) -> complex:
        """Newton field of the product, ``-1 / sum 1/(z - rho_n)``."""
        return -1.0 / self.dlog(z)

    def critical_point_near(self, z: complex, iters: int = 60) -> complex:
        """Zero of ``dlog`` (critical point of the product) reached by
        Newton's method from ``z``."""
        w = complex(z)
        for _ in range(iters):
            g = self.dlog(w)
            dg = -complex(np.sum(1.0 / (w - self.rho) ** 2))
            if dg == 0:
                break
            step = g / dg
            w -= step
            if abs(step) < 1e-14 * max(1.0, abs(w)):
                break
        return w


def build_system(zt: ZeroTable, m: int, z0: complex) -> ApproxSystem:
    if m <= 0 or m % 2:
        raise ValueError("m must be a positive even integer")
    if m // 2 > zt.count:
        raise ValueError(f"m/2 = {m // 2} exceeds the {zt.count} available ordinates")
    z0 = complex(z0)
    rho = zt.zeros(m // 2)
    rho.setflags(write=False)
    if np.min(np.abs(z0 - rho)) <= 1e-15 * max(1.0, abs(z0)):
        raise AnchorIsZero(f"anchor {z0!r} coincides with a zero")
    return ApproxSystem(m, rho, z0, _pair_logsum(z0, rho))


# ---------------------------------------------------------- continuation


@dataclass(frozen=True)
class ContinuationOptions:
    max_dT: float = 0.02
    min_dT: float = 1e-12
    #: branch events fire when |sum 1/(z-rho)| < branch_tol * sum |1/(z-rho)|
    branch_tol: float = 1e-8
    newton_tol: float = 1e-13
    max_newton: int = 8

    def __post_init__(self):
        if not (self.max_dT > 0 and self.min_dT > 0 and self.branch_tol > 0 and self.newton_tol > 0):
            raise ValueError("continuation options must be positive")


@dataclass
class ContinuationRun:
    t_samples: list[complex] = field(default_factory=list)
    roots: list[complex] = field(default_factory=list)
    branch_events: list[tuple[complex, complex, float]] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)
    log_values: list[complex] = field(default_factory=list)  # continued L(z(T))

    @property
    def final(self) -> complex:
        return self.roots[-1]

    def record(self, sysm: ApproxSystem, T: complex, z: complex, L: complex):
        self.t_samples.append(T)
        self.roots.append(z)
        self.log_values.append(L)
        self.residuals.append(abs(sysm.P(z, T)))


def _relative_dlog(sysm: ApproxSystem, z: complex) -> tuple[complex, float]:
    inv = 1.0 / (z - sysm.rho)
    return complex(np.sum(inv)), float(np.sum(np.abs(inv)))


def continue_root(
    sysm: ApproxSystem,
    path: TimePath,
    opts: ContinuationOptions | None = None,
) -> ContinuationRun:
    """Track the root of ``P_m(z; T, z0)`` from ``z(0) = z0`` along ``path``.

    Euler predictor on ``L(z) = -T``, Newton corrector on the continued log,
    step halving on failure.  Every accepted step is recorded.
    """
    o = opts or ContinuationOptions()
    if path.vertices[0] != 0:
        raise ValueError("continuation paths start at T = 0")
    run = ContinuationRun()
    z, L, T = sysm.z0, 0j, 0j
    run.record(sysm, T, z, L)
    rho = sysm.rho
    h = o.max_dT
    for a, b in zip(path.vertices[:-1], path.vertices[1:]):
        seg = b - a
        length = abs(seg)
        u = seg / length
        s = 0.0
        while s < length:
            h = min(h, o.max_dT, length - s)
            last = s + h >= length * (1 - 1e-15)
            T_new = b if last else a + u * (s + h)
            dT = T_new - T
            d = sysm.dlog(z)
            zp = z - (L + T_new) / d
            w = zp
            ok = False
            Lw = L
            for _ in range(o.max_newton):
                q = (w - rho) / (z - rho)
                if np.any(np.abs(q - 1) >= 0.5):
                    break
                Lw = L + complex(np.sum(np.log(q)))
                F = Lw + T_new
                if abs(F) <= o.newton_tol * max(1.0, abs(T_new)):
                    ok = True
                    break
                w = w - F / sysm.dlog(w)
            if ok and abs(w - zp) > 0.25 * abs(zp - z) + 1e-12 * max(1.0, abs(z)):
                ok = False
            if not ok:
                h *= 0.5
                if h < o.min_dT:
                    dl, sl = _relative_dlog(sysm, z)
                    if abs(dl) < max(o.branch_tol, 1e-3) * sl:
                        raise BranchPointHit(T, z, sysm.critical_point_near(z),
                                             abs(sysm.dPdz(z)))
                    raise ContinuationUnderflow(T, z, h)
                continue
            z, L, T = w, Lw, T_new
            s = length if last else s + h
            run.record(sysm, T, z, L)
            dl, sl = _relative_dlog(sysm, z)
            if abs(dl) < o.branch_tol * sl:
                run.branch_events.append((T, z, abs(sysm.dPdz(z))))
            h = min(2 * h, o.max_dT)
    return run


# ------------------------------------------------------------ invariants


@dataclass(frozen=True)
class InvariantReport:
    phase_drift: float
    modulus_drift: float
    max_residual: float
    real_segments: int
    imag_segments: int

    def to_json(self) -> dict:
        return {
            "phase_drift_rad": self.phase_drift,
            "modulus_drift_rel": self.modulus_drift,
            "max_residual": self.max_residual,
            "real_segments": self.real_segments,
            "imag_segments": self.imag_segments,
        }


def invariant_report(run: ContinuationRun, sysm: ApproxSystem) -> InvariantReport:
    """Phase drift of the product along real-time stretches and relative
    modulus drift along imaginary-time stretches."""
    T = np.asarray(run.t_samples, dtype=complex)
    if T.size < 2:
        res = max(run.residuals, default=0.0)
        return InvariantReport(0.0, 0.0, res, 0, 0)
    # product relative to the anchor; the continued log carries it exactly
    logs = np.array([_pair_logsum(z, sysm.rho) for z in run.roots])
    dT = np.diff(T)
    kind = np.where(np.abs(dT.imag) <= 1e-14 * np.abs(dT), "r",
                    np.where(np.abs(dT.real) <= 1e-14 * np.abs(dT), "i", "m"))
    phase = modulus = 0.0
    n_r = n_i = 0
    k = 0
    while k < dT.size:
        j = k
        while j + 1 < dT.size and kind[j + 1] == kind[k]:
            j += 1
        base = logs[k]
        seg = logs[k + 1: j + 2] - base
        if kind[k] == "r":
            n_r += 1
            phase = max(phase, float(np.max(np.abs(np.angle(np.exp(1j * seg.imag))))))
        elif kind[k] == "i":
            n_i += 1
            modulus = max(modulus, float(np.max(np.abs(np.expm1(seg.real)))))
        k = j + 1
    return InvariantReport(phase, modulus, max(run.residuals), n_r, n_i)


# -------------------------------------------------------------- portrait


def default_portrait_region(zt: ZeroTable, m: int) -> tuple[float, float, float, float]:
    """State window ``(xmin, xmax, ymin, ymax)`` holding the retained upper
    zeros: real extent of the time set, imaginary extent up to the larger
    of 30 and the top retained ordinate plus 8."""
    top = zt.ordinates[m // 2 - 1]
    return (TIME_SET[0], TIME_SET[1], TIME_SET[2], max(TIME_SET[3], top + 8.0))


def default_time_set() -> tuple[complex, ...]:
    """Extreme straight paths of the time set: forward and backward real
    time, forward and backward imaginary time."""
    x0, x1, y0, y1 = TIME_SET
    return (complex(x1), complex(x0), complex(0, y1), complex(0, y0))


@dataclass
class Portrait:
    m: int
    region: tuple[float, float, float, float]
    grid: tuple[int, int]
    T_set: tuple[complex, ...]
    z0: np.ndarray  # (N,)
    roots: np.ndarray  # (N, len(T_set)), NaN where continuation failed
    paths: list[np.ndarray]  # per T: (N, samples)
    failures: list[tuple[int, complex, str]]
    rho: np.ndarray

    def attractors(self, radius: float = 0.5, upper_only: bool = True) -> list[complex]:
        """Zeros within ``radius`` of some terminal root of the path with
        the largest real time."""
        k = int(np.argmax([t.real for t in self.T_set]))
        term = self.roots[:, k]
        term = term[np.isfinite(term)]
        zeros = self.rho[self.rho.imag > 0] if upper_only else self.rho
        hit = []
        for r in zeros:
            if term.size and np.min(np.abs(term - r)) < radius:
                hit.append(complex(r))
        return sorted(hit, key=lambda w: (w.imag, w.real))


def _batch_try(rho: np.ndarray, z: np.ndarray, L: np.ndarray, T: complex):
    """One predictor-corrector step of every anchor to time ``T``.

    The continued log is updated through the log of the product of the
    factor ratios; that equals the sum of their logs because an accepted
    step changes it by about ``-dT``, far from the ``2 pi i`` ambiguity, and
    a wrong branch is caught by the residual test.
    """
    base = z[:, None] - rho[None, :]
    w_pred = z - (L + T) / (1.0 / base).sum(axis=1)
    w = w_pred.copy()
    Lw = L.copy()
    good = np.zeros(z.size, dtype=bool)
    act = np.flatnonzero(np.isfinite(w))
    tol = 1e-10 * max(1.0, abs(T))
    for it in range(6):
        if act.size == 0:
            break
        q = (w[act, None] - rho[None, :]) / base[act]
        sane = np.all(np.abs(q - 1) < 0.5, axis=1)
        act = act[sane]
        q = q[sane]
        Lw[act] = L[act] + np.log(np.prod(q, axis=1))
        F = Lw[act] + T
        done = np.abs(F) <= tol
        good[act[done]] = True
        act, F = act[~done], F[~done]
        if it == 5 or act.size == 0:
            break
        w[act] -= F / (1.0 / (w[act, None] - rho[None, :])).sum(axis=1)
    # reject corrections that suggest a jump to another root
    good &= np.abs(w - w_pred) <= 0.25 * np.abs(w_pred - z) + 1e-12 * (1.0 + np.abs(z))
    return w, Lw, good


def _batch_advance(rho, z, L, Ta: complex, Tb: complex, depth: int):
    w, Lw, good = _batch_try(rho, z, L, Tb)
    if depth == 0 or good.all():
        return w, Lw, good
    bad = ~good
    Tm = 0.5 * (Ta + Tb)
    zm, Lm, gm = _batch_advance(rho, z[bad], L[bad], Ta, Tm, depth - 1)
    z2, L2, g2 = _batch_advance(rho, zm, Lm, Tm, Tb, depth - 1)
    w[bad], Lw[bad], good[bad] = z2, L2, gm & g2
    return w, Lw, good


def _batch_continue(rho: np.ndarray, z0: np.ndarray, T: complex, n_steps: int,
                    keep_every: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Fixed-step predictor-corrector for many anchors at once; a failed
    step is bisected (up to 2**12 sub-steps) before the anchor is dropped.

    Returns (final roots, sampled paths, failed mask); failed anchors keep
    their last good state.
    """
    z = z0.astype(complex).copy()
    L = np.zeros(z.size, dtype=complex)
    failed = np.zeros(z.size, dtype=bool)
    samples = [z.copy()]
    dT = T / n_steps
    for k in range(1, n_steps + 1):
        idx = np.flatnonzero(~failed)
        w, Lw, good = _batch_advance(rho, z[idx], L[idx], dT * (k - 1), dT * k, 12)
        z[idx[good]] = w[good]
        L[idx[good]] = Lw[good]
        failed[idx[~good]] = True
        if k % keep_every == 0 or k == n_steps:
            samples.append(np.where(failed, np.nan + 0j, z))
    return z, np.stack(samples, axis=1), failed


def flow_portrait(
    zt: ZeroTable,
    m: int,
    region: tuple[float, float, float, float] | None = None,
    grid: tuple[int, int] = (60, 120),
    T_set: Sequence[complex] | None = None,
    *,
    dT: float = 0.05,
    samples_per_path: int = 50,
    opts: ContinuationOptions | None = None,
) -> Portrait:
    """Roots ``z(T)`` for every anchor of a ``grid = (nx, ny)`` lattice over
    ``region`` and every ``T`` in ``T_set`` (straight paths from 0).

    Anchors are advanced together with a fixed step; those the batch step
    loses are retried with :func:`continue_root`, and anchors that still fail
    (zeros, branch points) are recorded, never fatal.
    """
    region = region or default_portrait_region(zt, m)
    T_set = tuple(complex(t) for t in (T_set if T_set is not None else default_time_set()))
    nx, ny = grid
    if nx < 1 or ny < 1:
        raise ValueError("grid resolution must be positive")
    x0, x1, y0, y1 = region
    xs = np.linspace(x0, x1, nx) if nx > 1 else np.array([0.5 * (x0 + x1)])
    ys = np.linspace(y0, y1, ny) if ny > 1 else np.array([0.5 * (y0 + y1)])
    Z0 = (xs[None, :] + 1j * ys[:, None]).ravel()
    rho = zt.zeros(m // 2)
    failures: list[tuple[int, complex, str]] = []
    on_zero = np.min(np.abs(Z0[:, None] - rho[None, :]), axis=1) <= 1e-12
    roots = np.full((Z0.size, len(T_set)), np.nan + 0j)
    paths = []
    for j, T in enumerate(T_set):
        if T == 0:
            roots[:, j] = np.where(on_zero, np.nan, Z0)
            paths.append(roots[:, j:j + 1].copy())
            continue
        n_steps = max(1, math.ceil(abs(T) / dT))
        keep = max(1, n_steps // samples_per_path)
        zf, smp, failed = _batch_continue(rho, Z0, T, n_steps, keep)
        failed |= on_zero
        roots[:, j] = np.where(failed, np.nan, zf)
        for i in np.flatnonzero(failed):
            if on_zero[i]:
                failures.append((int(i), T, "anchor is a zero"))
                continue
            try:
                sysm = build_system(zt, m, Z0[i])
                run = continue_root(sysm, TimePath((0j, T)), opts)
            except (BranchPointHit, ContinuationUnderflow, AnchorIsZero) as exc:
                failures.append((int(i), T, type(exc).__name__))
                continue
            roots[i, j] = run.final
            tt = np.asarray(run.t_samples)
            pos = np.abs(tt) / abs(T)
            want = np.linspace(0.0, 1.0, smp.shape[1])
            rr = np.asarray(run.roots)
            smp[i] = np.interp(want, pos, rr.real) + 1j * np.interp(want, pos, rr.imag)
        paths.append(smp)
    return Portrait(m, tuple(region), (nx, ny), T_set, Z0, roots, paths, failures, rho)
