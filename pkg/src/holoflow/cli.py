"""Command line front end.

Every subcommand prints a JSON summary on stdout and writes its files under
``--out-prefix`` (``<prefix>.<name>.<ext>``).  Exit status: 0 success,
1 numerical failure (diagnostic JSON on stdout), 2 invalid input.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import compactify as cp
from . import ctime
from . import flow
from . import xi_newton as xn
from .ode import IntegratorOptions, StepUnderflow
from .poly_core import to_real_field
from .render import Canvas, render_portrait, rows_csv, trajectory_csv
from .systems import System, resolve_system

__all__ = ["RunConfig", "main", "run", "build_parser"]

DEFAULT_ZEROS = Path(__file__).resolve().parents[2] / "tests" / "fixtures" / "zeta_zeros_100.txt"

NUMERICAL_ERRORS = (
    StepUnderflow,
    xn.BranchPointHit,
    xn.ContinuationUnderflow,
    flow.CenterOnOrbit,
    flow.NotBetweenCenters,
    flow.SingularOnPath,
    cp.IdentZeroEquator,
    cp.DegenerateEigenvector,
    FloatingPointError,
    OverflowError,
    ZeroDivisionError,
)


class UsageError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class RunConfig:
    system: str = "z2p1"
    rtol: float = 1e-10
    atol: float = 1e-12
    closure_tol: float = 1e-6
    escape_radius: float = 1e8
    out_prefix: str = "holoflow-out"
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("rtol", "atol", "closure_tol"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise UsageError(f"{name} must be a positive number")
        if not self.escape_radius > 1e3:
            raise UsageError("escape_radius must exceed 1e3")
        if not self.out_prefix:
            raise UsageError("out_prefix must be non-empty")

    @property
    def integrator(self) -> IntegratorOptions:
        return IntegratorOptions(rtol=self.rtol, atol=self.atol, escape_radius=self.escape_radius)

    def opt(self, key: str):
        return self.options[key]

    def path(self, name: str) -> Path:
        p = Path(f"{self.out_prefix}.{name}")
        p.parent.mkdir(parents=True, exist_ok=True)
        return p


# ------------------------------------------------------------ parsing


def _pair(text: str) -> complex:
    """``RE,IM`` or a Python complex literal such as ``2+20j``."""
    text = str(text).strip()
    if "," in text:
        a, b = text.split(",", 1)
        return complex(float(a), float(b))
    return complex(text.replace("i", "j"))


def _grid(text: str) -> tuple[int, int]:
    try:
        a, b = str(text).lower().split("x")
        n, m = int(a), int(b)
    except ValueError:
        raise UsageError(f"grid must look like NxM, got {text!r}") from None
    if n < 1 or m < 1:
        raise UsageError("grid sizes must be positive")
    return n, m


def _window(text) -> tuple[float, float, float, float]:
    vals = text if isinstance(text, (list, tuple)) else [float(v) for v in str(text).split(",")]
    if len(vals) != 4:
        raise UsageError("window needs xmin,xmax,ymin,ymax")
    x0, x1, y0, y1 = map(float, vals)
    if not (x1 > x0 and y1 > y0):
        raise UsageError("window must have positive extent")
    return x0, x1, y0, y1


# command -> {option: (converter, default)}
COMMAND_OPTIONS: dict[str, dict[str, tuple[Callable, Any]]] = {
    "portrait": {"grid": (_grid, "7x7"), "window": (_window, "-3,3,-3,3"), "t_limit": (float, 4.0),
                 "eps": (float, 1e-3), "zeros": (str, None), "m": (int, 4)},
    "infinity": {"eps": (float, 1e-3)},
    "separatrix": {"eps": (float, 1e-3), "t_limit": (float, 50.0)},
    "winding": {"z0": (_pair, None), "center": (_pair, None), "t_limit": (float, 200.0)},
    "ctime-probe": {"z0": (_pair, "3-0.3j"), "t1": (float, 1.0), "t2": (float, 0.3),
                    "grid": (_grid, "9x5")},
    "xi-approx": {"zeros": (str, None), "m": (int, 40), "z0": (_pair, "2,20"),
                  "path": (str, "straight 1"), "grid": (_grid, "12x24")},
    "report": {},
}
DEFAULT_SYSTEM = {"ctime-probe": "cosh-shift", "xi-approx": "xi-approx"}
GLOBAL_KEYS = {f.name for f in fields(RunConfig)} - {"options"}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with configuration keys")
    common.add_argument("--out-prefix", dest="out_prefix")
    common.add_argument("--poly", dest="system",
                        help="JSON [[re,im],...] ascending, or z2p1 | cosh-shift | xi-approx")
    common.add_argument("--rtol", type=float)
    common.add_argument("--atol", type=float)
    common.add_argument("--closure-tol", dest="closure_tol", type=float)
    common.add_argument("--escape-radius", dest="escape_radius", type=float)
    parser = argparse.ArgumentParser(prog="holoflow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd, opts in COMMAND_OPTIONS.items():
        sp = sub.add_parser(cmd, parents=[common], argument_default=argparse.SUPPRESS)
        for key in opts:
            sp.add_argument("--" + key.replace("_", "-"), dest=key)
    return parser


def make_config(ns: argparse.Namespace) -> RunConfig:
    cmd = ns.command
    given = {k: v for k, v in vars(ns).items() if v is not None and k not in ("command", "config")}
    merged: dict[str, Any] = {}
    if getattr(ns, "config", None):
        try:
            with open(ns.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError("config must be a JSON object")
        merged.update(data)
    merged.update(given)
    merged.setdefault("system", DEFAULT_SYSTEM.get(cmd, "z2p1"))
    if isinstance(merged["system"], list):
        merged["system"] = json.dumps(merged["system"])
    allowed = GLOBAL_KEYS | set(COMMAND_OPTIONS[cmd])
    unknown = sorted(set(merged) - allowed)
    if unknown:
        raise UsageError(f"unknown configuration keys for {cmd}: {', '.join(unknown)}")
    options = {}
    for key, (conv, default) in COMMAND_OPTIONS[cmd].items():
        raw = merged.pop(key, default)
        try:
            options[key] = None if raw is None else conv(raw)
        except (TypeError, ValueError) as exc:
            raise UsageError(f"bad value for {key}: {exc}") from None
    glob = {}
    for k, v in merged.items():
        if k in ("rtol", "atol", "closure_tol", "escape_radius"):
            try:
                v = float(v)
            except (TypeError, ValueError):
                raise UsageError(f"{k} must be a number") from None
        glob[k] = v
    return RunConfig(options=options, **glob)


# ---------------------------------------------------------- output


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [_jsonable(obj.real), _jsonable(obj.imag)]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if not math.isfinite(v):
            return None
        return 0.0 if v == 0 else v
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def _write(cfg: RunConfig, name: str, text: str) -> str:
    p = cfg.path(name)
    p.write_text(text, encoding="utf-8")
    return str(p)


def _system(cfg: RunConfig) -> System:
    zeros = None
    if cfg.system == "xi-approx":
        zeros = _zeros(cfg)
    try:
        return resolve_system(cfg.system, zeros=zeros, m=cfg.options.get("m"))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _zeros(cfg: RunConfig) -> xn.ZeroTable:
    src = cfg.options.get("zeros") or DEFAULT_ZEROS
    try:
        return xn.load_zeros(src)
    except OSError as exc:
        raise UsageError(f"cannot read zero file: {exc}") from None
    except (xn.ParseError, xn.MonotonicityError) as exc:
        raise UsageError(f"bad zero file: {exc}") from None


def _require_poly(sysm: System, cmd: str):
    if not sysm.is_polynomial:
        raise UsageError(f"{cmd} needs a polynomial system")
    return sysm.poly


# --------------------------------------------------------- commands


def cmd_infinity(cfg: RunConfig) -> dict:
    f = _require_poly(_system(cfg), "infinity")
    if f.degree < 2:
        raise UsageError("infinity analysis needs degree >= 2")
    eqs = cp.infinity_critical_points(to_real_field(f))
    out = []
    for eq in eqs:
        d = eq.to_json()
        if eq.kind is cp.Kind.SADDLE:
            d["seed_point"] = cp.separatrix_seed(eq, cfg.opt("eps"))
        else:
            d["seed_point"] = None
        out.append(d)
    report = {"command": "infinity", "system": cfg.system, "degree": f.degree, "equilibria": out}
    report["files"] = [_write(cfg, "infinity.json", dumps(report))]
    return report


def cmd_separatrix(cfg: RunConfig) -> dict:
    f = _require_poly(_system(cfg), "separatrix")
    if f.degree < 2:
        raise UsageError("separatrices at infinity need degree >= 2")
    eqs = [e for e in cp.infinity_critical_points(to_real_field(f)) if e.kind is cp.Kind.SADDLE]
    tagged, info = [], []
    for k, eq in enumerate(eqs):
        tr = flow.trace_separatrix(f, eq, cfg.opt("eps"), cfg.opt("t_limit"), cfg.integrator)
        tag = f"sep{k}"
        tagged.append((tag, tr.times, tr.states))
        info.append({"tag": tag, "p": list(eq.p), "alpha": eq.alpha, "samples": len(tr),
                     "termination": tr.termination.kind.value, "t_max": tr.termination.t_max,
                     "direction": tr.termination.direction})
    csv_path = _write(cfg, "separatrix.csv", trajectory_csv(tagged))
    report = {"command": "separatrix", "system": cfg.system, "separatrices": info, "files": [csv_path]}
    return report


def _trajectories(sysm: System, cfg: RunConfig, window) -> list[tuple[str, np.ndarray, np.ndarray]]:
    nx, ny = cfg.opt("grid")
    x0, x1, y0, y1 = window
    xs = np.linspace(x0, x1, nx + 2)[1:-1]
    ys = np.linspace(y0, y1, ny + 2)[1:-1]
    T = cfg.opt("t_limit")
    opts = cfg.integrator.with_(max_step=0.05)
    out = []
    for j, y in enumerate(ys):
        for i, x in enumerate(xs):
            z0 = complex(x, y)
            try:
                fw = flow.integrate(sysm.field, z0, (0.0, T), opts)
                bw = flow.integrate(sysm.field, z0, (0.0, -T), opts)
            except (StepUnderflow, FloatingPointError, ZeroDivisionError):
                continue
            times = np.concatenate([bw.times[::-1], fw.times[1:]])
            states = np.concatenate([bw.states[::-1], fw.states[1:]])
            out.append((f"orbit_{j}_{i}", times, states))
    return out


def cmd_portrait(cfg: RunConfig) -> dict:
    sysm = _system(cfg)
    window = cfg.opt("window")
    trajs = _trajectories(sysm, cfg, window)
    seps = sysm.separatrices(window, cfg.opt("eps"), 50.0, cfg.integrator)
    eqs = sysm.equilibria(window)
    canvas = Canvas(*window)
    svg = render_portrait([s for _, _, s in trajs], seps, eqs, canvas, field=sysm.field)
    sep_rows = [(f"separatrix_{k}", np.arange(len(s), dtype=float), s) for k, s in enumerate(seps)]
    files = [
        _write(cfg, "trajectories.csv", trajectory_csv(trajs + sep_rows)),
        _write(cfg, "portrait.svg", svg),
    ]
    return {"command": "portrait", "system": cfg.system, "trajectories": len(trajs),
            "separatrices": len(seps), "equilibria": eqs, "files": files}


def cmd_winding(cfg: RunConfig) -> dict:
    sysm = _system(cfg)
    z0 = cfg.opt("z0")
    if z0 is None:
        raise UsageError("winding needs --z0")
    orbit = flow.detect_periodic(sysm.field, z0, cfg.integrator, closure_tol=min(cfg.closure_tol, 1e-6),
                                 t_limit=cfg.opt("t_limit"))
    if orbit is None:
        raise NumericalFailure(f"no periodic orbit through {z0!r}")
    pts = orbit.samples
    if cfg.opt("center") is not None:
        centers = [cfg.opt("center")]
    else:
        box = (pts.real.min(), pts.real.max(), pts.imag.min(), pts.imag.max())
        centers = sysm.equilibria(box)
    windings = []
    for c in centers:
        windings.append({"center": c, "winding": flow.winding_number(orbit, c)})
    report = {"command": "winding", "system": cfg.system, "z0": z0, "period": orbit.period,
              "gap": orbit.gap, "orientation": orbit.orientation, "windings": windings}
    report["files"] = [_write(cfg, "winding.json", dumps(report))]
    return report


def cmd_ctime_probe(cfg: RunConfig) -> dict:
    sysm = _system(cfg)
    z0, T1, T2 = cfg.opt("z0"), cfg.opt("t1"), cfg.opt("t2")
    if not (T1 > 0 and T2 > 0):
        raise UsageError("t1 and t2 must be positive")
    if sysm.name == "cosh-shift":
        geom = ctime.cosh_separatrices()
    elif sysm.is_polynomial and sysm.poly.degree >= 2:
        geom = ctime.polynomial_separatrices(sysm.poly)
    else:
        geom = None
    res = ctime.probe_rectangle(sysm.field, z0, T1, T2, cfg.integrator, separatrices=geom,
                                closure_tol=cfg.closure_tol)
    nx, ny = cfg.opt("grid")
    surf = ctime.surface_sample(sysm.field, z0, np.linspace(0, T1, nx), np.linspace(0, T2, ny),
                                cfg.integrator)
    rows = []
    for t1, t2, z in surf.rows():
        rows.append((t1, t2, z.real, z.imag))
    report = {"command": "ctime-probe", "system": cfg.system, "z0": z0, **res.to_json(),
              "holes": int(surf.holes.sum())}
    report["files"] = [
        _write(cfg, "probe.json", dumps(report)),
        _write(cfg, "surface.csv", rows_csv(("re_t", "im_t", "re_z", "im_z"), rows)),
    ]
    return report


def cmd_xi_approx(cfg: RunConfig) -> dict:
    zt = _zeros(cfg)
    m, z0 = cfg.opt("m"), cfg.opt("z0")
    try:
        sysm = xn.build_system(zt, m, z0)
        path = ctime.TimePath.parse(cfg.opt("path"))
    except xn.AnchorIsZero as exc:
        raise UsageError(str(exc)) from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if path.vertices[0] != 0:
        raise UsageError("continuation paths start at T = 0")
    run_ = xn.continue_root(sysm, path)
    inv = xn.invariant_report(run_, sysm)
    rows = [(T.real, T.imag, z.real, z.imag, r)
            for T, z, r in zip(run_.t_samples, run_.roots, run_.residuals)]
    portrait = xn.flow_portrait(zt, m, grid=cfg.opt("grid"))
    x0, x1, y0, y1 = portrait.region
    canvas = Canvas(x0, x1, y0, y1, 400, int(round(400 * (y1 - y0) / (x1 - x0))))
    real_idx = [k for k, T in enumerate(portrait.T_set) if T.imag == 0]
    imag_idx = [k for k, T in enumerate(portrait.T_set) if T.real == 0 and T.imag != 0]
    orbits = [portrait.paths[k][i] for k in real_idx for i in range(portrait.z0.size)]
    imag = [portrait.paths[k][i] for k in imag_idx for i in range(portrait.z0.size)]
    svg = render_portrait(orbits, [np.asarray(run_.roots)], list(portrait.rho), canvas, imaginary=imag)
    report = {
        "command": "xi-approx", "m": m, "z0": z0, "path": cfg.opt("path"),
        "final_root": run_.final, "samples": len(run_.roots),
        "branch_events": [{"T": T, "z": z, "abs_dPdz": a} for T, z, a in run_.branch_events],
        "invariants": inv.to_json(),
        "portrait": {"grid": list(portrait.grid), "region": list(portrait.region),
                     "attractors": portrait.attractors(), "failures": len(portrait.failures)},
    }
    report["files"] = [
        _write(cfg, "roots.csv", rows_csv(("re_T", "im_T", "re_z", "im_z", "residual"), rows)),
        _write(cfg, "portrait.svg", svg),
        _write(cfg, "invariants.json", dumps(report)),
    ]
    return report


def cmd_report(cfg: RunConfig) -> dict:
    sysm = _system(cfg)
    f = _require_poly(sysm, "report")
    F = to_real_field(f)
    roots = sorted((complex(r) for r in f.roots()), key=lambda z: (round(z.real, 9), round(z.imag, 9)))
    out = {"command": "report", "system": cfg.system, "degree": f.degree, "zeros": roots}
    if f.degree >= 2:
        kh = cp.khat(F)
        out["khat"] = {"I": kh.I, "J": kh.J, "khat": kh.khat}
        eqs = cp.infinity_critical_points(F)
        out["infinity"] = [{"p": list(e.p), "alpha": e.alpha, "kind": e.kind.value} for e in eqs]
    else:
        out["khat"] = None
        out["infinity"] = []
    out["branch_points"] = ctime.detect_branch_points(f)
    out["files"] = [_write(cfg, "report.json", dumps(out))]
    return out


COMMANDS = {
    "portrait": cmd_portrait,
    "infinity": cmd_infinity,
    "separatrix": cmd_separatrix,
    "winding": cmd_winding,
    "ctime-probe": cmd_ctime_probe,
    "xi-approx": cmd_xi_approx,
    "report": cmd_report,
}


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = make_config(ns)
        report = COMMANDS[ns.command](cfg)
    except UsageError as exc:
        print(f"holoflow {ns.command}: error: {exc}", file=stderr)
        return 2
    except (NumericalFailure, *NUMERICAL_ERRORS) as exc:
        diag = {"command": ns.command, "error": type(exc).__name__, "message": str(exc)}
        stdout.write(dumps(diag))
        return 1
    except ValueError as exc:
        print(f"holoflow {ns.command}: error: {exc}", file=stderr)
        return 2
    stdout.write(dumps(report))
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
