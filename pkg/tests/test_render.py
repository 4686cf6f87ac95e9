import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from holoflow.render import Canvas, fmt, render_portrait, rows_csv, trajectory_csv
from holoflow.systems import cosh_shift, resolve_system

NS = "{http://www.w3.org/2000/svg}"


def classes(svg, cls):
    root = ET.fromstring(svg)
    return [e for e in root.iter() if e.get("class") == cls]


def test_empty_inputs_give_axes_only():
    svg = render_portrait([], [], [], Canvas(-1, 1, -1, 1))
    ET.fromstring(svg)
    assert len(classes(svg, "axis")) == 3
    assert not classes(svg, "orbit") and not classes(svg, "separatrix")


def test_canvas_rejects_empty_extent():
    with pytest.raises(ValueError):
        Canvas(1, 1, 0, 1)


def test_z2p1_separatrix_is_horizontal_red_line():
    sysm = resolve_system("z2p1")
    window = (-4, 4, -3, 3)
    canvas = Canvas(*window)
    seps = sysm.separatrices(window)
    svg = render_portrait([], seps, sysm.equilibria(window), canvas, field=sysm.field, glyphs=(5, 5))
    lines = classes(svg, "separatrix")
    assert lines
    _, v0 = canvas.px(0j)
    for el in lines:
        ys = [float(p.split(",")[1]) for p in el.get("points").split()]
        assert max(abs(y - v0) for y in ys) < 0.01
    assert len(classes(svg, "equilibrium")) == 2
    assert len(classes(svg, "dirfield")) == 25


def test_cosh_separatrices_at_k_pi():
    sysm = resolve_system("cosh-shift")
    window = (-2, 3, -4, 4)
    canvas = Canvas(*window)
    svg = render_portrait([], sysm.separatrices(window), [], canvas)
    heights = sorted({el.get("points").split()[0].split(",")[1] for el in classes(svg, "separatrix")})
    want = sorted(f"{canvas.px(complex(0, k * math.pi))[1]:.2f}" for k in (-1, 0, 1))
    assert heights == want


def test_direction_glyphs_are_unit_length():
    canvas = Canvas(-1, 1, -1, 1, 100, 100)
    svg = render_portrait([], [], [], canvas, field=cosh_shift, glyphs=(4, 4))
    lengths = set()
    for el in classes(svg, "dirfield"):
        x1, y1, x2, y2 = (float(el.get(k)) for k in ("x1", "y1", "x2", "y2"))
        lengths.add(round(math.hypot(x2 - x1, y2 - y1), 1))
    assert lengths == {20.0}


def test_render_is_deterministic_and_splits_at_nan():
    traj = np.array([0, 0.5 + 0.5j, np.nan, 1 + 1j, 1.5 + 0.5j])
    a = render_portrait([traj], [], [], Canvas(-2, 2, -2, 2))
    b = render_portrait([traj.copy()], [], [], Canvas(-2, 2, -2, 2))
    assert a == b
    assert len(classes(a, "orbit")) == 2


def test_fmt_and_csv():
    assert fmt(-0.0) == "0" and fmt(0.1) == "0.1"
    text = rows_csv(("a", "b"), [(1.5, "x"), (np.float64(-0.0), "y")])
    assert text == "a,b\n1.5,x\n0,y\n"
    text = trajectory_csv([("o", [0.0, 1.0], [1 + 2j, 3 - 1j])])
    assert text.splitlines() == ["t,re,im,tag", "0,1.0,2.0,o", "1.0,3.0,-1.0,o"]
