import cmath
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from holoflow.ctime import (
    BlowUp,
    BranchProximity,
    Classification,
    TimePath,
    bifurcation_offsets,
    cosh_separatrices,
    detect_branch_points,
    imaginary_monodromy,
    integrate_path,
    polynomial_separatrices,
    probe_rectangle,
    surface_sample,
)
from holoflow.flow import integrate, newton_field
from holoflow.poly_core import ComplexPoly
from holoflow.systems import cosh_shift


def cosh_closed_form(z0, t):
    # z(t) = 1/2 + log tan(pi/4 + (t + c)/2), c = gd(z0 - 1/2)
    c = 2 * cmath.atan(cmath.exp(z0 - 0.5)) - math.pi / 2
    return 0.5 + cmath.log(cmath.tan(math.pi / 4 + (t + c) / 2))


def cosh_newton(z):
    w = z - 0.5
    return -cmath.cosh(w) / cmath.sinh(w)


def test_time_path_shapes():
    r = TimePath.rectangle(2.0, 1.0)
    assert r.vertices == (0j, 2 + 0j, 2 + 1j, 1j, 0j)
    assert r.closed
    assert not TimePath.straight(1 + 1j).closed
    lp = TimePath.loop(1.5, n=16)
    assert lp.closed and lp.vertices[0] == 0
    assert all(abs(abs(v - 1.5) - 1.5) < 1e-12 for v in lp.vertices)
    area = sum((a.conjugate() * b).imag for a, b in zip(lp.vertices[:-1], lp.vertices[1:]))
    assert area > 0
    with pytest.raises(ValueError):
        TimePath((0, 1, 1))


def test_time_path_parse():
    assert TimePath.parse("rect 1 0.5") == TimePath.rectangle(1, 0.5)
    assert TimePath.parse("straight 2+3j").vertices == (0j, 2 + 3j)
    assert TimePath.parse("loop 2") == TimePath.loop(2.0)
    for bad in ("", "rect 1", "spiral 3", "loop x"):
        with pytest.raises(ValueError):
            TimePath.parse(bad)


@settings(max_examples=30)
@given(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
       st.floats(0.1, 2), st.floats(0.1, 2))
def test_constant_field_traces_path(c, T1, T2):
    if abs(c) < 1e-3:
        return
    sol = integrate_path(lambda z: c, 1 + 1j, TimePath.rectangle(T1, T2), max_ds=0.1)
    assert abs(sol.final - (1 + 1j)) < 1e-12
    assert np.abs(sol.states - (1 + 1j + c * sol.times)).max() < 1e-12
    res = probe_rectangle(lambda z: c, 1 + 1j, T1, T2)
    assert res.closure_gap < 1e-12 and res.classification is Classification.NO_SEP


def test_linear_field_closes():
    sol = integrate_path(lambda z: z, 0.5 - 0.2j, TimePath.rectangle(1.0, 7.0))
    assert abs(sol.final - (0.5 - 0.2j)) < 1e-8


def test_real_path_matches_flow_integrate():
    f = ComplexPoly([1, 0, 1])
    z0 = 0.3 + 0.4j
    tr = integrate(f, z0, (0.0, 1.0))
    sol = integrate_path(f, z0, TimePath.straight(1.0), max_ds=10.0)
    assert abs(sol.final - tr.states[-1]) < 1e-9


def test_cosh_path_matches_closed_form():
    z0 = 3 - 0.3j
    T = 0.05 + 0.2j
    sol = integrate_path(cosh_shift, z0, TimePath.straight(T))
    assert abs(sol.final - cosh_closed_form(z0, T)) < 1e-9


def test_path_independence():
    f = ComplexPoly([1, 0, 1])
    z0 = 0.2 + 0.5j
    a = integrate_path(f, z0, TimePath((0, 0.4, 0.4 + 0.3j))).final
    b = integrate_path(f, z0, TimePath((0, 0.3j, 0.4 + 0.3j))).final
    c = integrate_path(f, z0, TimePath((0, 0.4 + 0.3j))).final
    assert abs(a - b) < 1e-7 and abs(a - c) < 1e-7


def test_blowup_raises():
    with pytest.raises(BlowUp) as exc:
        integrate_path(ComplexPoly([1, 0, 1]), 0.0, TimePath.straight(3.0))
    assert exc.value.t == pytest.approx(math.pi / 2, abs=1e-4)


def test_newton_imaginary_time_conserves_modulus():
    f = ComplexPoly([-1, 0.5j, 0, 1])
    fld = newton_field(f)
    z0 = 1.3 + 0.9j
    sol = integrate_path(fld, z0, TimePath.straight(2j), max_ds=0.01)
    mods = np.abs(f(sol.states))
    assert np.abs(mods / abs(f(z0)) - 1).max() < 1e-7
    real = integrate_path(fld, z0, TimePath.straight(1.5), max_ds=0.01)
    assert np.abs(np.angle(f(real.states) / f(z0))).max() < 1e-7


def test_branch_points():
    assert detect_branch_points(ComplexPoly([1, 0, 1])) == [0]
    pts = detect_branch_points(ComplexPoly([0, -3, 0, 1]))
    assert pts == pytest.approx([-1, 1], abs=1e-12)
    assert detect_branch_points(ComplexPoly([0, 0, 1])) == []
    assert detect_branch_points(ComplexPoly([0, -3, 0, 1]), region=(0, 2, -1, 1)) == pytest.approx([1])


def test_branch_proximity_warning():
    f = ComplexPoly([-1, 0, 1])
    df = f.derivative()
    # imaginary time from z0 = 0.5 circles the level set |f| = 0.75 through 0
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        sol = integrate_path(newton_field(f, desingularized=True), 0.05, TimePath.straight(0.1),
                             denominator=df, branch_tol=0.2)
    assert sol.warnings
    assert any(issubclass(w.category, BranchProximity) for w in rec)


COSH_CASES = [
    (0.1, 0.03, Classification.NO_SEP),
    (0.1, 0.3, Classification.RE_SEP),
    (1.0, 0.03, Classification.IM_SEP),
    (1.0, 0.3, Classification.BOTH_SEP),
]


@pytest.mark.parametrize("T1,T2,label", COSH_CASES)
def test_cosh_rectangle_labels(T1, T2, label):
    res = probe_rectangle(cosh_shift, 3 - 0.3j, T1, T2, separatrices=cosh_separatrices())
    assert res.classification is label
    if label is Classification.NO_SEP:
        assert res.closure_gap < 1e-6
    doc = res.to_json()
    assert doc["classification"] == label.value


def test_cosh_rectangle_around_singularity_has_log_period_gap():
    # the closed form has a log singularity inside; one turn shifts z by 2 pi i
    res = probe_rectangle(cosh_shift, 3 - 0.3j, 1.0, 0.3)
    assert res.closure_gap == pytest.approx(2 * math.pi, abs=1e-6)
    assert res.classification is Classification.BOTH_SEP


def test_polynomial_separatrices_z2p1():
    geo = polynomial_separatrices(ComplexPoly([1, 0, 1]))
    assert geo.real_time.crossed(np.array([0.5 + 0.1j, 0.5 - 0.1j]))
    assert not geo.real_time.crossed(np.array([0.5 + 0.1j, 0.6 + 0.2j]))
    # i f has its separatrix on the imaginary axis outside the centres
    assert geo.imag_time.crossed(np.array([-0.1 + 3j, 0.1 + 3j]))


def test_surface_constant_field_is_plane():
    t1 = np.linspace(-1, 1, 5)
    t2 = np.linspace(0, 1, 3)
    s = surface_sample(lambda z: 1.0, 2j, t1, t2)
    T1, T2 = np.meshgrid(s.tau1, s.tau2)
    assert np.abs(s.z - (2j + T1 + 1j * T2)).max() < 1e-12
    assert not s.holes.any()
    assert len(list(s.rows())) == 15
    with pytest.raises(ValueError):
        surface_sample(lambda z: 1.0, 0, [1, 2], [0])


def test_surface_marks_blowup_holes():
    s = surface_sample(ComplexPoly([1, 0, 1]), 0.0, [0, 1, 2, 3], [0, 0.5])
    assert not s.holes[:, :2].any()
    assert s.holes[0, 2:].all()


def test_monodromy_signature_off_separatrix():
    z0 = 3 + 0.3j
    tau1 = np.linspace(0, 3, 31)
    mism = imaginary_monodromy(cosh_newton, z0, tau1)
    # |cosh(z - 1/2)| decays like e^(-tau1); the cycle closes once the level
    # curve no longer encloses a branch point at 1/2 + i k pi
    tstar = math.log(abs(cmath.cosh(z0 - 0.5)))
    before = mism[tau1 < tstar - 0.15]
    after = mism[tau1 > tstar + 0.15]
    assert np.all(np.abs(before - 2 * math.pi) < 1e-6)
    assert np.all(after < 1e-6)
    flips = bifurcation_offsets(mism, tau1)
    assert len(flips) == 1 and abs(flips[0] - tstar) < 0.15


def test_no_monodromy_signature_on_separatrix():
    tau1 = np.linspace(0, 3, 31)
    mism = imaginary_monodromy(cosh_newton, 3.0, tau1)
    assert bifurcation_offsets(mism, tau1) == []
