import io
import math

import mpmath
import numpy as np
import pytest

from holoflow.ctime import TimePath
from holoflow.flow import integrate
from holoflow.ode import IntegratorOptions
from holoflow.xi_newton import (
    AnchorIsZero,
    BranchPointHit,
    ContinuationOptions,
    MonotonicityError,
    ParseError,
    build_system,
    continue_root,
    default_portrait_region,
    flow_portrait,
    invariant_report,
    load_zeros,
)


def test_fixture_table(zero_table):
    assert zero_table.count == 100
    assert zero_table.ordinates[0] == pytest.approx(14.134725, abs=1e-6)
    assert all(b > a > 0 for a, b in zip(zero_table.ordinates, zero_table.ordinates[1:]))


@pytest.mark.parametrize("n", [1, 2, 50, 100])
def test_fixture_ordinates_are_zeta_zeros(zero_table, n):
    # independent route: evaluate zeta on the critical line
    mpmath.mp.dps = 25
    t = zero_table.ordinates[n - 1]
    assert abs(mpmath.zeta(mpmath.mpc(0.5, t))) < 1e-12


def test_fixture_count_matches_zero_counting(zero_table):
    # Riemann-von Mangoldt main term at the last ordinate
    T = zero_table.ordinates[-1]
    N = T / (2 * math.pi) * math.log(T / (2 * math.pi * math.e)) + 7 / 8
    assert abs(N - 100) < 1


def test_load_variants(zeros_path):
    raw = zeros_path.read_bytes()
    a = load_zeros(zeros_path)
    assert load_zeros(raw) == a
    assert load_zeros(io.BytesIO(raw)) == a
    assert load_zeros(io.StringIO(raw.decode())) == a
    assert load_zeros(str(zeros_path)) == a


@pytest.mark.parametrize(
    "text,exc,line",
    [
        ("", ParseError, 0),
        ("# only a comment\n\n", ParseError, 0),
        ("14.1\nabc\n", ParseError, 2),
        ("14.1\n-3\n", ParseError, 2),
        ("14.1\nnan\n", ParseError, 2),
        ("# c\n14.1\n21.0\n21.0\n", MonotonicityError, 4),
        ("21.0\n14.1\n", MonotonicityError, 2),
    ],
)
def test_load_errors(text, exc, line):
    with pytest.raises(exc) as info:
        load_zeros(text.encode())
    assert info.value.line == line


def test_zero_table_interleaves_conjugates(zero_table):
    rho = zero_table.zeros(2)
    assert rho.tolist() == [
        complex(0.5, zero_table.ordinates[0]),
        complex(0.5, -zero_table.ordinates[0]),
        complex(0.5, zero_table.ordinates[1]),
        complex(0.5, -zero_table.ordinates[1]),
    ]


@pytest.mark.parametrize("m", [4, 40])
def test_build_system(zero_table, m):
    s = build_system(zero_table, m, 2 + 20j)
    assert s.rho.size == m
    assert np.allclose(np.sort(s.rho.imag[s.rho.imag > 0]), zero_table.ordinates[: m // 2])
    assert s.P(s.z0, 0) == 0
    direct = np.prod(s.z0 - s.rho)
    assert abs(s.denom - direct) < 1e-12 * abs(direct)


def test_build_system_errors(zero_table):
    with pytest.raises(ValueError):
        build_system(zero_table, 3, 1)
    with pytest.raises(ValueError):
        build_system(zero_table, 202, 1)
    with pytest.raises(AnchorIsZero):
        build_system(zero_table, 4, complex(0.5, zero_table.ordinates[1]))


@pytest.mark.parametrize("x", [-3.0, 0.1, 2.0, 7.5])
def test_real_anchor_gives_real_denominator(zero_table, x):
    s = build_system(zero_table, 40, x)
    assert s.denom.imag == 0 or abs(s.denom.imag) < 1e-14 * abs(s.denom)
    assert abs(s.log_denom.imag) < 1e-12


def test_zero_length_path(zero_table):
    s = build_system(zero_table, 40, 2 + 20j)
    run = continue_root(s, TimePath((0j,)))
    assert run.roots == [s.z0] and run.residuals == [0.0]
    rep = invariant_report(run, s)
    assert rep.phase_drift == 0 and rep.modulus_drift == 0


def test_continuation_residual_and_invariants(zero_table):
    s = build_system(zero_table, 40, 2 + 20j)
    for path in (TimePath.straight(1.0), TimePath.straight(1j), TimePath((0, 1, 1 + 1j))):
        run = continue_root(s, path)
        scale = np.maximum(1.0, np.abs(np.exp(-np.asarray(run.t_samples))))
        assert np.all(np.asarray(run.residuals) < 1e-10 * scale)
        rep = invariant_report(run, s)
        assert rep.phase_drift < 1e-8 and rep.modulus_drift < 1e-8
        steps = np.abs(np.diff(run.roots))
        assert steps.max() < 1.0


def test_real_path_matches_flow_oracle(zero_table):
    s = build_system(zero_table, 40, 2 + 20j)
    run = continue_root(s, TimePath.straight(0.5))
    tr = integrate(s.newton_field, s.z0, (0.0, 0.5), IntegratorOptions(rtol=1e-12, atol=1e-14))
    assert abs(run.final - tr.states[-1]) < 1e-6


def test_real_anchor_stays_real(zero_table):
    s = build_system(zero_table, 40, 3.0)
    run = continue_root(s, TimePath.straight(-1.0))
    assert np.abs(np.asarray(run.roots).imag).max() < 1e-9


def test_real_anchor_reaches_branch_point(zero_table):
    # the real axis is invariant and flows into the critical point at 1/2
    s = build_system(zero_table, 40, 3.0)
    with pytest.raises(BranchPointHit) as info:
        continue_root(s, TimePath.straight(1.0))
    assert abs(info.value.nearest - 0.5) < 1e-6


def test_loop_around_single_zero_returns(zero_table):
    s = build_system(zero_table, 40, complex(0.6, zero_table.ordinates[0] + 0.1))
    run = continue_root(s, TimePath.straight(2j * math.pi))
    assert not run.branch_events
    assert abs(run.final - s.z0) < 1e-8


@pytest.mark.parametrize("m,turns", [(4, 2), (40, 16)])
def test_monodromy_at_2_pi_i_and_return(zero_table, m, turns):
    # the level curve of |product| through 2+20i encloses `turns` zeros
    s = build_system(zero_table, m, 2 + 20j)
    once = continue_root(s, TimePath.straight(2j * math.pi))
    assert abs(once.final - s.z0) > 0.1
    assert max(once.residuals) < 1e-10
    full = continue_root(s, TimePath.straight(2j * math.pi * turns))
    assert abs(full.final - s.z0) < 1e-8
    for k in range(1, turns):
        part = continue_root(s, TimePath.straight(2j * math.pi * k))
        assert abs(part.final - s.z0) > 1e-3


def test_convergence_in_m(zero_table):
    path = TimePath.straight(1.0)
    roots = {m: np.asarray(continue_root(build_system(zero_table, m, 2 + 20j), path).roots)
             for m in (40, 60, 80, 100)}
    # paths share the time grid because max_dT divides 1
    d_lo = np.abs(roots[40] - roots[60]).max()
    d_hi = np.abs(roots[80] - roots[100]).max()
    assert d_hi < 10 * d_lo


def test_continuation_options_validate():
    with pytest.raises(ValueError):
        ContinuationOptions(max_dT=0)


def test_portrait_identity_for_zero_time(zero_table):
    p = flow_portrait(zero_table, 4, region=(1, 1, 5, 5), grid=(1, 1), T_set=[0])
    assert p.roots[0, 0] == 5j + 1


def test_small_portrait_m4(zero_table):
    region = default_portrait_region(zero_table, 4)
    assert region == (-7.0, 8.0, -1.0, 30.0)
    p = flow_portrait(zero_table, 4, grid=(8, 16))
    assert len(p.attractors()) == 2
    assert p.roots.shape == (128, 4)
    assert len(p.paths) == 4
