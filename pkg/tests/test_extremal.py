import math
import random

import pytest

from srfront.extremal import (
    ExtremalState,
    abnormal_triviality_check,
    alt_integrate,
    arc_length,
    extremal_field,
    hamiltonian_value,
    integrate,
    projection_jet,
    switching_values,
)
from srfront.metric import DegenerateFrameError, OrthonormalFrame, OutsideDomainError
from srfront.singularity import fd_projection_jets
from srfront.sweeps import sample_state


def _rand_state(rng, chart, spread=0.25):
    (a1, b1), (a2, b2) = chart.domain
    return ExtremalState(
        0.5 * (a1 + b1) + spread * 0.5 * (b1 - a1) * rng.uniform(-1, 1),
        0.5 * (a2 + b2) + spread * min(0.5 * (b2 - a2), 2.0) * rng.uniform(-1, 1),
        rng.uniform(-math.pi, math.pi),
        rng.uniform(-1.5, 1.5),
        rng.uniform(-1.5, 1.5),
        rng.uniform(-2.0, 2.0),
    )


# --- Switching values -------------------------------------------------------


def test_switching_axis_cases(flat_frame):
    assert switching_values(flat_frame, ExtremalState(0, 0, 0.0, 1.0, 0.0, 0)) == (1.0, 0.0)
    assert switching_values(flat_frame, ExtremalState(0, 0, 0.0, 0.0, 1.0, 0)) == (0.0, 1.0)


def test_switching_rotation_identity(flat_frame):
    rng = random.Random(11)
    for _ in range(500):
        s = ExtremalState(0, 0, rng.uniform(-7, 7),
                          rng.uniform(-2, 2), rng.uniform(-2, 2), 0.0)
        a, b = switching_values(flat_frame, s)
        assert a * a + b * b == pytest.approx(s.p1 ** 2 + s.p2 ** 2, abs=1e-13)


# --- Field values ------------------------------------------------------------


def test_field_fiber_rotation(flat, flat_frame):
    field = extremal_field(flat, flat_frame, ExtremalState(0.2, -0.3, 1.1, 0.0, 0.0, 0.7))
    assert field == (0.0, 0.0, 0.7, 0.0, 0.0, 0.0)


def test_field_straight_line(flat, flat_frame):
    field = extremal_field(flat, flat_frame, ExtremalState(0, 0, 0.0, 1.0, 0.0, 0.0))
    assert field == (1.0, 0.0, 0.0, 0.0, 0.0, 0.0)


def test_field_oblique_momentum(flat, flat_frame):
    field = extremal_field(flat, flat_frame, ExtremalState(0, 0, math.pi / 4, 0.0, 1.0, 0.0))
    assert field[0] == pytest.approx(0.5, abs=1e-15)
    assert field[1] == pytest.approx(0.5, abs=1e-15)
    assert field[2:5] == (0.0, 0.0, 0.0)
    assert field[5] == pytest.approx(-0.5, abs=1e-15)


def test_field_flat_matches_direct_formulas(flat, flat_frame):
    rng = random.Random(12)
    for _ in range(200):
        s = _rand_state(rng, flat)
        a = s.p1 * math.cos(s.theta) + s.p2 * math.sin(s.theta)
        expected = (
            a * math.cos(s.theta),
            a * math.sin(s.theta),
            s.phi,
            0.0,
            0.0,
            a * (s.p1 * math.sin(s.theta) - s.p2 * math.cos(s.theta)),
        )
        field = extremal_field(flat, flat_frame, s)
        assert max(abs(x - y) for x, y in zip(field, expected)) <= 1e-14


def test_field_outside_domain(sphere, sphere_frame):
    with pytest.raises(OutsideDomainError):
        extremal_field(sphere, sphere_frame, ExtremalState(2.0, 0, 0, 1, 0, 0))


# --- Hamiltonian -------------------------------------------------------------


def test_hamiltonian_values(flat_frame):
    assert hamiltonian_value(flat_frame, ExtremalState(0, 0, 0.4, 0, 0, 0)) == 0.0
    assert hamiltonian_value(flat_frame, ExtremalState(0, 0, 0.0, 0.0, 1.0, 1.0)) == 0.5


def test_hamiltonian_conserved_and_momenta_constant(flat, flat_frame):
    rng = random.Random(13)
    tol = 1e-10
    for _ in range(5):
        s0 = _rand_state(rng, flat)
        traj = integrate(flat, flat_frame, s0, (0.0, 20.0), tol)
        h0 = hamiltonian_value(flat_frame, s0)
        for i in range(101):
            t = 20.0 * i / 100
            s = traj.eval(t)
            assert abs(hamiltonian_value(flat_frame, s) - h0) <= 100 * tol
            assert abs(s.p1 - s0.p1) <= 100 * tol
            assert abs(s.p2 - s0.p2) <= 100 * tol


def test_hamiltonian_conserved_on_curved_charts(charts, frames):
    rng = random.Random(14)
    tol = 1e-10
    for name in ("sphere", "hyperbolic"):
        chart, frame = charts[name], frames[name]
        s0 = _rand_state(rng, chart)
        traj = integrate(chart, frame, s0, (0.0, 10.0), tol)
        h0 = hamiltonian_value(frame, s0)
        hi = sorted((traj.t0, traj.t_end))[1]
        worst = max(abs(traj.hamiltonian(hi * i / 100) - h0) for i in range(101))
        assert worst <= 100 * tol


# --- Integration -------------------------------------------------------------


def test_constant_initial_state_stays_constant(flat, flat_frame):
    s0 = ExtremalState(0.4, -0.2, 1.0, 0.0, 0.0, 0.0)
    traj = integrate(flat, flat_frame, s0, (0.0, 5.0), 1e-10)
    for t in (0.0, 1.7, 5.0):
        assert traj.eval_raw(t) == s0.astuple()


def test_integrate_rejects_bad_tolerance(flat, flat_frame):
    s0 = ExtremalState(0, 0, 0, 0, 1, 1)
    with pytest.raises(ValueError):
        integrate(flat, flat_frame, s0, (0.0, 1.0), 1e-2)
    with pytest.raises(ValueError):
        integrate(flat, flat_frame, s0, (0.0, 1.0), 1e-15)
    with pytest.raises(ValueError):
        integrate(flat, flat_frame, s0, (1.0, 1.0), 1e-10)


def test_domain_exit_is_graceful(sphere, sphere_frame):
    # Momentum aimed along x1 runs into the chart edge.
    s0 = ExtremalState(1.0, 0.0, 0.0, 1.0, 0.0, 0.05)
    traj = integrate(sphere, sphere_frame, s0, (0.0, 10.0), 1e-10)
    assert traj.exited
    assert traj.exit_time is not None
    assert traj.t_end < 10.0
    s_end = traj.eval(traj.t_end)
    (a1, b1), _ = sphere.domain
    assert min(abs(s_end.x1 - a1), abs(s_end.x1 - b1)) <= 1e-9


def test_time_reversal(flat, flat_frame):
    tol = 1e-10
    s0 = ExtremalState(0.1, -0.2, 0.7, 0.8, -1.1, 0.9)
    fwd = integrate(flat, flat_frame, s0, (0.0, 10.0), tol)
    back = integrate(flat, flat_frame, fwd.eval(10.0), (10.0, 0.0), tol)
    dev = max(abs(a - b) for a, b in zip(back.eval_raw(0.0), s0.astuple()))
    assert dev <= 100 * tol


def test_nonconstant_trajectories_stay_immersed(charts, frames):
    rng = random.Random(15)
    for name in ("flat", "sphere"):
        chart, frame = charts[name], frames[name]
        for _ in range(5):
            s0 = sample_state(rng, chart, frame)
            if hamiltonian_value(frame, s0) < 1e-4:
                continue
            traj = integrate(chart, frame, s0, (0.0, 8.0), 1e-10)
            for t in traj.nodes:
                d = traj.deriv(t)
                assert max(abs(d[0]), abs(d[1]), abs(d[2])) > 1e-13


def test_second_derivative_matches_difference_of_field(flat, flat_frame):
    s0 = ExtremalState(0, 0, 0.3, 0.4, 1.0, 0.6)
    traj = integrate(flat, flat_frame, s0, (0.0, 5.0), 1e-12)
    d2 = traj.second_deriv(2.0)
    h = 1e-6
    fd = [(a - b) / (2 * h) for a, b in zip(traj.deriv(2.0 + h), traj.deriv(2.0 - h))]
    assert max(abs(a - b) for a, b in zip(d2, fd)) <= 1e-4


# --- Canonical-route cross-check ---------------------------------------------


def test_alt_integrate_constant_and_fiber(flat, flat_frame):
    s0 = ExtremalState(0.4, -0.2, 1.0, 0.0, 0.0, 0.0)
    traj = alt_integrate(flat, flat_frame, s0, (0.0, 3.0), 1e-10)
    assert max(abs(a - b) for a, b in zip(traj.eval_raw(3.0), s0.astuple())) <= 1e-12

    fiber = ExtremalState(0.1, 0.2, 0.0, 0.0, 0.0, 1.0)
    traj = alt_integrate(flat, flat_frame, fiber, (0.0, 4.0), 1e-10)
    s = traj.eval(4.0)
    assert s.theta == pytest.approx(4.0, abs=1e-10)
    assert (s.x1, s.x2) == (pytest.approx(0.1, abs=1e-12), pytest.approx(0.2, abs=1e-12))


def test_two_route_agreement(charts, frames):
    rng = random.Random(16)
    tol = 1e-10
    for name in ("flat", "sphere"):
        chart, frame = charts[name], frames[name]
        for _ in range(5):
            s0 = _rand_state(rng, chart)
            tr1 = integrate(chart, frame, s0, (0.0, 10.0), tol)
            tr2 = alt_integrate(chart, frame, s0, (0.0, 10.0), tol)
            hi = min(sorted((tr1.t0, tr1.t_end))[1], sorted((tr2.t0, tr2.t_end))[1])
            worst = max(
                max(abs(a - b) for a, b in zip(tr1.eval_raw(hi * i / 100),
                                               tr2.eval_raw(hi * i / 100)))
                for i in range(101)
            )
            assert worst <= 1e-7, name


# --- Zero-multiplier constraint ------------------------------------------------


def test_abnormal_triviality(charts, frames):
    rng = random.Random(17)
    for name in ("flat", "sphere", "hyperbolic"):
        chart, frame = charts[name], frames[name]
        for _ in range(20):
            s = _rand_state(rng, chart)
            assert abnormal_triviality_check(frame, (s.x1, s.x2)) is True


def test_abnormal_check_rejects_degenerate_frame(flat):
    broken = OrthonormalFrame(
        chart=flat,
        values=lambda x1, x2: (1.0, 0.0, 2.0, 0.0),
        coeffs=lambda x1, x2: (1.0, 0.0, 2.0, 0.0) + (0.0,) * 8,
    )
    with pytest.raises(DegenerateFrameError):
        abnormal_triviality_check(broken, (0.0, 0.0))


# --- Arc length ----------------------------------------------------------------


def test_arc_length_constant_zero(flat, flat_frame):
    s0 = ExtremalState(0, 0, 0.5, 0, 0, 0)
    traj = integrate(flat, flat_frame, s0, (0.0, 3.0), 1e-10)
    assert arc_length(traj) == 0.0


def test_arc_length_fiber_full_turn(flat, flat_frame):
    s0 = ExtremalState(0, 0, 0.0, 0, 0, 1.0)
    traj = integrate(flat, flat_frame, s0, (0.0, 2.0 * math.pi), 1e-10)
    assert arc_length(traj) == pytest.approx(2.0 * math.pi, abs=1e-9)


def test_arc_length_constant_speed_identity(flat, flat_frame):
    rng = random.Random(18)
    for _ in range(5):
        s0 = _rand_state(rng, flat)
        traj = integrate(flat, flat_frame, s0, (0.0, 7.0), 1e-10)
        expected = math.sqrt(2.0 * hamiltonian_value(flat_frame, s0)) * 7.0
        assert abs(arc_length(traj) - expected) <= 1e-8


# --- Projection jets ------------------------------------------------------------


def test_projection_jet_flat_matches_finite_differences(flat, flat_frame):
    rng = random.Random(19)
    for _ in range(10):
        s = _rand_state(rng, flat)
        d1, d2, d3 = projection_jet(flat_frame, s)
        f1, f2, f3 = fd_projection_jets(flat, flat_frame, s, 0.01)
        assert max(abs(a - b) for a, b in zip(d1, f1)) <= 1e-9
        assert max(abs(a - b) for a, b in zip(d2, f2)) <= 1e-8
        assert max(abs(a - b) for a, b in zip(d3, f3)) <= 1e-6


def test_projection_jet_low_order_exact_on_curved_charts(charts, frames):
    rng = random.Random(20)
    for name in ("sphere", "hyperbolic"):
        chart, frame = charts[name], frames[name]
        for _ in range(6):
            s = _rand_state(rng, chart)
            d1, d2, _ = projection_jet(frame, s)
            f1, f2, _ = fd_projection_jets(chart, frame, s, 0.008)
            assert max(abs(a - b) for a, b in zip(d1, f1)) <= 1e-9
            assert max(abs(a - b) for a, b in zip(d2, f2)) <= 1e-7
