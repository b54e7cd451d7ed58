"""Normal extremals of the horizontal-plus-fiber control system on UM.

State is (x1, x2, theta, p1, p2, phi): chart position, direction angle
against d/dx1 (kept unwrapped), and the dual momenta.  With the multiplier
normalized to -1 the controls are u1 = A (the switching value) and
u2 = phi, and the Hamiltonian (A^2 + phi^2)/2 is conserved.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

from . import rk
from .metric import DegenerateFrameError, MetricChart, OrthonormalFrame

TOL_MIN = 1e-14
TOL_MAX = 1e-3
# Conservation contract: drift along a trajectory stays under 100 x tolerance.
DRIFT_FACTOR = 100.0
# The requested tolerance is a global-accuracy target; the per-step embedded
# error test runs this much tighter (cost grows only like factor^(1/8)).
_CONTROL_FACTOR = 20.0
_RTOL_FLOOR = 3e-16


def _control_tol(tol: float) -> float:
    return max(tol / _CONTROL_FACTOR, _RTOL_FLOOR)


@dataclass(frozen=True)
class ExtremalState:
    x1: float
    x2: float
    theta: float
    p1: float
    p2: float
    phi: float

    def astuple(self):
        return (self.x1, self.x2, self.theta, self.p1, self.p2, self.phi)

    @staticmethod
    def from_iterable(values) -> "ExtremalState":
        x1, x2, theta, p1, p2, phi = map(float, values)
        return ExtremalState(x1, x2, theta, p1, p2, phi)


def switching_values(frame: OrthonormalFrame, s: ExtremalState) -> tuple[float, float]:
    """(A, B): momentum paired with the direction vector and with its normal.

    A = (k p1 + l p2) cos(theta) + (m p1 + n p2) sin(theta),
    B = -(k p1 + l p2) sin(theta) + (m p1 + n p2) cos(theta).
    """
    k, l, m, n = frame.values(s.x1, s.x2)
    al = k * s.p1 + l * s.p2
    be = m * s.p1 + n * s.p2
    ct = math.cos(s.theta)
    st = math.sin(s.theta)
    return al * ct + be * st, -al * st + be * ct


def hamiltonian_value(frame: OrthonormalFrame, s: ExtremalState) -> float:
    """(A^2 + phi^2) / 2; constant along any integrated trajectory."""
    a, _ = switching_values(frame, s)
    return 0.5 * (a * a + s.phi * s.phi)


def _rhs_tuple(frame: OrthonormalFrame, y: tuple) -> tuple:
    x1, x2, theta, p1, p2, phi = y
    k, l, m, n, k1, l1, m1, n1, k2, l2, m2, n2 = frame.coeffs(x1, x2)
    ct = math.cos(theta)
    st = math.sin(theta)
    al = k * p1 + l * p2
    be = m * p1 + n * p2
    a = al * ct + be * st
    b = -al * st + be * ct
    return (
        a * (k * ct + m * st),
        a * (l * ct + n * st),
        phi,
        -a * ((k1 * p1 + l1 * p2) * ct + (m1 * p1 + n1 * p2) * st),
        -a * ((k2 * p1 + l2 * p2) * ct + (m2 * p1 + n2 * p2) * st),
        -a * b,
    )


def extremal_field(chart: MetricChart, frame: OrthonormalFrame, s: ExtremalState) -> tuple:
    """Right-hand side of the six extremal equations at s."""
    chart.require_inside(s.x1, s.x2)
    return _rhs_tuple(frame, s.astuple())


@dataclass(frozen=True)
class IntegratorStats:
    steps: int
    rejected: int
    nfev: int
    tol: float


@dataclass(frozen=True)
class Trajectory:
    """Dense-output extremal solution, queryable at any t in the window.

    ``t_end`` equals the requested endpoint unless the trajectory left the
    chart, in which case ``exited`` is set and ``t_end`` is the exit time.
    """

    chart: MetricChart
    frame: OrthonormalFrame
    t0: float
    t_end: float
    requested_t1: float
    tol: float
    exited: bool
    _sol: rk.Solution
    _field: str  # "extremal" | "canonical"

    @property
    def exit_time(self) -> Optional[float]:
        return self.t_end if self.exited else None

    @property
    def nodes(self) -> tuple:
        return self._sol.ts

    @property
    def stats(self) -> IntegratorStats:
        return IntegratorStats(
            steps=self._sol.naccept,
            rejected=self._sol.nreject,
            nfev=self._sol.nfev,
            tol=self.tol,
        )

    def eval_raw(self, t: float) -> tuple:
        return self._sol.eval(t)

    def eval(self, t: float) -> ExtremalState:
        return ExtremalState(*self._sol.eval(t))

    def deriv(self, t: float) -> tuple:
        """Exact field value along the numerical solution."""
        return _rhs_tuple(self.frame, self._sol.eval(t))

    def second_deriv(self, t: float) -> tuple:
        """d^2/dt^2 of the state, by central differences of the field."""
        span = abs(self.t_end - self.t0)
        h = min(1e-5 * max(1.0, abs(t)), 0.25 * span) or 1e-8
        lo, hi = sorted((self.t0, self.t_end))
        ta, tb = t - h, t + h
        if ta < lo:
            ta, tb = lo, lo + 2 * h
        elif tb > hi:
            ta, tb = hi - 2 * h, hi
        fa = _rhs_tuple(self.frame, self._sol.eval(ta))
        fb = _rhs_tuple(self.frame, self._sol.eval(tb))
        return tuple((b - a) / (tb - ta) for a, b in zip(fa, fb))

    def switching(self, t: float) -> tuple[float, float]:
        return switching_values(self.frame, self.eval(t))

    def hamiltonian(self, t: float) -> float:
        return hamiltonian_value(self.frame, self.eval(t))


def _validate_window_tol(window, tol):
    t0, t1 = float(window[0]), float(window[1])
    if t0 == t1:
        raise ValueError("integration window is empty")
    if not (TOL_MIN <= tol <= TOL_MAX):
        raise ValueError(f"tolerance {tol!r} outside [{TOL_MIN}, {TOL_MAX}]")
    return t0, t1


def integrate(
    chart: MetricChart,
    frame: OrthonormalFrame,
    s0: ExtremalState,
    window,
    tol: float = 1e-10,
) -> Trajectory:
    """Adaptive 5(4) solution of the extremal system with dense output.

    Leaves of the chart rectangle terminate the run gracefully: the result is
    truncated at the exit time and flagged, never raised.
    """
    t0, t1 = _validate_window_tol(window, tol)
    chart.require_inside(s0.x1, s0.x2)

    def f(t, y):
        return _rhs_tuple(frame, y)

    ctol = _control_tol(tol)
    sol = rk.solve(
        f, t0, s0.astuple(), t1, rtol=ctol, atol=ctol,
        inside=lambda y: chart.contains(y[0], y[1]),
    )
    return Trajectory(
        chart=chart, frame=frame, t0=t0, t_end=sol.t_end, requested_t1=t1,
        tol=tol, exited=sol.truncated, _sol=sol, _field="extremal",
    )


_CSTEP = 1e-100


def _canonical_rhs(frame: OrthonormalFrame, y: tuple) -> tuple:
    """Symplectic gradient of H(x, theta, p, phi) = (<p, V1>^2 + phi^2) / 2.

    The gradient is taken by complex-step differentiation of the scalar
    Hamiltonian, so this route shares no hand-derived field components with
    the extremal equations and serves as an independent cross-check.
    """
    x1, x2, theta, p1, p2, phi = y

    def ham(z1, z2, zth, zp1, zp2, zphi):
        k, l, m, n = frame.values(z1, z2)
        a = (k * zp1 + l * zp2) * cmath.cos(zth) + (m * zp1 + n * zp2) * cmath.sin(zth)
        return 0.5 * (a * a + zphi * zphi)

    h = _CSTEP
    d_x1 = ham(complex(x1, h), x2, theta, p1, p2, phi).imag / h
    d_x2 = ham(x1, complex(x2, h), theta, p1, p2, phi).imag / h
    d_th = ham(x1, x2, complex(theta, h), p1, p2, phi).imag / h
    d_p1 = ham(x1, x2, theta, complex(p1, h), p2, phi).imag / h
    d_p2 = ham(x1, x2, theta, p1, complex(p2, h), phi).imag / h
    d_ph = ham(x1, x2, theta, p1, p2, complex(phi, h)).imag / h
    return (d_p1, d_p2, d_ph, -d_x1, -d_x2, -d_th)


def alt_integrate(
    chart: MetricChart,
    frame: OrthonormalFrame,
    s0: ExtremalState,
    window,
    tol: float = 1e-10,
) -> Trajectory:
    """Integrate the canonical system for the squared-pairing Hamiltonian.

    Produces the same (x1, x2, theta) curves as :func:`integrate`; kept as an
    independent oracle.  Requires a complex-capable chart.
    """
    if not chart.complex_ok:
        raise ValueError("alt_integrate needs a complex-capable chart")
    t0, t1 = _validate_window_tol(window, tol)
    chart.require_inside(s0.x1, s0.x2)

    def f(t, y):
        return _canonical_rhs(frame, y)

    ctol = _control_tol(tol)
    sol = rk.solve(
        f, t0, s0.astuple(), t1, rtol=ctol, atol=ctol,
        inside=lambda y: chart.contains(y[0], y[1]),
    )
    return Trajectory(
        chart=chart, frame=frame, t0=t0, t_end=sol.t_end, requested_t1=t1,
        tol=tol, exited=sol.truncated, _sol=sol, _field="canonical",
    )


def abnormal_triviality_check(frame: OrthonormalFrame, pt) -> bool:
    """True iff the zero-multiplier constraint pair only admits p = 0.

    The constraints rotate the frame matrix, so the system is a rotation times
    (k l; m n) acting on (p1, p2); it is injective exactly when k n - l m is
    nonzero, which the frame precondition demands.
    """
    x1, x2 = pt
    k, l, m, n = frame.values(x1, x2)
    det = k * n - l * m
    scale = max(abs(k), abs(l), abs(m), abs(n), 1e-300)
    if abs(det) <= 1e-12 * scale * scale:
        raise DegenerateFrameError(f"frame determinant vanishes at ({x1:.6g}, {x2:.6g})")
    return True


def _adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = f(lm)
    frm = f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    return (
        _adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + _adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    )


def arc_length(traj: Trajectory, tol: float = 1e-11) -> float:
    """Integral of the control speed sqrt(A^2 + phi^2) over the window.

    For a normal extremal the speed is constant, so this equals
    sqrt(2 H) * (t_end - t0) up to quadrature error.
    """

    def speed(t):
        s = traj.eval(t)
        a, _ = switching_values(traj.frame, s)
        return math.hypot(a, s.phi)

    a, b = traj.t0, traj.t_end
    if a == b:
        return 0.0
    if b < a:
        a, b = b, a
    fa, fm, fb = speed(a), speed(0.5 * (a + b)), speed(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _adaptive_simpson(speed, a, b, fa, fm, fb, whole, tol * max(1.0, abs(whole)), 40)


def projection_jet(frame: OrthonormalFrame, s: ExtremalState):
    """First three t-derivatives of the projected curve (x1(t), x2(t)) at s.

    First and second derivatives are exact on any chart.  In the third,
    second partials of the frame coefficients are dropped; every dropped term
    carries a factor of the velocity or of A, so the third derivative is
    exact on constant-frame charts and at projection singularities (the only
    places it is consumed).
    """
    x1, x2, theta, p1, p2, phi = s.astuple()
    k, l, m, n, k1, l1, m1, n1, k2, l2, m2, n2 = frame.coeffs(x1, x2)
    ct = math.cos(theta)
    st = math.sin(theta)
    al = k * p1 + l * p2
    be = m * p1 + n * p2
    a = al * ct + be * st
    b = -al * st + be * ct
    r = k * ct + m * st
    w = l * ct + n * st
    dx1 = a * r
    dx2 = a * w
    d1 = (dx1, dx2)

    c1 = (k1 * p1 + l1 * p2) * ct + (m1 * p1 + n1 * p2) * st
    c2 = (k2 * p1 + l2 * p2) * ct + (m2 * p1 + n2 * p2) * st
    p1dot = -a * c1
    p2dot = -a * c2
    thdot = phi
    thdd = -a * b

    kdot = k1 * dx1 + k2 * dx2
    ldot = l1 * dx1 + l2 * dx2
    mdot = m1 * dx1 + m2 * dx2
    ndot = n1 * dx1 + n2 * dx2
    al_dot = kdot * p1 + k * p1dot + ldot * p2 + l * p2dot
    be_dot = mdot * p1 + m * p1dot + ndot * p2 + n * p2dot
    a_dot = al_dot * ct + be_dot * st + thdot * b
    r_dot = kdot * ct + mdot * st + thdot * (-k * st + m * ct)
    w_dot = ldot * ct + ndot * st + thdot * (-l * st + n * ct)
    ddx1 = a_dot * r + a * r_dot
    ddx2 = a_dot * w + a * w_dot
    d2 = (ddx1, ddx2)

    c1dot = (k1 * p1dot + l1 * p2dot) * ct + (m1 * p1dot + n1 * p2dot) * st \
        + thdot * (-(k1 * p1 + l1 * p2) * st + (m1 * p1 + n1 * p2) * ct)
    c2dot = (k2 * p1dot + l2 * p2dot) * ct + (m2 * p1dot + n2 * p2dot) * st \
        + thdot * (-(k2 * p1 + l2 * p2) * st + (m2 * p1 + n2 * p2) * ct)
    p1dd = -(a_dot * c1 + a * c1dot)
    p2dd = -(a_dot * c2 + a * c2dot)
    kdd = k1 * ddx1 + k2 * ddx2
    ldd = l1 * ddx1 + l2 * ddx2
    mdd = m1 * ddx1 + m2 * ddx2
    ndd = n1 * ddx1 + n2 * ddx2
    al_dd = kdd * p1 + 2.0 * kdot * p1dot + k * p1dd \
        + ldd * p2 + 2.0 * ldot * p2dot + l * p2dd
    be_dd = mdd * p1 + 2.0 * mdot * p1dot + m * p1dd \
        + ndd * p2 + 2.0 * ndot * p2dot + n * p2dd
    a_dd = al_dd * ct + be_dd * st + 2.0 * thdot * (-al_dot * st + be_dot * ct) \
        + thdd * b - thdot * thdot * a
    r_dd = kdd * ct + mdd * st + 2.0 * thdot * (-kdot * st + mdot * ct) \
        + thdd * (-k * st + m * ct) - thdot * thdot * r
    w_dd = ldd * ct + ndd * st + 2.0 * thdot * (-ldot * st + ndot * ct) \
        + thdd * (-l * st + n * ct) - thdot * thdot * w
    d3 = (
        a_dd * r + 2.0 * a_dot * r_dot + a * r_dd,
        a_dd * w + 2.0 * a_dot * w_dot + a * w_dd,
    )
    return d1, d2, d3
