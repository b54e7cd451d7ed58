"""Singular-parameter detection and normal-form classification of fronts.

A non-constant extremal projects to the surface with isolated singular
parameters exactly where the switching value A vanishes, and to the local
space of geodesics exactly where the angle velocity vanishes.  Both kinds of
singular germ are cusps; the decision and the diagnostics (the determinant of
the second and third derivative columns, and the cuspidal curvature) are
evaluated from momentum-level data, with finite-difference cross-checks
available for the projected curve itself.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .extremal import (
    ExtremalState,
    Trajectory,
    integrate,
    projection_jet,
    switching_values,
)
from .metric import OrthonormalFrame
from .pendulum import pendulum_energy, reduce as pendulum_reduce

EPS_CLASS = 1e-11
EXCLUSION_FLOOR = 1e-9
EVENT_T_TOL = 1e-12


class ClassificationError(RuntimeError):
    """A germ pair fell outside the admissible list: numerical failure."""


class InconsistentStateError(RuntimeError):
    """Momentum data contradicts the structure of a normal extremal."""


class RootClusterError(RuntimeError):
    """Two zeros of the same switching function within the time tolerance."""


class NormalFormClass(enum.Enum):
    I = "I"      # constant curve
    II = "II"    # embedding of a projection fiber
    III = "III"  # immersed germ
    IV = "IV"    # cusp

    def __str__(self):
        return self.value


ALLOWED_PAIRS = frozenset({
    (NormalFormClass.I, NormalFormClass.I),
    (NormalFormClass.II, NormalFormClass.III),
    (NormalFormClass.III, NormalFormClass.II),
    (NormalFormClass.III, NormalFormClass.III),
    (NormalFormClass.III, NormalFormClass.IV),
    (NormalFormClass.IV, NormalFormClass.III),
})


@dataclass(frozen=True)
class ClassificationPair:
    pi: NormalFormClass
    pi_prime: NormalFormClass

    def __post_init__(self):
        if (self.pi, self.pi_prime) not in ALLOWED_PAIRS:
            raise ClassificationError(
                f"pair ({self.pi}, {self.pi_prime}) outside the admissible list"
            )

    def astuple(self):
        return (self.pi, self.pi_prime)

    def __str__(self):
        return f"({self.pi}, {self.pi_prime})"


@dataclass(frozen=True)
class SingularEvent:
    """A located singular parameter of one of the two projections."""

    t: float
    projection: str  # "pi" | "pi_prime"
    refined_t_tol: float
    clazz: NormalFormClass
    delta: float
    kappa_c: Optional[float] = None  # only at surface-projection cusps


def _momentum_data(frame: OrthonormalFrame, s: ExtremalState):
    k, l, m, n = frame.values(s.x1, s.x2)
    al = k * s.p1 + l * s.p2
    be = m * s.p1 + n * s.p2
    ct = math.cos(s.theta)
    st = math.sin(s.theta)
    a = al * ct + be * st
    b = -al * st + be * ct
    speed = math.hypot(a, s.phi)
    mscale = max(math.hypot(al, be), abs(s.phi))
    return a, b, al, be, speed, mscale, (k, l, m, n)


def classify_pi(frame: OrthonormalFrame, s: ExtremalState) -> NormalFormClass:
    """Normal form of the surface projection germ at s."""
    a, b, al, be, speed, mscale, _ = _momentum_data(frame, s)
    if speed <= EPS_CLASS * max(1.0, mscale):
        return NormalFormClass.I
    if math.hypot(al, be) <= EPS_CLASS * mscale:
        return NormalFormClass.II
    if abs(a) > EPS_CLASS * mscale:
        return NormalFormClass.III
    if abs(s.phi) <= EPS_CLASS * mscale:
        raise InconsistentStateError(
            "A and theta velocity vanish together with nonzero momenta"
        )
    return NormalFormClass.IV


def classify_pi_prime(frame: OrthonormalFrame, s: ExtremalState) -> NormalFormClass:
    """Normal form of the geodesic-space projection germ at s."""
    a, b, al, be, speed, mscale, _ = _momentum_data(frame, s)
    if speed <= EPS_CLASS * max(1.0, mscale):
        return NormalFormClass.I
    if abs(s.phi) > EPS_CLASS * mscale:
        return NormalFormClass.III
    # theta velocity vanishes; A = +-speed is nonzero here.
    if abs(b) <= EPS_CLASS * mscale:
        return NormalFormClass.II
    return NormalFormClass.IV


def classify_pair(frame: OrthonormalFrame, s: ExtremalState) -> ClassificationPair:
    """Both germ classes at once; raises if the pair is inadmissible."""
    return ClassificationPair(classify_pi(frame, s), classify_pi_prime(frame, s))


def cusp_delta(second, third) -> float:
    """Determinant of the (second, third) derivative columns of a plane curve.

    The caller certifies the first derivative vanishes; a nonzero value then
    recognizes the cusp.
    """
    return second[0] * third[1] - second[1] * third[0]


def pi_cusp_delta(frame: OrthonormalFrame, s: ExtremalState) -> float:
    """Cusp determinant of the surface projection, 2 B^2 (kn - lm) thdot^3."""
    _, b, _, _, _, _, (k, l, m, n) = _momentum_data(frame, s)
    return 2.0 * b * b * (k * n - l * m) * s.phi ** 3


def pi_prime_cusp_delta(frame: OrthonormalFrame, s: ExtremalState) -> float:
    """Cusp determinant of the leaf projection in the explicit flat chart,
    2 thdd^2 A with thdd = -A B."""
    a, b, *_ = _momentum_data(frame, s)
    thdd = -a * b
    return 2.0 * thdd * thdd * a


def curvature(frame: OrthonormalFrame, s: ExtremalState) -> float:
    """Signed curvature thdot / |A| of the projected curve at an immersive s.

    Exact on constant-frame charts; on curved charts the same expression is
    reported as an experimental value and should be read next to the
    finite-difference estimate (see CurvatureEstimate).
    """
    a, _, *_ = _momentum_data(frame, s)
    if a == 0.0:
        raise ValueError("projection is singular here (A = 0)")
    return s.phi / abs(a)


@dataclass(frozen=True)
class CurvatureEstimate:
    value: float           # thdot / |A|
    fd_value: float        # det(d1, d2) / |d1|^3 from curve derivatives
    validated: bool        # formula exact for this chart?


def curvature_estimate(frame: OrthonormalFrame, s: ExtremalState) -> CurvatureEstimate:
    d1, d2, _ = projection_jet(frame, s)
    speed3 = math.hypot(*d1) ** 3
    fd = (d1[0] * d2[1] - d1[1] * d2[0]) / speed3
    flat_like = frame.chart.name == "flat"
    return CurvatureEstimate(value=curvature(frame, s), fd_value=fd, validated=flat_like)


def cuspidal_curvature(frame: OrthonormalFrame, s: ExtremalState) -> float:
    """det(d2, d3) / |d2|^(5/2) at a cusp of the surface projection.

    From momentum data: delta = 2 B^2 (kn - lm) thdot^3 over
    (|thdot B| sqrt(R^2 + S^2))^(5/2); on the flat chart this reduces to
    2 sign(thdot) |thdot|^(1/2) / (p1^2 + p2^2)^(1/4).
    """
    a, b, al, be, speed, mscale, (k, l, m, n) = _momentum_data(frame, s)
    if abs(a) > EPS_CLASS * max(mscale, 1e-300):
        raise ValueError("not a cusp of the surface projection (A != 0)")
    ct = math.cos(s.theta)
    st = math.sin(s.theta)
    r = k * ct + m * st
    w = l * ct + n * st
    acc = abs(s.phi * b) * math.hypot(r, w)
    if acc == 0.0:
        raise ValueError("degenerate jet: second derivative vanishes")
    delta = 2.0 * b * b * (k * n - l * m) * s.phi ** 3
    return delta / acc ** 2.5


# --- Event detection ------------------------------------------------------


def _bisect_root(g, lo, hi, glo):
    """Refine a bracketed sign change of g to EVENT_T_TOL; returns (t, halfwidth)."""
    for _ in range(200):
        if hi - lo <= EVENT_T_TOL:
            break
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if gm == 0.0:
            return mid, 0.5 * (hi - lo)
        if (glo < 0.0) == (gm < 0.0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi), 0.5 * (hi - lo)


def _sample_times(traj: Trajectory, freq: float):
    """Dense scan grid: at least four samples per accepted step, and at least
    a fixed number per characteristic oscillation."""
    lo, hi = sorted((traj.t0, traj.t_end))
    max_dt = min(0.25 / max(freq, 0.25), (hi - lo) / 8.0)
    times = []
    nodes = sorted(traj.nodes)
    for a, b in zip(nodes[:-1], nodes[1:]):
        nsub = max(4, int(math.ceil((b - a) / max_dt)))
        for i in range(nsub):
            times.append(a + (b - a) * i / nsub)
    times.append(nodes[-1])
    return times


def detect_events(traj: Trajectory) -> list[SingularEvent]:
    """All isolated singular parameters of both projections in the window.

    Zeros of A(t) are surface-projection events, zeros of thdot(t) are
    leaf-projection events; both are located by sign-change bracketing on a
    dense sample of the output and refined by bisection.  Identically
    vanishing switching functions (fiber curves, geodesic lifts) produce no
    isolated events: those germs are global and carried by the t0
    classification.
    """
    frame = traj.frame
    s0 = traj.eval(traj.t0)
    pair0 = classify_pair(frame, s0)
    if pair0.astuple() == (NormalFormClass.I, NormalFormClass.I):
        return []
    skip_pi = pair0.pi == NormalFormClass.II
    skip_pi_prime = pair0.pi_prime == NormalFormClass.II

    params = pendulum_reduce(frame, s0)
    freq = max(params.omega, abs(s0.phi), 0.5)
    times = _sample_times(traj, freq)

    def a_of(t):
        return switching_values(frame, traj.eval(t))[0]

    def phi_of(t):
        return traj.eval_raw(t)[5]

    events = []
    scans = []
    if not skip_pi:
        scans.append(("pi", a_of))
    if not skip_pi_prime:
        scans.append(("pi_prime", phi_of))
    for projection, g in scans:
        roots = []
        gprev = g(times[0])
        tprev = times[0]
        for t in times[1:]:
            gcur = g(t)
            if gprev == 0.0:
                roots.append((tprev, 0.0))
            elif (gprev < 0.0) != (gcur < 0.0):
                root, width = _bisect_root(g, tprev, t, gprev)
                roots.append((root, width))
            gprev, tprev = gcur, t
        if gprev == 0.0 and (not roots or abs(roots[-1][0] - tprev) > EVENT_T_TOL):
            roots.append((tprev, 0.0))
        for (t1, _), (t2, _) in zip(roots[:-1], roots[1:]):
            if t2 - t1 <= EVENT_T_TOL:
                raise RootClusterError(
                    f"two {projection} events within {EVENT_T_TOL} at t={t1!r}"
                )
        for root, width in roots:
            s = traj.eval(root)
            if projection == "pi":
                clazz = classify_pi(frame, s)
                delta = pi_cusp_delta(frame, s)
                kappa = cuspidal_curvature(frame, s) if clazz == NormalFormClass.IV else None
            else:
                clazz = classify_pi_prime(frame, s)
                delta = pi_prime_cusp_delta(frame, s)
                kappa = None
            events.append(SingularEvent(
                t=root, projection=projection, refined_t_tol=max(width, EVENT_T_TOL),
                clazz=clazz, delta=delta, kappa_c=kappa,
            ))
    events.sort(key=lambda e: e.t)
    return events


# --- Finite-difference jets of the projected curve ------------------------


def _stencil_weights(deriv: int, offsets):
    """Weights reproducing the deriv-th derivative exactly on polynomials."""
    n = len(offsets)
    van = np.vander(np.asarray(offsets, dtype=float), n, increasing=True).T
    rhs = np.zeros(n)
    rhs[deriv] = math.factorial(deriv)
    return np.linalg.solve(van, rhs)


_OFFSETS = (-3, -2, -1, 0, 1, 2, 3)
_W1 = _stencil_weights(1, _OFFSETS)
_W2 = _stencil_weights(2, _OFFSETS)
_W3 = _stencil_weights(3, _OFFSETS)


def fd_projection_jets(chart, frame, s: ExtremalState, h: float, tol: float = 1e-13):
    """(d1, d2, d3) of the projected curve at s by central differences.

    The seven samples come from two short re-integrations started at s, so
    the stencil accuracy is set by the local tolerance rather than by the
    parent trajectory's interpolant.
    """
    fwd = integrate(chart, frame, s, (0.0, 3.5 * h), tol)
    bwd = integrate(chart, frame, s, (0.0, -3.5 * h), tol)
    if fwd.exited or bwd.exited:
        raise ValueError("stencil leaves the chart; event too close to the boundary")
    pts = []
    for j in _OFFSETS:
        src = fwd if j >= 0 else bwd
        st = src.eval(j * h) if j != 0 else s
        pts.append((st.x1, st.x2))
    out = []
    for w, power in ((_W1, 1), (_W2, 2), (_W3, 3)):
        d = (
            sum(wi * p[0] for wi, p in zip(w, pts)) / h ** power,
            sum(wi * p[1] for wi, p in zip(w, pts)) / h ** power,
        )
        out.append(d)
    return tuple(out)


def fd_event_step(frame: OrthonormalFrame, s: ExtremalState) -> float:
    """Stencil spacing adapted to the local oscillation rate.

    The stencil truncation scales like (h freq)^4 while the sample noise is
    set by the local re-integration tolerance, so this spacing keeps the
    relative determinant error a couple of orders under the tightest
    cross-check tolerance.
    """
    params = pendulum_reduce(frame, s)
    freq = max(params.omega, abs(s.phi), 1.0)
    return 0.015 / freq


def event_delta_fd(traj: Trajectory, event: SingularEvent, h: Optional[float] = None) -> float:
    """Finite-difference cusp determinant of the surface projection at event."""
    s = traj.eval(event.t)
    if h is None:
        h = fd_event_step(traj.frame, s)
    _, d2, d3 = fd_projection_jets(traj.chart, traj.frame, s, h)
    return cusp_delta(d2, d3)


def event_kappa_c_fd(traj: Trajectory, event: SingularEvent, h: Optional[float] = None) -> float:
    """Finite-difference cuspidal curvature at a surface-projection cusp."""
    s = traj.eval(event.t)
    if h is None:
        h = fd_event_step(traj.frame, s)
    _, d2, d3 = fd_projection_jets(traj.chart, traj.frame, s, h)
    return cusp_delta(d2, d3) / math.hypot(*d2) ** 2.5


# --- Alternation and cusp-direction report (flat librations) --------------


@dataclass(frozen=True)
class ZigzagReport:
    regime: str                     # libration | rotation | separatrix | degenerate
    applicable: bool                # strict libration, both event families present
    events: tuple
    alternation_ok: Optional[bool]  # None when not applicable
    cusp_count: int
    inflection_count: int
    max_cusp_direction_angle: float  # radians, against the fixed normal of p
    notes: str = ""

    def lines(self):
        out = [f"regime: {self.regime}"]
        out.append(f"events: {self.cusp_count} cusps, {self.inflection_count} inflections")
        if self.alternation_ok is None:
            out.append("alternation: not applicable")
        else:
            out.append(f"alternation: {'PASS' if self.alternation_ok else 'FAIL'}")
        out.append(f"max cusp-direction deviation: {self.max_cusp_direction_angle:.3e} rad")
        if self.notes:
            out.append(self.notes)
        return out


def zigzag_report(traj: Trajectory) -> ZigzagReport:
    """Alternation and parallel-cusp-direction check on a flat trajectory.

    Strictly librating runs must alternate surface cusps with angle
    turning points, and every cusp's second-derivative direction must be
    parallel to the fixed vector (p2, -p1).  Rotation and separatrix regimes
    report the event list with the alternation verdict marked not-applicable.
    """
    if traj.chart.name != "flat":
        raise ValueError("zigzag analysis is defined on the flat chart")
    frame = traj.frame
    s0 = traj.eval(traj.t0)
    params = pendulum_reduce(frame, s0)
    if params.degenerate:
        return ZigzagReport(
            regime="degenerate", applicable=False, events=(), alternation_ok=None,
            cusp_count=0, inflection_count=0, max_cusp_direction_angle=0.0,
            notes="momenta vanish: fiber or constant curve",
        )
    energy = pendulum_energy(s0, params)
    gap = energy - 0.5 * params.r
    if abs(gap) <= 1e-12 * max(1.0, params.r):
        regime = "separatrix"
    elif gap < 0.0:
        regime = "libration"
    else:
        regime = "rotation"

    events = tuple(detect_events(traj))
    cusps = [e for e in events if e.projection == "pi"]
    inflections = [e for e in events if e.projection == "pi_prime"]

    max_angle = 0.0
    normal = (s0.p2, -s0.p1)
    nn = math.hypot(*normal)
    for e in cusps:
        s = traj.eval(e.t)
        _, d2, _ = projection_jet(frame, s)
        d2n = math.hypot(*d2)
        if d2n == 0.0 or nn == 0.0:
            continue
        cross = abs(d2[0] * normal[1] - d2[1] * normal[0]) / (d2n * nn)
        angle = math.asin(min(1.0, cross))
        max_angle = max(max_angle, angle)

    applicable = regime == "libration" and bool(cusps) and bool(inflections)
    alternation = None
    if applicable:
        alternation = all(
            a.projection != b.projection for a, b in zip(events[:-1], events[1:])
        )
    notes = "" if applicable else f"alternation n/a in {regime} regime"
    return ZigzagReport(
        regime=regime, applicable=applicable, events=events,
        alternation_ok=alternation, cusp_count=len(cusps),
        inflection_count=len(inflections), max_cusp_direction_angle=max_angle,
        notes=notes,
    )
