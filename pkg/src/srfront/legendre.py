"""The two projections of the unit tangent bundle and their local charts.

The surface projection forgets the direction.  The second projection sends a
point of UM to the oriented geodesic through it; locally it is realized by a
pair of independent first integrals of the geodesic flow, either the explicit
flat-chart pair or numeric section coordinates obtained by following the flow
to a transverse 2-plane through a base point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import rk
from .extremal import ExtremalState, Trajectory
from .metric import MetricChart, OrthonormalFrame, christoffel_unchecked


class LeafSectionError(RuntimeError):
    """The flow line never met the section transversally."""


def project_pi(s: ExtremalState) -> tuple[float, float]:
    """Forget the direction: (x1, x2)."""
    return (s.x1, s.x2)


@dataclass(frozen=True)
class GeodesicFlowField:
    """Generator of the unit-speed geodesic flow on (x1, x2, theta).

    The horizontal components are R = k cos(theta) + m sin(theta) and
    S = l cos(theta) + n sin(theta).  The angular component W comes from the
    drift relation on a parallel chart (where only the x1-derivative of g22
    enters) and from the connection coefficients in general; on any parallel
    chart W(., ., 0) = 0.
    """

    chart: MetricChart
    frame: OrthonormalFrame

    def components(self, x1: float, x2: float, theta: float) -> tuple[float, float, float]:
        k, l, m, n = self.frame.values(x1, x2)
        ct = math.cos(theta)
        st = math.sin(theta)
        r = k * ct + m * st
        s = l * ct + n * st
        if self.chart.is_geodesic_parallel:
            g22 = self.chart.g22(x1, x2)
            (_, _), (_, _), (d22_1, _) = self.chart.metric_derivatives_at(x1, x2)
            w = -(d22_1 / (2.0 * g22)) * st
            return r, s, w
        gamma = christoffel_unchecked(self.chart, (x1, x2))
        _, _, _, _, k1, l1, m1, n1, k2, l2, m2, n2 = self.frame.coeffs(x1, x2)
        b1 = -(gamma[0][0][0] * r * r + 2.0 * gamma[0][0][1] * r * s + gamma[0][1][1] * s * s) \
            - ((k1 * r + k2 * s) * ct + (m1 * r + m2 * s) * st)
        b2 = -(gamma[1][0][0] * r * r + 2.0 * gamma[1][0][1] * r * s + gamma[1][1][1] * s * s) \
            - ((l1 * r + l2 * s) * ct + (n1 * r + n2 * s) * st)
        w1 = -k * st + m * ct
        w2 = -l * st + n * ct
        g11, g12, g22 = self.chart.metric_at(x1, x2)
        w = b1 * (g11 * w1 + g12 * w2) + b2 * (g12 * w1 + g22 * w2)
        return r, s, w

    def solve(self, start, span: float, tol: float = 1e-12) -> rk.Solution:
        """Integrate the flow from start = (x1, x2, theta) over [0, span]."""

        def f(t, y):
            return self.components(y[0], y[1], y[2])

        return rk.solve(
            f, 0.0, tuple(start), span, rtol=tol, atol=tol,
            inside=lambda y: self.chart.contains(y[0], y[1]),
        )


def geodesic_flow(chart: MetricChart, frame: OrthonormalFrame, pt, theta: float):
    """Flow generator components (R, S, W) at a single point."""
    return GeodesicFlowField(chart, frame).components(pt[0], pt[1], theta)


def geodesic_by_christoffel(chart: MetricChart, pt, velocity, span: float,
                            tol: float = 1e-12) -> rk.Solution:
    """Second-order geodesic equation via connection coefficients.

    Independent of the flow field above; used to validate it.  State is
    (x1, x2, v1, v2).
    """

    def f(t, y):
        x1, x2, v1, v2 = y
        gamma = christoffel_unchecked(chart, (x1, x2))
        a1 = -(gamma[0][0][0] * v1 * v1 + 2.0 * gamma[0][0][1] * v1 * v2
               + gamma[0][1][1] * v2 * v2)
        a2 = -(gamma[1][0][0] * v1 * v1 + 2.0 * gamma[1][0][1] * v1 * v2
               + gamma[1][1][1] * v2 * v2)
        return (v1, v2, a1, a2)

    y0 = (pt[0], pt[1], velocity[0], velocity[1])
    return rk.solve(f, 0.0, y0, span, rtol=tol, atol=tol,
                    inside=lambda y: chart.contains(y[0], y[1]))


@dataclass(frozen=True)
class LeafChart:
    """Two independent first integrals (F, E) of the geodesic flow near a base.

    ``provenance`` is "explicit" for the closed-form flat pair and "numeric"
    for section coordinates.  ``evaluate`` maps (x1, x2, theta) to (f, e).
    """

    provenance: str
    base: tuple
    evaluate: Callable
    validity_radius: float = math.inf

    def in_validity(self, x1: float, x2: float, theta: float) -> bool:
        b = self.base
        return math.sqrt((x1 - b[0]) ** 2 + (x2 - b[1]) ** 2 + (theta - b[2]) ** 2) \
            <= self.validity_radius


def leaf_chart_flat(base: ExtremalState) -> LeafChart:
    """Explicit first integrals of the flat geodesic flow.

    F = -x1 sin(theta) + x2 cos(theta) is the signed offset of the line, and
    E = theta its direction; both are constant along straight-line lifts.
    """

    def evaluate(x1, x2, theta):
        return (-x1 * math.sin(theta) + x2 * math.cos(theta), theta)

    return LeafChart(
        provenance="explicit",
        base=(base.x1, base.x2, base.theta),
        evaluate=evaluate,
    )


_TANGENCY_FLOOR = 1e-8


def leaf_chart_numeric(
    chart: MetricChart,
    frame: OrthonormalFrame,
    base: ExtremalState,
    tol: float = 1e-12,
    validity_radius: Optional[float] = None,
    section_rotation: float = 0.0,
) -> LeafChart:
    """Section coordinates on the local space of geodesics near base.

    The section is the 2-plane through the base point spanned by the vertical
    direction and the horizontal direction orthogonal to the flow; (F, E) of
    a query point are the section coordinates of the point where its flow
    line crosses the section (crossing refined by bisection).  If the flow
    runs tangent to the section at a query point, the evaluation retries a
    rotated section before reporting failure.
    """
    field = GeodesicFlowField(chart, frame)
    bx, by, bth = base.x1, base.x2, base.theta
    r0, s0, _ = field.components(bx, by, bth)
    hn = math.hypot(r0, s0)
    if hn == 0.0:
        raise LeafSectionError("flow has no horizontal component at the base")
    ca, sa = math.cos(section_rotation), math.sin(section_rotation)
    # Plane normal (horizontal, along the flow) and in-plane axes.
    n1, n2 = (r0 * ca - s0 * sa) / hn, (s0 * ca + r0 * sa) / hn
    e1 = (-n2, n1, 0.0)

    if validity_radius is None:
        (a1, b1), (a2, b2) = chart.domain
        margin = min(bx - a1, b1 - bx, by - a2, b2 - by)
        validity_radius = max(0.05, min(1.0, 0.8 * margin))

    def plane_gap(z):
        return (z[0] - bx) * n1 + (z[1] - by) * n2

    def crossing(q, direction, span):
        sol = field.solve(q, direction * span, tol=tol)
        ts = sol.ts
        gs = [plane_gap(sol.eval(t)) for t in ts]
        for (ta, ga), (tb, gb) in zip(zip(ts[:-1], gs[:-1]), zip(ts[1:], gs[1:])):
            if ga == 0.0:
                return sol.eval(ta)
            if (ga < 0.0) != (gb < 0.0):
                lo, hi, glo = ta, tb, ga
                for _ in range(200):
                    mid = 0.5 * (lo + hi)
                    gm = plane_gap(sol.eval(mid))
                    if gm == 0.0:
                        return sol.eval(mid)
                    if (glo < 0.0) == (gm < 0.0):
                        lo, glo = mid, gm
                    else:
                        hi = mid
                    if abs(hi - lo) <= 1e-12:
                        break
                return sol.eval(0.5 * (lo + hi))
        if gs[-1] == 0.0:
            return sol.eval(ts[-1])
        return None

    def evaluate(x1, x2, theta):
        q = (x1, x2, theta)
        gap = plane_gap(q)
        if gap == 0.0:
            z = q
        else:
            rr, ss, _ = field.components(x1, x2, theta)
            vdotn = rr * n1 + ss * n2
            vmag = math.hypot(rr, ss)
            span = max(4.0 * abs(gap) / max(abs(vdotn), _TANGENCY_FLOOR * max(vmag, 1.0)), 0.5)
            if abs(vdotn) < _TANGENCY_FLOOR * max(vmag, 1.0):
                # Tangent start: search both time directions.
                z = crossing(q, +1.0, span) or crossing(q, -1.0, span)
            else:
                direction = -1.0 if gap * vdotn > 0.0 else 1.0
                z = crossing(q, direction, span)
                if z is None:
                    z = crossing(q, -direction, span)
            if z is None:
                raise LeafSectionError(
                    f"flow line through ({x1:.4g}, {x2:.4g}, {theta:.4g}) missed the section"
                )
        f_val = (z[0] - bx) * e1[0] + (z[1] - by) * e1[1]
        e_val = z[2] - bth
        return (f_val, e_val)

    def evaluate_with_retry(x1, x2, theta):
        try:
            return evaluate(x1, x2, theta)
        except LeafSectionError:
            if section_rotation == 0.0:
                rotated = leaf_chart_numeric(
                    chart, frame, base, tol=tol,
                    validity_radius=validity_radius, section_rotation=0.25,
                )
                return rotated.evaluate(x1, x2, theta)
            raise

    return LeafChart(
        provenance="numeric",
        base=(bx, by, bth),
        evaluate=evaluate_with_retry,
        validity_radius=validity_radius,
    )


@dataclass(frozen=True)
class LeafProjection:
    """Samples (f(t), e(t)) of a trajectory through a leaf chart."""

    times: tuple
    values: tuple              # (f, e) pairs
    truncated: bool            # left the leaf validity neighborhood
    leaf: LeafChart

    def curve(self):
        return list(zip(self.times, self.values))


def project_pi_prime(
    traj: Trajectory,
    leaf: LeafChart,
    times=None,
) -> LeafProjection:
    """Trace the trajectory in leaf coordinates.

    Stops with a truncation marker at the first sample outside the leaf
    validity neighborhood.
    """
    if times is None:
        lo, hi = sorted((traj.t0, traj.t_end))
        count = 200
        times = [lo + (hi - lo) * i / count for i in range(count + 1)]
    kept = []
    vals = []
    truncated = False
    for t in times:
        s = traj.eval(t)
        if not leaf.in_validity(s.x1, s.x2, s.theta):
            truncated = True
            break
        kept.append(t)
        vals.append(leaf.evaluate(s.x1, s.x2, s.theta))
    return LeafProjection(times=tuple(kept), values=tuple(vals),
                          truncated=truncated, leaf=leaf)


_FD_OFFSETS = (-3, -2, -1, 0, 1, 2, 3)


def leaf_jet_fd(traj: Trajectory, leaf: LeafChart, t: float, h: float):
    """(d1, d2, d3) of (f, e) at t by central differences on the trajectory."""
    from .singularity import _W1, _W2, _W3  # shared stencil weights

    pts = []
    for j in _FD_OFFSETS:
        s = traj.eval(t + j * h)
        if not leaf.in_validity(s.x1, s.x2, s.theta):
            raise ValueError("stencil leaves the leaf validity neighborhood")
        pts.append(leaf.evaluate(s.x1, s.x2, s.theta))
    out = []
    for w, power in ((_W1, 1), (_W2, 2), (_W3, 3)):
        out.append((
            sum(wi * p[0] for wi, p in zip(w, pts)) / h ** power,
            sum(wi * p[1] for wi, p in zip(w, pts)) / h ** power,
        ))
    return tuple(out)


def first_integral_residual(leaf: LeafChart, field: GeodesicFlowField,
                            q, delta: float = 1e-4) -> tuple[float, float]:
    """|dF . V| and |dE . V| at q by central differences along the flow."""
    x1, x2, th = q
    r, s, w = field.components(x1, x2, th)
    norm = math.sqrt(r * r + s * s + w * w)
    if norm == 0.0:
        return (0.0, 0.0)
    ux, uy, uth = r / norm, s / norm, w / norm
    fp = leaf.evaluate(x1 + delta * ux, x2 + delta * uy, th + delta * uth)
    fm = leaf.evaluate(x1 - delta * ux, x2 - delta * uy, th - delta * uth)
    return (
        abs(fp[0] - fm[0]) / (2.0 * delta) * norm,
        abs(fp[1] - fm[1]) / (2.0 * delta) * norm,
    )


def leaf_differentials(leaf: LeafChart, q, h: float = 1e-5):
    """2x3 Jacobian of (F, E) at q by central differences."""
    x1, x2, th = q
    cols = []
    for dx in ((h, 0.0, 0.0), (0.0, h, 0.0), (0.0, 0.0, h)):
        fp = leaf.evaluate(x1 + dx[0], x2 + dx[1], th + dx[2])
        fm = leaf.evaluate(x1 - dx[0], x2 - dx[1], th - dx[2])
        cols.append(((fp[0] - fm[0]) / (2 * h), (fp[1] - fm[1]) / (2 * h)))
    return (
        (cols[0][0], cols[1][0], cols[2][0]),
        (cols[0][1], cols[1][1], cols[2][1]),
    )
