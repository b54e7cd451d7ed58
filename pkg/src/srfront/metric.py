"""Surface metrics in local charts: frames, Christoffel symbols, validation.

A chart is a rectangle in (x1, x2) with metric coefficients g11, g12, g22.
The builtin charts (flat plane, unit sphere, hyperbolic plane) are all in
geodesic parallel form g = dx1^2 + g22(x1) dx2^2 with analytic derivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from . import scalars
from .expressions import compile_expression


class OutsideDomainError(ValueError):
    """Point lies outside the chart rectangle."""


class DegenerateMetricError(ValueError):
    """Metric fails positive definiteness where it is needed."""


class DegenerateFrameError(ValueError):
    """Frame coefficient matrix is singular at the queried point."""


@dataclass(frozen=True)
class MetricChart:
    """A surface metric on a coordinate rectangle.

    ``dg11``/``dg12``/``dg22`` return both first partials when analytic
    derivatives are available; otherwise they are None and derivatives come
    from complex step (if ``complex_ok``) or central differences.
    """

    name: str
    domain: tuple[tuple[float, float], tuple[float, float]]
    g11: Callable
    g12: Callable
    g22: Callable
    dg11: Optional[Callable] = None
    dg12: Optional[Callable] = None
    dg22: Optional[Callable] = None
    is_geodesic_parallel: bool = False
    complex_ok: bool = False

    @property
    def analytic_derivatives(self) -> bool:
        """True when derivative quality is analytic (exact or complex step)."""
        if self.dg11 is not None and self.dg12 is not None and self.dg22 is not None:
            return True
        return self.complex_ok

    def contains(self, x1: float, x2: float) -> bool:
        (a1, b1), (a2, b2) = self.domain
        return a1 <= x1 <= b1 and a2 <= x2 <= b2

    def require_inside(self, x1: float, x2: float) -> None:
        if not self.contains(x1, x2):
            raise OutsideDomainError(
                f"point ({x1:.6g}, {x2:.6g}) outside chart {self.name!r} domain {self.domain}"
            )

    def metric_at(self, x1: float, x2: float) -> tuple[float, float, float]:
        return self.g11(x1, x2), self.g12(x1, x2), self.g22(x1, x2)

    def metric_derivatives_at(self, x1, x2):
        """((d1 g11, d2 g11), (d1 g12, d2 g12), (d1 g22, d2 g22))."""
        out = []
        for g, dg in ((self.g11, self.dg11), (self.g12, self.dg12), (self.g22, self.dg22)):
            if dg is not None:
                out.append(tuple(dg(x1, x2)))
            else:
                out.append(scalars.grad2(g, x1, x2, self.complex_ok))
        return tuple(out)


def _const(value):
    return lambda x1, x2: value


def _dconst():
    return lambda x1, x2: (0.0, 0.0)


def builtin_chart(name: str) -> MetricChart:
    """Builtin geodesic parallel charts: "flat", "sphere", "hyperbolic"."""
    if name == "flat":
        return MetricChart(
            name="flat",
            domain=((-50.0, 50.0), (-50.0, 50.0)),
            g11=_const(1.0),
            g12=_const(0.0),
            g22=_const(1.0),
            dg11=_dconst(),
            dg12=_dconst(),
            dg22=_dconst(),
            is_geodesic_parallel=True,
            complex_ok=True,
        )
    if name == "sphere":
        half = math.pi / 2 - 0.1

        def g22(x1, x2):
            c = scalars.cos(x1)
            return c * c

        def dg22(x1, x2):
            return (-scalars.sin(2.0 * x1), 0.0)

        return MetricChart(
            name="sphere",
            domain=((-half, half), (-60.0, 60.0)),
            g11=_const(1.0),
            g12=_const(0.0),
            g22=g22,
            dg11=_dconst(),
            dg12=_dconst(),
            dg22=dg22,
            is_geodesic_parallel=True,
            complex_ok=True,
        )
    if name == "hyperbolic":

        def g22(x1, x2):
            c = scalars.cosh(x1)
            return c * c

        def dg22(x1, x2):
            return (scalars.sinh(2.0 * x1), 0.0)

        return MetricChart(
            name="hyperbolic",
            domain=((-8.0, 8.0), (-60.0, 60.0)),
            g11=_const(1.0),
            g12=_const(0.0),
            g22=g22,
            dg11=_dconst(),
            dg12=_dconst(),
            dg22=dg22,
            is_geodesic_parallel=True,
            complex_ok=True,
        )
    raise ValueError(f"unknown builtin chart {name!r}")


def chart_from_expressions(
    g11: str,
    g12: str,
    g22: str,
    domain=((-2.0, 2.0), (-2.0, 2.0)),
    name: str = "custom",
    is_geodesic_parallel: bool = False,
) -> MetricChart:
    """Build a chart from expression strings in the variables x1, x2."""
    chart = MetricChart(
        name=name,
        domain=(tuple(map(float, domain[0])), tuple(map(float, domain[1]))),
        g11=compile_expression(g11),
        g12=compile_expression(g12),
        g22=compile_expression(g22),
        is_geodesic_parallel=is_geodesic_parallel,
        complex_ok=True,
    )
    _check_positive_definite(chart)
    return chart


def chart_from_callables(
    g11: Callable,
    g12: Callable,
    g22: Callable,
    domain,
    name: str = "user",
    dg11=None,
    dg12=None,
    dg22=None,
    is_geodesic_parallel: bool = False,
    complex_ok: bool = False,
) -> MetricChart:
    """Wrap user-supplied coefficient callables (optionally with partials)."""
    chart = MetricChart(
        name=name,
        domain=(tuple(map(float, domain[0])), tuple(map(float, domain[1]))),
        g11=g11,
        g12=g12,
        g22=g22,
        dg11=dg11,
        dg12=dg12,
        dg22=dg22,
        is_geodesic_parallel=is_geodesic_parallel,
        complex_ok=complex_ok,
    )
    _check_positive_definite(chart)
    return chart


def _check_positive_definite(chart, grid=12):
    (a1, b1), (a2, b2) = chart.domain
    for i in range(grid + 1):
        for j in range(grid + 1):
            x1 = a1 + (b1 - a1) * i / grid
            x2 = a2 + (b2 - a2) * j / grid
            g11, g12, g22 = chart.metric_at(x1, x2)
            if g11 <= 0.0 or g11 * g22 - g12 * g12 <= 0.0:
                raise DegenerateMetricError(
                    f"metric not positive definite at ({x1:.4g}, {x2:.4g})"
                )


def christoffel(chart: MetricChart, pt) -> tuple:
    """All eight connection coefficients at pt, indexed G[k][i][j] (0-based).

    G^k_ij = 1/2 g^{kl} (d_j g_{li} + d_i g_{lj} - d_l g_{ij}); symmetric in
    (i, j).
    """
    chart.require_inside(pt[0], pt[1])
    return christoffel_unchecked(chart, pt)


def christoffel_unchecked(chart: MetricChart, pt) -> tuple:
    """Connection coefficients without the domain gate.

    Integrator stages may probe marginally outside the chart rectangle before
    the admissibility test truncates the step; the coefficient formulas are
    still well defined there.
    """
    x1, x2 = pt
    g11, g12, g22 = chart.metric_at(x1, x2)
    det = g11 * g22 - g12 * g12
    if g11 <= 0.0 or det <= 0.0:
        raise DegenerateMetricError(f"metric degenerate at ({x1:.6g}, {x2:.6g})")
    (d11_1, d11_2), (d12_1, d12_2), (d22_1, d22_2) = chart.metric_derivatives_at(x1, x2)

    g = ((g11, g12), (g12, g22))
    ginv = ((g22 / det, -g12 / det), (-g12 / det, g11 / det))
    # dg[l][i][j] = d_l g_ij
    dg = (
        ((d11_1, d12_1), (d12_1, d22_1)),
        ((d11_2, d12_2), (d12_2, d22_2)),
    )
    _ = g

    gamma = [[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]
    for k in range(2):
        for i in range(2):
            for j in range(2):
                total = 0.0
                for l in range(2):
                    total += ginv[k][l] * (dg[j][l][i] + dg[i][l][j] - dg[l][i][j])
                gamma[k][i][j] = 0.5 * total
    return tuple(tuple(tuple(row) for row in plane) for plane in gamma)


@dataclass(frozen=True)
class OrthonormalFrame:
    """Positively oriented orthonormal frame v1 = k d1 + l d2, v2 = m d1 + n d2.

    ``values`` returns (k, l, m, n) and accepts complex coordinates whenever
    the chart does; ``coeffs`` additionally returns the first partials
    (k, l, m, n, k_1, l_1, m_1, n_1, k_2, l_2, m_2, n_2) for real input.
    """

    chart: MetricChart
    values: Callable
    coeffs: Callable

    def determinant(self, x1: float, x2: float) -> float:
        k, l, m, n = self.values(x1, x2)
        return k * n - l * m


def frame_from_metric(chart: MetricChart) -> OrthonormalFrame:
    """Gram-Schmidt frame with v1 along d/dx1.

    In general k = 1/sqrt(g11), l = 0, m = -g12 / (sqrt(g11) sqrt(det)),
    n = sqrt(g11) / sqrt(det); a geodesic parallel chart reduces this to
    k = 1, l = 0, m = 0, n = 1/sqrt(g22).
    """
    if chart.is_geodesic_parallel:
        g22 = chart.g22

        def values(x1, x2):
            return 1.0, 0.0, 0.0, 1.0 / scalars.sqrt(g22(x1, x2))

        if chart.dg22 is not None:
            dg22 = chart.dg22

            def coeffs(x1, x2):
                G = g22(x1, x2)
                d1, d2 = dg22(x1, x2)
                c = -0.5 / (G * math.sqrt(G))
                return (1.0, 0.0, 0.0, 1.0 / math.sqrt(G),
                        0.0, 0.0, 0.0, c * d1,
                        0.0, 0.0, 0.0, c * d2)

        else:

            def coeffs(x1, x2):
                G = g22(x1, x2)
                d1, d2 = scalars.grad2(g22, x1, x2, chart.complex_ok)
                c = -0.5 / (G * math.sqrt(G))
                return (1.0, 0.0, 0.0, 1.0 / math.sqrt(G),
                        0.0, 0.0, 0.0, c * d1,
                        0.0, 0.0, 0.0, c * d2)

        return OrthonormalFrame(chart=chart, values=values, coeffs=coeffs)

    def values(x1, x2):
        g11 = chart.g11(x1, x2)
        g12 = chart.g12(x1, x2)
        g22 = chart.g22(x1, x2)
        det = g11 * g22 - g12 * g12
        s11 = scalars.sqrt(g11)
        sdet = scalars.sqrt(det)
        return 1.0 / s11, 0.0, -g12 / (s11 * sdet), s11 / sdet

    def coeffs(x1, x2):
        k, l, m, n = values(x1, x2)
        if chart.complex_ok:
            h = scalars.CSTEP
            k1, l1, m1, n1 = [v.imag / h for v in values(complex(x1, h), x2)]
            k2, l2, m2, n2 = [v.imag / h for v in values(x1, complex(x2, h))]
        else:
            h1 = scalars.FD_STEP * max(1.0, abs(x1))
            h2 = scalars.FD_STEP * max(1.0, abs(x2))
            vp1 = values(x1 + h1, x2)
            vm1 = values(x1 - h1, x2)
            vp2 = values(x1, x2 + h2)
            vm2 = values(x1, x2 - h2)
            k1, l1, m1, n1 = [(a - b) / (2 * h1) for a, b in zip(vp1, vm1)]
            k2, l2, m2, n2 = [(a - b) / (2 * h2) for a, b in zip(vp2, vm2)]
        return (k, l, m, n, k1, l1, m1, n1, k2, l2, m2, n2)

    def checked_values(x1, x2):
        if not isinstance(x1, complex) and not isinstance(x2, complex):
            g11 = chart.g11(x1, x2)
            g12 = chart.g12(x1, x2)
            g22 = chart.g22(x1, x2)
            if g11 <= 0.0 or g11 * g22 - g12 * g12 <= 0.0:
                raise DegenerateMetricError(
                    f"metric degenerate at ({x1:.6g}, {x2:.6g})"
                )
        return values(x1, x2)

    return OrthonormalFrame(chart=chart, values=checked_values, coeffs=coeffs)


@dataclass(frozen=True)
class GeodesicParallelReport:
    """Maximum violations of the four geodesic parallel chart conditions."""

    chart_name: str
    max_g11_violation: float
    max_g12_violation: float
    max_axis_g22_violation: float
    max_axis_dg22_violation: float
    tolerance: float
    grid: tuple[int, int]

    @property
    def passed(self) -> bool:
        worst = max(
            self.max_g11_violation,
            self.max_g12_violation,
            self.max_axis_g22_violation,
            self.max_axis_dg22_violation,
        )
        return worst <= self.tolerance

    def lines(self):
        return [
            f"chart {self.chart_name!r} geodesic parallel check (tol {self.tolerance:.1e})",
            f"  max |g11 - 1|        = {self.max_g11_violation:.3e}",
            f"  max |g12|            = {self.max_g12_violation:.3e}",
            f"  max |g22(0,x2) - 1|  = {self.max_axis_g22_violation:.3e}",
            f"  max |d1 g22(0,x2)|   = {self.max_axis_dg22_violation:.3e}",
            f"  verdict: {'PASS' if self.passed else 'FAIL'}",
        ]


def validate_geodesic_parallel(chart: MetricChart, grid=(40, 40)) -> GeodesicParallelReport:
    """Report violations of the geodesic parallel conditions over a grid.

    Checks g11 = 1 and g12 = 0 everywhere, and g22 = 1, d1 g22 = 0 along the
    x1 = 0 axis.  Report-only: never raises on violation.
    """
    n1, n2 = grid
    (a1, b1), (a2, b2) = chart.domain
    v11 = v12 = 0.0
    for i in range(n1 + 1):
        for j in range(n2 + 1):
            x1 = a1 + (b1 - a1) * i / n1
            x2 = a2 + (b2 - a2) * j / n2
            g11, g12, _ = chart.metric_at(x1, x2)
            v11 = max(v11, abs(g11 - 1.0))
            v12 = max(v12, abs(g12))
    vg22 = vd22 = 0.0
    x1_axis = 0.0 if a1 <= 0.0 <= b1 else 0.5 * (a1 + b1)
    for j in range(n2 + 1):
        x2 = a2 + (b2 - a2) * j / n2
        vg22 = max(vg22, abs(chart.g22(x1_axis, x2) - 1.0))
        _, _, (d22_1, _) = chart.metric_derivatives_at(x1_axis, x2)
        vd22 = max(vd22, abs(d22_1))
    tol = 1e-12 if chart.analytic_derivatives else 1e-6
    return GeodesicParallelReport(
        chart_name=chart.name,
        max_g11_violation=v11,
        max_g12_violation=v12,
        max_axis_g22_violation=vg22,
        max_axis_dg22_violation=vd22,
        tolerance=tol,
        grid=(n1, n2),
    )
