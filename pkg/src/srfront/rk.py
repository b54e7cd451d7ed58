"""Adaptive embedded Runge-Kutta integrator with dense output.

Dormand-Prince 8(5,3): a thirteen-stage eighth-order step with embedded
fifth- and third-order error estimators, a seventh-order continuous extension
(three extra stages per accepted step), and PI step-size control.  Plain
float/tuple implementation specialized for the small smooth systems in this
package (dimension 3..6), integrating in either time direction.  A
caller-supplied admissibility predicate truncates the solution gracefully at
the first step that leaves the region (exit time located by bisection on the
dense segment).
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Callable, Optional

# Row 12 of A holds the eighth-order propagation weights, so the
# thirteenth stage argument is already the new solution point.
from ._rk8_tables import A, C, D, E3, E5

_SAFETY = 0.9
_BETA = 0.03               # PI stabilization weight
_EXPO1 = 1.0 / 8.0 - _BETA * 0.2
_FACC1 = 3.0               # 1 / smallest step-shrink factor
_FACC2 = 1.0 / 6.0         # 1 / largest step-growth factor
_MAX_STEPS = 2_000_000


class StepSizeUnderflow(RuntimeError):
    """Step size shrank below representable resolution."""


@dataclass(frozen=True)
class Segment:
    """One accepted step with its degree-7 interpolant (C^1 at the nodes)."""

    t0: float
    t1: float
    y0: tuple
    fs: tuple  # seven coefficient vectors of the nested-form interpolant

    def eval(self, t):
        h = self.t1 - self.t0
        x = (t - self.t0) / h if h != 0.0 else 0.0
        x1 = 1.0 - x
        f0, f1, f2, f3, f4, f5, f6 = self.fs
        out = []
        for i, y in enumerate(self.y0):
            acc = x * f6[i]
            acc = x1 * (f5[i] + acc)
            acc = x * (f4[i] + acc)
            acc = x1 * (f3[i] + acc)
            acc = x * (f2[i] + acc)
            acc = x1 * (f1[i] + acc)
            acc = x * (f0[i] + acc)
            out.append(y + acc)
        return tuple(out)


@dataclass(frozen=True)
class Solution:
    """Dense numerical solution on [t0, t_end] (t_end may precede t0)."""

    t0: float
    t_end: float
    ts: tuple          # node times including both endpoints
    ys: tuple          # node states
    segments: tuple
    truncated: bool    # stopped early by the admissibility predicate
    nfev: int
    naccept: int
    nreject: int

    def eval(self, t):
        ts = self.ts
        ascending = self.t0 <= self.t_end
        lo, hi = (self.t0, self.t_end) if ascending else (self.t_end, self.t0)
        if not (lo - 1e-12 <= t <= hi + 1e-12):
            raise ValueError(f"t={t!r} outside solution window [{lo}, {hi}]")
        if ascending:
            i = bisect_right(ts, t) - 1
        else:
            i = bisect_right([-v for v in ts], -t) - 1
        i = min(max(i, 0), len(self.segments) - 1)
        if t == ts[i]:
            return self.ys[i]
        if t == ts[i + 1]:
            return self.ys[i + 1]
        return self.segments[i].eval(t)


def _error_norm(k_rows, y0, y1, hd, rtol, atol):
    """Hairer's combined 5th/3rd-order error measure."""
    dim = len(y0)
    err5_2 = 0.0
    err3_2 = 0.0
    for i in range(dim):
        sc = atol + rtol * max(abs(y0[i]), abs(y1[i]))
        e5 = 0.0
        e3 = 0.0
        for j in range(13):
            kji = k_rows[j][i]
            e5 += E5[j] * kji
            e3 += E3[j] * kji
        err5_2 += (e5 / sc) ** 2
        err3_2 += (e3 / sc) ** 2
    if err5_2 == 0.0 and err3_2 == 0.0:
        return 0.0
    denom = err5_2 + 0.01 * err3_2
    return abs(hd) * err5_2 / math.sqrt(denom * dim)


def _initial_step(f, t0, y0, f0, direction, rtol, atol, span):
    sk = [atol + rtol * abs(v) for v in y0]
    d0 = math.sqrt(sum((v / s) ** 2 for v, s in zip(y0, sk)) / len(y0))
    d1 = math.sqrt(sum((v / s) ** 2 for v, s in zip(f0, sk)) / len(y0))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, span)
    y1 = tuple(y + direction * h0 * fv for y, fv in zip(y0, f0))
    f1 = f(t0 + direction * h0, y1)
    d2 = math.sqrt(sum(((b - a) / s) ** 2 for a, b, s in zip(f0, f1, sk)) / len(y0)) / h0
    dm = max(d1, d2)
    h1 = max(1e-6, h0 * 1e-3) if dm <= 1e-15 else (0.01 / dm) ** (1.0 / 8.0)
    return min(100 * h0, h1, span)


def solve(
    f: Callable,
    t0: float,
    y0,
    t1: float,
    rtol: float = 1e-10,
    atol: float = 1e-10,
    inside: Optional[Callable] = None,
    max_step: float = math.inf,
    first_step: Optional[float] = None,
) -> Solution:
    """Integrate dy/dt = f(t, y) from t0 to t1 (either direction)."""
    if t1 == t0:
        raise ValueError("empty integration window")
    y0 = tuple(float(v) for v in y0)
    dim = len(y0)
    direction = 1.0 if t1 > t0 else -1.0
    span = abs(t1 - t0)
    if inside is not None and not inside(y0):
        raise ValueError("initial state outside admissible region")

    nfev = naccept = nreject = 0
    k1 = f(t0, y0)
    nfev += 1
    if first_step is not None:
        h = first_step
    else:
        h = _initial_step(f, t0, y0, k1, direction, rtol, atol, span)
        nfev += 1
    h = min(h, max_step, span)

    ts = [t0]
    ys = [y0]
    segments = []
    t = t0
    y = y0
    facold = 1e-4
    truncated = False
    k_rows = [None] * 16

    for _ in range(_MAX_STEPS):
        if (t - t1) * direction >= 0.0:
            break
        rem = abs(t1 - t)
        if rem <= 1e-14 * max(1.0, abs(t0), abs(t1)):
            break  # window exhausted to roundoff
        if h <= abs(t) * 1e-15 or h < 1e-14:
            raise StepSizeUnderflow(f"step size underflow at t={t!r} (h={h!r})")
        h = min(h, rem)
        hd = h * direction

        k_rows[0] = k1
        for s in range(1, 13):
            arow = A[s]
            ysub = list(y)
            for j in range(s):
                aj = arow[j]
                if aj == 0.0:
                    continue
                kj = k_rows[j]
                for i in range(dim):
                    ysub[i] += hd * aj * kj[i]
            if s < 12:
                k_rows[s] = f(t + C[s] * hd, tuple(ysub))
            else:
                ynew = tuple(ysub)
                k_rows[12] = f(t + hd, ynew)
        nfev += 12

        err = _error_norm(k_rows, y, ynew, hd, rtol, atol)

        if err > 1.0:
            nreject += 1
            fac11 = err ** _EXPO1
            h = h / min(_FACC1, fac11 / _SAFETY)
            continue

        naccept += 1
        fac11 = err ** _EXPO1 if err > 0.0 else 0.0
        fac = fac11 / (facold ** _BETA)
        fac = max(_FACC2, min(_FACC1, fac / _SAFETY))
        hnew = h / fac
        facold = max(err, 1e-4)

        # Three extra stages for the degree-7 continuous extension.
        for s in range(13, 16):
            arow = A[s]
            ysub = list(y)
            for j in range(s):
                aj = arow[j]
                if aj == 0.0:
                    continue
                kj = k_rows[j]
                for i in range(dim):
                    ysub[i] += hd * aj * kj[i]
            k_rows[s] = f(t + C[s] * hd, tuple(ysub))
        nfev += 3

        f_old = k_rows[0]
        f_new = k_rows[12]
        delta = tuple(b - a for a, b in zip(y, ynew))
        f0v = delta
        f1v = tuple(hd * a - d for a, d in zip(f_old, delta))
        f2v = tuple(2.0 * d - hd * (a + b) for d, a, b in zip(delta, f_old, f_new))
        extra = []
        for drow in D:
            vec = []
            for i in range(dim):
                acc = 0.0
                for j in range(16):
                    dj = drow[j]
                    if dj != 0.0:
                        acc += dj * k_rows[j][i]
                vec.append(hd * acc)
            extra.append(tuple(vec))
        seg = Segment(t0=t, t1=t + hd, y0=y,
                      fs=(f0v, f1v, f2v, extra[0], extra[1], extra[2], extra[3]))

        if inside is not None and not inside(ynew):
            # Locate the admissibility boundary inside this step by bisection.
            lo, hi = t, t + hd
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if inside(seg.eval(mid)):
                    lo = mid
                else:
                    hi = mid
                if abs(hi - lo) <= 1e-12 * max(1.0, abs(hi)):
                    break
            t_exit = lo
            y_exit = seg.eval(t_exit)
            if t_exit != t:
                # Keep the full-step parameterization; only the node list is cut.
                segments.append(seg)
                ts.append(t_exit)
                ys.append(y_exit)
            truncated = True
            t = t_exit
            y = y_exit
            break

        segments.append(seg)
        t = t + hd
        y = ynew
        k1 = f_new
        ts.append(t)
        ys.append(y)
        h = min(hnew, max_step)

    else:
        raise RuntimeError("step limit exceeded")

    if not segments:
        # Degenerate: immediate truncation; represent as one constant segment.
        zero = (0.0,) * dim
        segments.append(Segment(t0, t, y0, (zero,) * 7))
        if len(ts) == 1:
            ts.append(t)
            ys.append(y)

    return Solution(
        t0=t0,
        t_end=t,
        ts=tuple(ts),
        ys=tuple(ys),
        segments=tuple(segments),
        truncated=truncated,
        nfev=nfev,
        naccept=naccept,
        nreject=nreject,
    )
