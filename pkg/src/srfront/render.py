"""Front-curve rendering to SVG via matplotlib.

Output is byte-reproducible for a fixed input: the SVG hash salt is pinned
and no timestamp metadata is written.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .extremal import Trajectory  # noqa: E402
from .legendre import LeafChart, project_pi_prime  # noqa: E402
from .singularity import NormalFormClass  # noqa: E402

_SVG_SALT = "srfront"


def _front_samples(traj: Trajectory, samples: int):
    lo, hi = sorted((traj.t0, traj.t_end))
    ts = [lo + (hi - lo) * i / samples for i in range(samples + 1)]
    xs, ys, thetas = [], [], []
    for t in ts:
        s = traj.eval(t)
        xs.append(s.x1)
        ys.append(s.x2)
        thetas.append(s.theta)
    return ts, xs, ys, thetas


def render_front(
    traj: Trajectory,
    events,
    path,
    include_pi_prime: bool = False,
    leaf: LeafChart = None,
    samples: int = 1500,
    tick_every: int = 40,
) -> None:
    """Draw the projected front with cusp marks and left-normal ticks.

    Cusps of the surface projection are dots; the short ticks show the left
    side of the moving direction along the curve.  With ``include_pi_prime``
    a second panel traces the curve in leaf coordinates.
    """
    ts, xs, ys, thetas = _front_samples(traj, samples)

    with plt.rc_context({"svg.hashsalt": _SVG_SALT}):
        ncols = 2 if include_pi_prime else 1
        fig, axes = plt.subplots(1, ncols, figsize=(5.0 * ncols, 5.0))
        ax = axes[0] if include_pi_prime else axes

        ax.plot(xs, ys, lw=1.0, color="#1f4e79")
        span = max(max(xs) - min(xs), max(ys) - min(ys), 1e-6)
        tick = 0.03 * span
        for i in range(0, len(ts), tick_every):
            nx, ny = -math.sin(thetas[i]), math.cos(thetas[i])
            ax.plot(
                [xs[i], xs[i] + tick * nx], [ys[i], ys[i] + tick * ny],
                lw=0.6, color="#888888",
            )
        cusp_x, cusp_y = [], []
        for e in events:
            if e.projection == "pi" and e.clazz == NormalFormClass.IV:
                s = traj.eval(e.t)
                cusp_x.append(s.x1)
                cusp_y.append(s.x2)
        if cusp_x:
            ax.plot(cusp_x, cusp_y, "o", ms=4.0, color="#c03020", zorder=5)
        ax.set_aspect("equal", adjustable="datalim")
        ax.set_xlabel("x1")
        ax.set_ylabel("x2")
        ax.set_title("surface projection")

        if include_pi_prime:
            ax2 = axes[1]
            proj = project_pi_prime(traj, leaf, times=ts)
            fs = [v[0] for v in proj.values]
            es = [v[1] for v in proj.values]
            ax2.plot(fs, es, lw=1.0, color="#2a6f2a")
            ev_f, ev_e = [], []
            for e in events:
                if e.projection == "pi_prime" and e.clazz == NormalFormClass.IV:
                    s = traj.eval(e.t)
                    if leaf.in_validity(s.x1, s.x2, s.theta):
                        f_v, e_v = leaf.evaluate(s.x1, s.x2, s.theta)
                        ev_f.append(f_v)
                        ev_e.append(e_v)
            if ev_f:
                ax2.plot(ev_f, ev_e, "o", ms=4.0, color="#c03020", zorder=5)
            ax2.set_xlabel("leaf offset")
            ax2.set_ylabel("leaf angle")
            ax2.set_title("geodesic-space projection")

        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
