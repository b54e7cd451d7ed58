"""Seeded initial-state sampling and classification sweeps."""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass

from .extremal import ExtremalState
from .metric import MetricChart, OrthonormalFrame
from .singularity import classify_pair

CONSTRAINTS = ("none", "fiber", "straight", "cusp", "inflection", "mixed")


def _position(rng: random.Random, chart: MetricChart, spread: float = 0.25):
    (a1, b1), (a2, b2) = chart.domain
    c1, h1 = 0.5 * (a1 + b1), 0.5 * (b1 - a1)
    c2, h2 = 0.5 * (a2 + b2), 0.5 * (b2 - a2)
    return (
        c1 + spread * h1 * rng.uniform(-1.0, 1.0),
        c2 + spread * min(h2, 4.0 * h1) * rng.uniform(-1.0, 1.0),
    )


def _momenta_for(frame: OrthonormalFrame, x1, x2, theta, a_val, b_val):
    """Momenta realizing prescribed switching values (A, B) at a point."""
    k, l, m, n = frame.values(x1, x2)
    det = k * n - l * m
    al = a_val * math.cos(theta) - b_val * math.sin(theta)
    be = a_val * math.sin(theta) + b_val * math.cos(theta)
    p1 = (n * al - l * be) / det
    p2 = (-m * al + k * be) / det
    return p1, p2


def _signed(rng: random.Random, lo: float, hi: float) -> float:
    return rng.choice((-1.0, 1.0)) * rng.uniform(lo, hi)


def sample_state(
    rng: random.Random,
    chart: MetricChart,
    frame: OrthonormalFrame,
    constraint: str = "none",
) -> ExtremalState:
    """One random initial state, optionally restricted to a singular slice."""
    x1, x2 = _position(rng, chart)
    theta = rng.uniform(-math.pi, math.pi)
    if constraint == "none":
        p1 = rng.uniform(-1.5, 1.5)
        p2 = rng.uniform(-1.5, 1.5)
        phi = rng.uniform(-2.0, 2.0)
    elif constraint == "fiber":
        p1 = p2 = 0.0
        phi = _signed(rng, 0.3, 2.0)
    elif constraint == "straight":
        p1, p2 = _momenta_for(frame, x1, x2, theta, _signed(rng, 0.3, 1.5), 0.0)
        phi = 0.0
    elif constraint == "cusp":
        p1, p2 = _momenta_for(frame, x1, x2, theta, 0.0, _signed(rng, 0.3, 1.5))
        phi = _signed(rng, 0.3, 2.0)
    elif constraint == "inflection":
        p1, p2 = _momenta_for(frame, x1, x2, theta,
                              _signed(rng, 0.3, 1.5), _signed(rng, 0.3, 1.5))
        phi = 0.0
    else:
        raise ValueError(f"unknown constraint {constraint!r}")
    return ExtremalState(x1, x2, theta, p1, p2, phi)


def sample_states(
    chart: MetricChart,
    frame: OrthonormalFrame,
    count: int,
    seed: int,
    constraint: str = "none",
) -> list[ExtremalState]:
    """Seeded list of initial states.

    `mixed` stratifies across the generic slice, both fiber types, and both
    cusp slices (plus a few constant states), which exercises every
    admissible germ pair.
    """
    rng = random.Random(seed)
    if constraint != "mixed":
        return [sample_state(rng, chart, frame, constraint) for _ in range(count)]
    states = []
    kinds = ("none", "fiber", "straight", "cusp", "inflection")
    weights = (0.55, 0.1, 0.1, 0.1, 0.1)
    for _ in range(count):
        u = rng.random()
        if u < 0.05:
            x1, x2 = _position(rng, chart)
            states.append(ExtremalState(x1, x2, rng.uniform(-math.pi, math.pi), 0.0, 0.0, 0.0))
            continue
        u -= 0.05
        acc = 0.0
        for kind, wt in zip(kinds, weights):
            acc += wt
            if u <= acc:
                states.append(sample_state(rng, chart, frame, kind))
                break
        else:
            states.append(sample_state(rng, chart, frame, "none"))
    return states


@dataclass(frozen=True)
class SweepResult:
    count: int
    histogram: tuple          # sorted ((pair string, count), ...)
    violations: tuple         # (index, message) pairs

    def lines(self):
        out = [f"classified {self.count} states"]
        for name, c in self.histogram:
            out.append(f"  {name}: {c}")
        out.append(f"violations: {len(self.violations)}")
        for idx, msg in self.violations:
            out.append(f"  state {idx}: {msg}")
        return out


def classify_sweep(frame: OrthonormalFrame, states) -> SweepResult:
    """Classify every state; admissibility failures are collected, not raised."""
    hist = Counter()
    violations = []
    for i, s in enumerate(states):
        try:
            pair = classify_pair(frame, s)
            hist[str(pair)] += 1
        except Exception as exc:  # inadmissible pair or inconsistent state
            violations.append((i, str(exc)))
    ordered = tuple(sorted(hist.items()))
    return SweepResult(count=len(states), histogram=ordered, violations=tuple(violations))
