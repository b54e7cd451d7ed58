"""Acceptance suite: one test per criterion, one printed verdict line each.

Run with ``pytest -s tests/test_acceptance.py`` to see the verdict lines.
All tolerances are fixed here, not calibrated elsewhere.
"""

import math
import random
import time

import pytest

from srfront.extremal import (
    ExtremalState,
    alt_integrate,
    hamiltonian_value,
    integrate,
    switching_values,
)
from srfront.legendre import (
    GeodesicFlowField,
    first_integral_residual,
    geodesic_by_christoffel,
    leaf_chart_flat,
    leaf_chart_numeric,
    leaf_jet_fd,
)
from srfront.metric import builtin_chart, christoffel, frame_from_metric, validate_geodesic_parallel
from srfront.pendulum import complete_K, flat_pendulum_solution, pendulum_energy
from srfront.pendulum import reduce as pendulum_reduce
from srfront.singularity import (
    NormalFormClass,
    detect_events,
    event_delta_fd,
    event_kappa_c_fd,
    zigzag_report,
)
from srfront.sweeps import classify_sweep, sample_states

CHARTS = {name: builtin_chart(name) for name in ("flat", "sphere", "hyperbolic")}
FRAMES = {name: frame_from_metric(chart) for name, chart in CHARTS.items()}
SEED = 20260810


def _verdict(num, name, ok, detail):
    print(f"ACCEPTANCE {num:02d} {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    return ok


def _oracle_state(rng, regime):
    """Seeded flat initial state in the requested pendulum regime."""
    p_mag = rng.uniform(0.5, 1.3)
    ang = rng.uniform(-math.pi, math.pi)
    p1, p2 = p_mag * math.cos(ang), p_mag * math.sin(ang)
    r = 0.5 * p_mag * p_mag
    w2 = 2.0 * r
    rho = math.atan2(p1 * p2, 0.5 * (p2 * p2 - p1 * p1))
    if regime == "libration":
        m = rng.uniform(0.2, 0.92)
        energy = w2 * (2.0 * m - 1.0)
        jitter = rng.uniform(-0.4, 0.4)
    elif regime == "rotation":
        energy = w2 * (1.0 + rng.uniform(0.3, 3.0))
        jitter = rng.uniform(-math.pi, math.pi)
    else:  # near-separatrix, both sides
        gap = rng.choice((-1.0, 1.0)) * rng.uniform(2e-3, 2e-2)
        energy = w2 * (1.0 + gap)
        jitter = rng.uniform(-0.3, 0.3)
    big_theta0 = jitter  # offset from the potential minimum of the reduced angle
    theta0 = (big_theta0 - rho) / 2.0
    dd = 2.0 * (energy + w2 * math.cos(big_theta0))
    big_theta_dot0 = rng.choice((-1.0, 1.0)) * math.sqrt(max(dd, 0.0))
    return ExtremalState(rng.uniform(-1, 1), rng.uniform(-1, 1), theta0,
                         p1, p2, big_theta_dot0 / 2.0)


@pytest.fixture(scope="module")
def oracle_runs():
    rng = random.Random(SEED)
    states = ([_oracle_state(rng, "libration") for _ in range(17)]
              + [_oracle_state(rng, "rotation") for _ in range(17)]
              + [_oracle_state(rng, "near-separatrix") for _ in range(16)])
    flat, frame = CHARTS["flat"], FRAMES["flat"]
    start = time.perf_counter()
    runs = []
    for s0 in states:
        traj = integrate(flat, frame, s0, (0.0, 20.0), 1e-10)
        solution = flat_pendulum_solution(s0)
        worst = 0.0
        for i in range(1001):
            t = 20.0 * i / 1000
            worst = max(worst, abs(traj.eval(t).theta - solution(t)[0]))
        runs.append((s0, traj, solution, worst))
    elapsed = time.perf_counter() - start
    return runs, elapsed


@pytest.fixture(scope="module")
def flat_cusp_runs():
    """Flat trajectories rich in cusps, integrated tightly for jet checks."""
    rng = random.Random(SEED + 1)
    flat, frame = CHARTS["flat"], FRAMES["flat"]
    runs = []
    for regime in ("libration", "libration", "libration", "rotation", "rotation",
                   "libration", "rotation", "libration", "rotation", "libration"):
        s0 = _oracle_state(rng, regime)
        traj = integrate(flat, frame, s0, (0.0, 25.0), 1e-12)
        runs.append((traj, detect_events(traj)))
    return runs


@pytest.fixture(scope="module")
def curved_cusp_runs():
    out = {}
    for name in ("sphere", "hyperbolic"):
        chart, frame = CHARTS[name], FRAMES[name]
        states = sample_states(chart, frame, 24, SEED + 2, "none")
        runs = []
        for s0 in states:
            if hamiltonian_value(frame, s0) < 0.05:
                continue
            traj = integrate(chart, frame, s0, (0.0, 12.0), 1e-12)
            runs.append((traj, detect_events(traj)))
        out[name] = runs
    return out


@pytest.fixture(scope="module")
def librating_runs():
    rng = random.Random(SEED + 3)
    flat, frame = CHARTS["flat"], FRAMES["flat"]
    runs = []
    while len(runs) < 20:
        s0 = _oracle_state(rng, "libration")
        solution = flat_pendulum_solution(s0)
        if solution.branch != "libration" or solution.m < 0.05:
            continue
        period = 4.0 * complete_K(solution.m) / solution.rate
        traj = integrate(flat, frame, s0, (0.0, 2.3 * period), 1e-11)
        runs.append((s0, traj, zigzag_report(traj)))
    return runs


def test_criterion_01_oracle_equivalence(oracle_runs):
    runs, elapsed = oracle_runs
    worst = max(w for _, _, _, w in runs)
    branches = {sol.branch for _, _, sol, _ in runs}
    ok = worst <= 1e-8 and elapsed < 5.0 and {"libration", "rotation"} <= branches
    assert _verdict(1, "flat closed-form equivalence, 50 states", ok,
                    f"max |dtheta| {worst:.2e}, {elapsed:.2f} s, regimes {sorted(branches)}")


def test_criterion_02_conservation(oracle_runs):
    runs, _ = oracle_runs
    frame = FRAMES["flat"]
    worst_h = worst_e = 0.0
    for s0, traj, _, _ in runs:
        h0 = hamiltonian_value(frame, s0)
        params = pendulum_reduce(frame, s0)
        e0 = pendulum_energy(s0, params)
        e_scale = max(abs(e0), 0.5 * params.r)
        for i in range(201):
            s = traj.eval(20.0 * i / 200)
            worst_h = max(worst_h, abs(hamiltonian_value(frame, s) - h0) / h0)
            worst_e = max(worst_e, abs(pendulum_energy(s, params) - e0) / e_scale)
    ok = worst_h <= 1e-8 and worst_e <= 1e-8
    assert _verdict(2, "energy conservation on oracle runs", ok,
                    f"H drift {worst_h:.2e}, pendulum drift {worst_e:.2e}")


def test_criterion_03_delta_identity_flat(flat_cusp_runs):
    worst = 0.0
    count = 0
    for traj, events in flat_cusp_runs:
        for e in events:
            if e.projection != "pi" or e.clazz != NormalFormClass.IV:
                continue
            if not 0.2 < e.t < 24.8:
                continue
            s = traj.eval(e.t)
            expected = 2.0 * s.phi ** 3 * (s.p1 ** 2 + s.p2 ** 2)
            fd = event_delta_fd(traj, e)
            worst = max(worst, abs(fd - expected) / abs(expected))
            count += 1
    ok = count >= 20 and worst <= 1e-5
    assert _verdict(3, "flat cusp determinant identity", ok,
                    f"{count} cusps, worst rel {worst:.2e}")


def test_criterion_04_delta_identity_general(curved_cusp_runs):
    details = []
    ok = True
    for name, runs in curved_cusp_runs.items():
        worst = 0.0
        count = 0
        for traj, events in runs:
            lo, hi = sorted((traj.t0, traj.t_end))
            for e in events:
                if e.projection != "pi" or e.clazz != NormalFormClass.IV:
                    continue
                if not lo + 0.2 < e.t < hi - 0.2:
                    continue
                try:
                    fd = event_delta_fd(traj, e)
                except ValueError:
                    continue  # stencil would leave the chart
                worst = max(worst, abs(fd - e.delta) / abs(e.delta))
                count += 1
        ok = ok and count >= 5 and worst <= 1e-4
        details.append(f"{name}: {count} cusps rel {worst:.2e}")
    assert _verdict(4, "curved-chart cusp determinant identity", ok, "; ".join(details))


def test_criterion_05_cuspidal_curvature(flat_cusp_runs):
    worst = 0.0
    count = 0
    for traj, events in flat_cusp_runs:
        for e in events:
            if e.projection != "pi" or e.clazz != NormalFormClass.IV:
                continue
            if not 0.2 < e.t < 24.8:
                continue
            s = traj.eval(e.t)
            expected = (2.0 * math.copysign(1.0, s.phi) * math.sqrt(abs(s.phi))
                        / (s.p1 ** 2 + s.p2 ** 2) ** 0.25)
            fd = event_kappa_c_fd(traj, e)
            worst = max(worst, abs(fd - expected) / abs(expected))
            count += 1
    ok = count >= 20 and worst <= 1e-6
    assert _verdict(5, "cuspidal curvature identity", ok,
                    f"{count} cusps, worst rel {worst:.2e}")


def test_criterion_06_classification_closure():
    start = time.perf_counter()
    total = 0
    violations = 0
    hists = []
    for name in ("flat", "sphere", "hyperbolic"):
        chart, frame = CHARTS[name], FRAMES[name]
        states = sample_states(chart, frame, 1000, SEED + 4, "mixed")
        result = classify_sweep(frame, states)
        total += result.count
        violations += len(result.violations)
        hists.append(f"{name}: {len(result.histogram)} pair kinds")
    elapsed = time.perf_counter() - start
    ok = total == 3000 and violations == 0 and elapsed < 60.0
    assert _verdict(6, "germ-pair closure, 1000 states x 3 charts", ok,
                    f"{violations} violations, {elapsed:.2f} s; " + "; ".join(hists))


def test_criterion_07_mutual_exclusion(flat_cusp_runs, curved_cusp_runs):
    worst_margin = math.inf
    count = 0
    all_runs = list(flat_cusp_runs)
    for runs in curved_cusp_runs.values():
        all_runs.extend(runs)
    for traj, events in all_runs:
        frame = traj.frame
        h0 = hamiltonian_value(frame, traj.eval(traj.t0))
        scale = math.sqrt(2.0 * h0)
        for e in events:
            s = traj.eval(e.t)
            a, _ = switching_values(frame, s)
            other = abs(s.phi) if e.projection == "pi" else abs(a)
            worst_margin = min(worst_margin, other / scale)
            count += 1
    ok = count > 50 and worst_margin > 1e-9
    assert _verdict(7, "kernel exclusion at singular parameters", ok,
                    f"{count} events, min margin {worst_margin:.2e} x sqrt(2H)")


def test_criterion_08_zigzag_alternation(librating_runs):
    bad = 0
    total_events = 0
    for _, _, report in librating_runs:
        total_events += report.cusp_count + report.inflection_count
        if not (report.applicable and report.alternation_ok):
            bad += 1
    ok = bad == 0 and len(librating_runs) == 20
    assert _verdict(8, "zigzag alternation on 20 librating runs", ok,
                    f"{total_events} events, {bad} failures")


def test_criterion_09_parallel_cusp_directions(librating_runs):
    worst = max(report.max_cusp_direction_angle for _, _, report in librating_runs)
    cusps = sum(report.cusp_count for _, _, report in librating_runs)
    ok = cusps >= 40 and worst <= 1e-6
    assert _verdict(9, "parallel cusp directions", ok,
                    f"{cusps} cusps, worst angle {worst:.2e} rad")


def test_criterion_10_chart_validation():
    worst_cond = 0.0
    worst_gamma = 0.0
    for name in ("sphere", "hyperbolic"):
        rep = validate_geodesic_parallel(CHARTS[name])
        worst_cond = max(worst_cond, rep.max_g11_violation, rep.max_g12_violation,
                         rep.max_axis_g22_violation, rep.max_axis_dg22_violation)
        gamma = christoffel(CHARTS[name], (0.0, 0.0))
        worst_gamma = max(worst_gamma, max(
            abs(gamma[k][i][j]) for k in range(2) for i in range(2) for j in range(2)
        ))
    ok = worst_cond <= 1e-12 and worst_gamma <= 1e-12
    assert _verdict(10, "builtin chart validation", ok,
                    f"conditions {worst_cond:.2e}, origin coefficients {worst_gamma:.2e}")


def test_criterion_11_flow_and_leaf_validation():
    # (a) flow curves against the connection-coefficient geodesic integrator
    worst_flow = 0.0
    for name in ("flat", "sphere", "hyperbolic"):
        chart, frame = CHARTS[name], FRAMES[name]
        field = GeodesicFlowField(chart, frame)
        start = (0.05, -0.1, 0.4)
        sol_f = field.solve(start, 5.0, tol=1e-12)
        k, l, m, n = frame.values(*start[:2])
        v0 = (k * math.cos(start[2]) + m * math.sin(start[2]),
              l * math.cos(start[2]) + n * math.sin(start[2]))
        sol_c = geodesic_by_christoffel(chart, start[:2], v0, 5.0, tol=1e-12)
        hi = min(sol_f.t_end, sol_c.t_end)
        worst_flow = max(worst_flow, max(
            max(abs(sol_f.eval(hi * j / 100)[i] - sol_c.eval(hi * j / 100)[i])
                for i in range(2))
            for j in range(101)
        ))

    # (b) numeric leaf-chart first-integral residuals
    rng = random.Random(SEED + 5)
    base = ExtremalState(0.0, 0.0, 0.3, 0.6, 0.4, 0.1)
    worst_leaf = 0.0
    for name in ("flat", "sphere", "hyperbolic"):
        chart, frame = CHARTS[name], FRAMES[name]
        leaf = leaf_chart_numeric(chart, frame, base)
        field = GeodesicFlowField(chart, frame)
        for _ in range(34):
            q = (0.12 * rng.uniform(-1, 1), 0.12 * rng.uniform(-1, 1),
                 0.3 + 0.25 * rng.uniform(-1, 1))
            worst_leaf = max(worst_leaf, max(first_integral_residual(leaf, field, q)))

    # (c) explicit and numeric leaf classes at every flat angle-velocity zero
    flat, frame = CHARTS["flat"], FRAMES["flat"]
    s0 = ExtremalState(0, 0, 0.15, 0.3, 0.9, 0.0)
    traj = integrate(flat, frame, s0, (0.0, 25.0), 1e-12)
    events = [e for e in detect_events(traj)
              if e.projection == "pi_prime" and 0.5 < e.t < 24.5]
    explicit = leaf_chart_flat(s0)
    agree = 0
    for e in events:
        s = traj.eval(e.t)
        numeric = leaf_chart_numeric(
            flat, frame, ExtremalState(s.x1, s.x2, s.theta, s.p1, s.p2, s.phi),
            validity_radius=2.0,
        )
        classes = []
        for leaf in (explicit, numeric):
            d1, d2, d3 = leaf_jet_fd(traj, leaf, e.t, 0.02)
            singular = math.hypot(*d1) <= 1e-4
            delta = d2[0] * d3[1] - d2[1] * d3[0]
            classes.append("IV" if singular and abs(delta) > 1e-8 else "III")
        if classes[0] == classes[1] == "IV":
            agree += 1
    ok = (worst_flow <= 1e-8 and worst_leaf <= 1e-6
          and len(events) >= 2 and agree == len(events))
    assert _verdict(11, "flow and leaf-chart validation", ok,
                    f"flow {worst_flow:.2e}, leaf residual {worst_leaf:.2e}, "
                    f"classes {agree}/{len(events)}")


def test_criterion_12_two_route_agreement():
    worst = 0.0
    for name in ("flat", "sphere", "hyperbolic"):
        chart, frame = CHARTS[name], FRAMES[name]
        states = sample_states(chart, frame, 100, SEED + 6, "none")
        for s0 in states:
            tr1 = integrate(chart, frame, s0, (0.0, 10.0), 1e-10)
            tr2 = alt_integrate(chart, frame, s0, (0.0, 10.0), 1e-10)
            hi = min(sorted((tr1.t0, tr1.t_end))[1], sorted((tr2.t0, tr2.t_end))[1])
            if hi <= 0.0:
                continue
            worst = max(worst, max(
                max(abs(a - b) for a, b in zip(tr1.eval_raw(hi * i / 50),
                                               tr2.eval_raw(hi * i / 50)))
                for i in range(51)
            ))
    ok = worst <= 1e-7
    assert _verdict(12, "two-route integration agreement, 100 states x 3 charts", ok,
                    f"max state distance {worst:.2e}")
