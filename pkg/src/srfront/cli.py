"""Command-line front end.

Subcommands: simulate | classify | sweep | oracle | render | check.
Configuration is a single YAML file (schema in the README); unknown keys are
rejected.  Exit codes: 0 ok, 1 comparison/check failure, 2 configuration
error, 3 integration failure, 4 classification-contract violation.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
import yaml

from . import legendre, pendulum, rk, singularity, sweeps
from .extremal import (
    ExtremalState,
    TOL_MAX,
    TOL_MIN,
    Trajectory,
    alt_integrate,
    hamiltonian_value,
    integrate,
    switching_values,
)
from .metric import (
    MetricChart,
    OutsideDomainError,
    builtin_chart,
    chart_from_expressions,
    frame_from_metric,
    validate_geodesic_parallel,
)
from .singularity import ClassificationError

OUTPUT_KINDS = ("trajectory-csv", "events-json", "front-svg", "report-text")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_INTEGRATION = 3
EXIT_CLASSIFICATION = 4


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


@dataclass(frozen=True)
class RunConfig:
    chart: MetricChart
    initial: ExtremalState
    window: tuple[float, float]
    tol: float
    seed: int
    outputs: tuple[str, ...]
    sweep_count: int
    sweep_constraint: str
    render_pi_prime: bool
    render_samples: int


def _require_keys(mapping, allowed, context):
    unknown = set(mapping) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {context}")


def _build_chart(metric_cfg) -> MetricChart:
    if not isinstance(metric_cfg, dict):
        raise ConfigError("'metric' must be a mapping")
    if "name" in metric_cfg:
        _require_keys(metric_cfg, {"name"}, "metric")
        try:
            return builtin_chart(str(metric_cfg["name"]))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    _require_keys(metric_cfg, {"g11", "g12", "g22", "domain", "geodesic-parallel"}, "metric")
    for key in ("g11", "g12", "g22"):
        if key not in metric_cfg:
            raise ConfigError(f"metric expression {key!r} missing")
    domain = metric_cfg.get("domain", ((-2.0, 2.0), (-2.0, 2.0)))
    try:
        return chart_from_expressions(
            str(metric_cfg["g11"]), str(metric_cfg["g12"]), str(metric_cfg["g22"]),
            domain=domain,
            is_geodesic_parallel=bool(metric_cfg.get("geodesic-parallel", False)),
        )
    except Exception as exc:
        raise ConfigError(f"bad metric expressions: {exc}") from exc


def load_config(path, *, tol_override=None, seed_override=None, count_override=None) -> RunConfig:
    try:
        raw = yaml.safe_load(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config parse failure: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    _require_keys(
        raw, {"metric", "initial", "window", "tol", "seed", "outputs", "sweep", "render"},
        "config root",
    )
    for key in ("metric", "initial", "window"):
        if key not in raw:
            raise ConfigError(f"config key {key!r} missing")

    chart = _build_chart(raw["metric"])

    initial = raw["initial"]
    if not (isinstance(initial, (list, tuple)) and len(initial) == 6):
        raise ConfigError("'initial' must be six numbers (x1 x2 theta p1 p2 phi)")
    try:
        state = ExtremalState.from_iterable(initial)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad initial state: {exc}") from exc
    if not all(math.isfinite(v) for v in state.astuple()):
        raise ConfigError("initial state must be finite")
    if not chart.contains(state.x1, state.x2):
        raise ConfigError(
            f"initial position ({state.x1}, {state.x2}) outside chart domain {chart.domain}"
        )

    window = raw["window"]
    if not (isinstance(window, (list, tuple)) and len(window) == 2):
        raise ConfigError("'window' must be [t0, t1]")
    t0, t1 = float(window[0]), float(window[1])
    if t0 == t1:
        raise ConfigError("window is empty")

    tol = float(tol_override if tol_override is not None else raw.get("tol", 1e-10))
    if not (TOL_MIN <= tol <= TOL_MAX):
        raise ConfigError(f"tol {tol} outside [{TOL_MIN}, {TOL_MAX}]")

    seed = int(seed_override if seed_override is not None else raw.get("seed", 0))

    outputs = raw.get("outputs", ["trajectory-csv", "report-text"])
    if not isinstance(outputs, (list, tuple)):
        raise ConfigError("'outputs' must be a list")
    for kind in outputs:
        if kind not in OUTPUT_KINDS:
            raise ConfigError(f"unknown output kind {kind!r}; allowed: {OUTPUT_KINDS}")

    sweep_cfg = raw.get("sweep", {})
    if not isinstance(sweep_cfg, dict):
        raise ConfigError("'sweep' must be a mapping")
    _require_keys(sweep_cfg, {"count", "constraint"}, "sweep")
    sweep_count = int(count_override if count_override is not None
                      else sweep_cfg.get("count", 100))
    if sweep_count <= 0:
        raise ConfigError("sweep count must be positive")
    sweep_constraint = str(sweep_cfg.get("constraint", "none"))
    if sweep_constraint not in sweeps.CONSTRAINTS:
        raise ConfigError(
            f"unknown sweep constraint {sweep_constraint!r}; allowed: {sweeps.CONSTRAINTS}"
        )

    render_cfg = raw.get("render", {})
    if not isinstance(render_cfg, dict):
        raise ConfigError("'render' must be a mapping")
    _require_keys(render_cfg, {"include-pi-prime", "samples"}, "render")

    return RunConfig(
        chart=chart,
        initial=state,
        window=(t0, t1),
        tol=tol,
        seed=seed,
        outputs=tuple(outputs),
        sweep_count=sweep_count,
        sweep_constraint=sweep_constraint,
        render_pi_prime=bool(render_cfg.get("include-pi-prime", False)),
        render_samples=int(render_cfg.get("samples", 1500)),
    )


# --- Output writers --------------------------------------------------------


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def write_trajectory_csv(path, traj: Trajectory) -> None:
    """One row per integrator node: t,x1,x2,theta,p1,p2,phi,A,B,H."""
    lines = ["t,x1,x2,theta,p1,p2,phi,A,B,H"]
    frame = traj.frame
    for t in traj.nodes:
        s = traj.eval(t)
        a, b = switching_values(frame, s)
        h_val = hamiltonian_value(frame, s)
        row = (t, s.x1, s.x2, s.theta, s.p1, s.p2, s.phi, a, b, h_val)
        lines.append(",".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_trajectory_csv(path):
    """Rows of the trajectory CSV as dicts of floats."""
    text = Path(path).read_text().strip().splitlines()
    header = text[0].split(",")
    return [dict(zip(header, map(float, line.split(",")))) for line in text[1:]]


def events_to_records(traj: Trajectory, events) -> list[dict]:
    frame = traj.frame
    records = []
    s0 = traj.eval(traj.t0)
    pair0 = singularity.classify_pair(frame, s0)
    records.append({
        "t": traj.t0,
        "projection": "initial",
        "class": str(pair0.pi),
        "pair": [str(pair0.pi), str(pair0.pi_prime)],
        "delta": None,
        "kappa_c": None,
    })
    for e in events:
        s = traj.eval(e.t)
        pair = singularity.classify_pair(frame, s)
        records.append({
            "t": e.t,
            "projection": e.projection,
            "class": str(e.clazz),
            "pair": [str(pair.pi), str(pair.pi_prime)],
            "delta": e.delta,
            "kappa_c": e.kappa_c,
        })
    return records


def _dump_json(path, payload) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _summary_lines(traj: Trajectory) -> list[str]:
    frame = traj.frame
    s0 = traj.eval(traj.t0)
    h0 = hamiltonian_value(frame, s0)
    lo, hi = sorted((traj.t0, traj.t_end))
    drift = 0.0
    pend_drift = 0.0
    params = pendulum.reduce(frame, s0)
    e0 = pendulum.pendulum_energy(s0, params)
    for i in range(201):
        t = lo + (hi - lo) * i / 200
        s = traj.eval(t)
        drift = max(drift, abs(hamiltonian_value(frame, s) - h0))
        if traj.chart.name == "flat":
            pend_drift = max(pend_drift, abs(pendulum.pendulum_energy(s, params) - e0))
    lines = [
        f"chart: {traj.chart.name}",
        f"window: [{_fmt(traj.t0)}, {_fmt(traj.requested_t1)}]",
        f"tolerance: {_fmt(traj.tol)}",
        f"steps: {traj.stats.steps} accepted, {traj.stats.rejected} rejected",
        f"hamiltonian: {_fmt(h0)}",
        f"hamiltonian drift: {drift:.3e}",
    ]
    if traj.chart.name == "flat":
        lines.append(f"pendulum energy: {_fmt(e0)}")
        lines.append(f"pendulum energy drift: {pend_drift:.3e}")
        if not params.degenerate:
            gap = e0 - 0.5 * params.r
            regime = "separatrix" if abs(gap) <= 1e-12 * max(1.0, params.r) else (
                "libration" if gap < 0.0 else "rotation")
            lines.append(f"pendulum regime: {regime}")
    s_end = traj.eval(traj.t_end)
    lines.append(f"final theta: {_fmt(s_end.theta)}"
                 f" (mod 2pi: {_fmt(math.remainder(s_end.theta, 2.0 * math.pi))})")
    if traj.exited:
        lines.append(f"domain-exit at t = {_fmt(traj.t_end)} (window truncated)")
    return lines


# --- Commands ---------------------------------------------------------------


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(config: RunConfig, args) -> int:
    frame = frame_from_metric(config.chart)
    traj = integrate(config.chart, frame, config.initial, config.window, config.tol)
    out = _outdir(args)
    summary = _summary_lines(traj)
    if "trajectory-csv" in config.outputs:
        write_trajectory_csv(out / "trajectory.csv", traj)
    if "events-json" in config.outputs:
        events = singularity.detect_events(traj)
        _dump_json(out / "events.json", events_to_records(traj, events))
    if "front-svg" in config.outputs:
        from .render import render_front

        events = singularity.detect_events(traj)
        leaf = legendre.leaf_chart_flat(config.initial) if config.chart.name == "flat" else None
        render_front(traj, events, out / "front.svg",
                     include_pi_prime=config.render_pi_prime and leaf is not None,
                     leaf=leaf, samples=config.render_samples)
    if "report-text" in config.outputs:
        (out / "summary.txt").write_text("\n".join(summary) + "\n")
    print("\n".join(summary))
    return EXIT_OK


def cmd_classify(config: RunConfig, args) -> int:
    frame = frame_from_metric(config.chart)
    traj = integrate(config.chart, frame, config.initial, config.window, config.tol)
    events = singularity.detect_events(traj)
    records = events_to_records(traj, events)
    out = _outdir(args)
    _dump_json(out / "events.json", records)
    print(f"{len(events)} events -> {out / 'events.json'}")
    return EXIT_OK


def cmd_sweep(config: RunConfig, args) -> int:
    frame = frame_from_metric(config.chart)
    states = sweeps.sample_states(
        config.chart, frame, config.sweep_count, config.seed, config.sweep_constraint,
    )
    result = sweeps.classify_sweep(frame, states)
    lines = [
        f"chart: {config.chart.name}",
        f"seed: {config.seed}",
        f"constraint: {config.sweep_constraint}",
    ] + result.lines()
    out = _outdir(args)
    (out / "sweep_report.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return EXIT_CLASSIFICATION if result.violations else EXIT_OK


ORACLE_ANGLE_TOL = 1e-8
ORACLE_STATE_TOL = 1e-7


def cmd_oracle(config: RunConfig, args) -> int:
    if config.chart.name != "flat":
        raise ConfigError("the closed-form comparison needs the flat metric")
    frame = frame_from_metric(config.chart)
    traj = integrate(config.chart, frame, config.initial, config.window, config.tol)
    solution = pendulum.flat_pendulum_solution(config.initial)
    lo, hi = sorted((traj.t0, traj.t_end))
    worst_theta = 0.0
    for i in range(2001):
        t = lo + (hi - lo) * i / 2000
        worst_theta = max(worst_theta, abs(traj.eval(t).theta - solution(t)[0]))
    alt = alt_integrate(config.chart, frame, config.initial, config.window, config.tol)
    hi2 = min(hi, sorted((alt.t0, alt.t_end))[1])
    worst_state = 0.0
    for i in range(501):
        t = lo + (hi2 - lo) * i / 500
        worst_state = max(worst_state, max(
            abs(a - b) for a, b in zip(traj.eval_raw(t), alt.eval_raw(t))
        ))
    ok = worst_theta <= ORACLE_ANGLE_TOL and worst_state <= ORACLE_STATE_TOL
    lines = [
        f"angle-evolution branch: {solution.branch}",
        f"max |theta - closed form| = {worst_theta:.3e} (tol {ORACLE_ANGLE_TOL:.0e})",
        f"max state deviation vs canonical-route integration = {worst_state:.3e}"
        f" (tol {ORACLE_STATE_TOL:.0e})",
        f"verdict: {'PASS' if ok else 'FAIL'}",
    ]
    out = _outdir(args)
    (out / "oracle_report.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_render(config: RunConfig, args) -> int:
    from .render import render_front

    frame = frame_from_metric(config.chart)
    traj = integrate(config.chart, frame, config.initial, config.window, config.tol)
    events = singularity.detect_events(traj)
    leaf = legendre.leaf_chart_flat(config.initial) if config.chart.name == "flat" else None
    out = _outdir(args)
    path = out / "front.svg"
    render_front(traj, events, path,
                 include_pi_prime=config.render_pi_prime and leaf is not None,
                 leaf=leaf, samples=config.render_samples)
    print(f"front rendered -> {path}")
    return EXIT_OK


def cmd_check(args) -> int:
    """Compact invariant run over the builtin charts."""
    import random

    failures = []

    def report(name, ok, detail=""):
        print(f"{'PASS' if ok else 'FAIL'}  {name}{'  ' + detail if detail else ''}")
        if not ok:
            failures.append(name)

    charts = {name: builtin_chart(name) for name in ("flat", "sphere", "hyperbolic")}
    frames = {name: frame_from_metric(chart) for name, chart in charts.items()}

    for name, chart in charts.items():
        rep = validate_geodesic_parallel(chart)
        report(f"{name}: geodesic parallel conditions", rep.passed,
               f"worst {max(rep.max_g11_violation, rep.max_g12_violation, rep.max_axis_g22_violation, rep.max_axis_dg22_violation):.2e}")

    rng = random.Random(7)
    for name, chart in charts.items():
        frame = frames[name]
        worst = 0.0
        for _ in range(500):
            s = sweeps.sample_state(rng, chart, frame)
            g11, g12, g22 = chart.metric_at(s.x1, s.x2)
            k, l, m, n = frame.values(s.x1, s.x2)
            worst = max(
                worst,
                abs(g11 * k * k + 2 * g12 * k * l + g22 * l * l - 1.0),
                abs(g11 * m * m + 2 * g12 * m * n + g22 * n * n - 1.0),
                abs(g11 * k * m + g12 * (k * n + l * m) + g22 * l * n),
            )
        report(f"{name}: frame orthonormality", worst <= 1e-12, f"worst {worst:.2e}")

    for name, chart in charts.items():
        frame = frames[name]
        states = sweeps.sample_states(chart, frame, 300, 11, "mixed")
        result = sweeps.classify_sweep(frame, states)
        report(f"{name}: germ-pair closure (300 states)", not result.violations)

    flat, ffr = charts["flat"], frames["flat"]
    worst = 0.0
    for i in range(6):
        s0 = sweeps.sample_state(random.Random(100 + i), flat, ffr)
        traj = integrate(flat, ffr, s0, (0.0, 20.0), 1e-10)
        sol = pendulum.flat_pendulum_solution(s0)
        worst = max(worst, max(
            abs(traj.eval(t).theta - sol(t)[0])
            for t in [20.0 * j / 400 for j in range(401)]
        ))
    report("flat: closed-form angle agreement", worst <= ORACLE_ANGLE_TOL, f"worst {worst:.2e}")

    worst = 0.0
    for name, chart in charts.items():
        frame = frames[name]
        s0 = sweeps.sample_state(random.Random(5), chart, frame)
        tr1 = integrate(chart, frame, s0, (0.0, 5.0), 1e-10)
        tr2 = alt_integrate(chart, frame, s0, (0.0, 5.0), 1e-10)
        hi = min(sorted((tr1.t0, tr1.t_end))[1], sorted((tr2.t0, tr2.t_end))[1])
        worst = max(worst, max(
            max(abs(a - b) for a, b in zip(tr1.eval_raw(hi * j / 100), tr2.eval_raw(hi * j / 100)))
            for j in range(101)
        ))
    report("two-route integration agreement", worst <= ORACLE_STATE_TOL, f"worst {worst:.2e}")

    s0 = ExtremalState(0.0, 0.0, 0.25, 0.0, 1.0, 0.0)
    traj = integrate(flat, ffr, s0, (0.0, 30.0), 1e-10)
    zz = singularity.zigzag_report(traj)
    report("flat libration: cusp/inflection alternation",
           bool(zz.alternation_ok), f"{zz.cusp_count} cusps / {zz.inflection_count} inflections")
    report("flat libration: parallel cusp directions",
           zz.max_cusp_direction_angle <= 1e-6, f"max {zz.max_cusp_direction_angle:.2e} rad")
    worst = 0.0
    for e in zz.events:
        if e.projection != "pi":
            continue
        fd = singularity.event_delta_fd(traj, e)
        worst = max(worst, abs(fd - e.delta) / abs(e.delta))
    report("flat libration: cusp determinant identity", worst <= 1e-5, f"worst rel {worst:.2e}")

    for name in ("sphere", "hyperbolic"):
        chart, frame = charts[name], frames[name]
        field = legendre.GeodesicFlowField(chart, frame)
        start = (0.05, -0.1, 0.4)
        sol_f = field.solve(start, 5.0, tol=1e-12)
        k, l, m, n = frame.values(*start[:2])
        v0 = (k * math.cos(start[2]) + m * math.sin(start[2]),
              l * math.cos(start[2]) + n * math.sin(start[2]))
        sol_c = legendre.geodesic_by_christoffel(chart, start[:2], v0, 5.0, tol=1e-12)
        hi = min(sol_f.t_end, sol_c.t_end)
        worst = max(
            max(abs(sol_f.eval(hi * j / 100)[i] - sol_c.eval(hi * j / 100)[i]) for i in range(2))
            for j in range(101)
        )
        report(f"{name}: flow vs connection-coefficient geodesics", worst <= 1e-8,
               f"worst {worst:.2e}")

    base = ExtremalState(0.0, 0.0, 0.3, 0.6, 0.4, 0.1)
    for name in ("flat", "sphere"):
        chart, frame = charts[name], frames[name]
        leaf = legendre.leaf_chart_numeric(chart, frame, base)
        field = legendre.GeodesicFlowField(chart, frame)
        rng = random.Random(3)
        worst = 0.0
        for _ in range(20):
            q = (0.1 * rng.uniform(-1, 1), 0.1 * rng.uniform(-1, 1),
                 0.3 + 0.2 * rng.uniform(-1, 1))
            worst = max(worst, max(first_integral := legendre.first_integral_residual(leaf, field, q)))
        report(f"{name}: numeric leaf first-integral residual", worst <= 1e-6,
               f"worst {worst:.2e}")

    print(f"{'ALL CHECKS PASSED' if not failures else f'{len(failures)} CHECK(S) FAILED'}")
    return EXIT_OK if not failures else EXIT_CHECK_FAILED


# --- Entry point ------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="srfront",
        description="Simulate and classify front singularities of unit-tangent-bundle geodesics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, needs_config in (
        ("simulate", True), ("classify", True), ("sweep", True),
        ("oracle", True), ("render", True), ("check", False),
    ):
        p = sub.add_parser(name)
        if needs_config:
            p.add_argument("--config", required=True, help="YAML run configuration")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--count", type=int, default=None, help="sweep sample count override")
        p.add_argument("--seed", type=int, default=None, help="seed override")
        p.add_argument("--tol", type=float, default=None, help="tolerance override")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "check":
            return cmd_check(args)
        config = load_config(
            args.config, tol_override=args.tol, seed_override=args.seed,
            count_override=args.count,
        )
        handler = {
            "simulate": cmd_simulate,
            "classify": cmd_classify,
            "sweep": cmd_sweep,
            "oracle": cmd_oracle,
            "render": cmd_render,
        }[args.command]
        return handler(config, args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (rk.StepSizeUnderflow, OutsideDomainError) as exc:
        print(f"integration error: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    except ClassificationError as exc:
        print(f"classification-contract violation: {exc}", file=sys.stderr)
        return EXIT_CLASSIFICATION


if __name__ == "__main__":
    sys.exit(main())
