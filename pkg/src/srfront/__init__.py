"""Sub-Riemannian geodesics on the unit tangent bundle of a surface.

Simulation of the normal extremal flow, closed-form pendulum oracles,
detection and normal-form classification of the singularities of both
canonical projections, and front rendering.
"""

from .extremal import (
    ExtremalState,
    Trajectory,
    abnormal_triviality_check,
    alt_integrate,
    arc_length,
    extremal_field,
    hamiltonian_value,
    integrate,
    projection_jet,
    switching_values,
)
from .legendre import (
    GeodesicFlowField,
    LeafChart,
    geodesic_by_christoffel,
    geodesic_flow,
    leaf_chart_flat,
    leaf_chart_numeric,
    project_pi,
    project_pi_prime,
)
from .metric import (
    MetricChart,
    OrthonormalFrame,
    builtin_chart,
    chart_from_callables,
    chart_from_expressions,
    christoffel,
    frame_from_metric,
    validate_geodesic_parallel,
)
from .pendulum import (
    PendulumParams,
    closed_form_flat,
    flat_pendulum_solution,
    jacobi,
    pendulum_energy,
)
from .pendulum import reduce as pendulum_reduce
from .singularity import (
    ClassificationPair,
    NormalFormClass,
    SingularEvent,
    classify_pair,
    classify_pi,
    classify_pi_prime,
    curvature,
    cusp_delta,
    cuspidal_curvature,
    detect_events,
    zigzag_report,
)

__version__ = "0.1.0"

__all__ = [
    "ExtremalState",
    "Trajectory",
    "MetricChart",
    "OrthonormalFrame",
    "GeodesicFlowField",
    "LeafChart",
    "PendulumParams",
    "NormalFormClass",
    "ClassificationPair",
    "SingularEvent",
    "abnormal_triviality_check",
    "alt_integrate",
    "arc_length",
    "builtin_chart",
    "chart_from_callables",
    "chart_from_expressions",
    "christoffel",
    "classify_pair",
    "classify_pi",
    "classify_pi_prime",
    "closed_form_flat",
    "curvature",
    "cusp_delta",
    "cuspidal_curvature",
    "detect_events",
    "extremal_field",
    "flat_pendulum_solution",
    "frame_from_metric",
    "geodesic_by_christoffel",
    "geodesic_flow",
    "hamiltonian_value",
    "integrate",
    "jacobi",
    "leaf_chart_flat",
    "leaf_chart_numeric",
    "pendulum_energy",
    "pendulum_reduce",
    "project_pi",
    "project_pi_prime",
    "projection_jet",
    "switching_values",
    "validate_geodesic_parallel",
    "zigzag_report",
]
