"""Reactive power sharing under voltage limits: simulation and analysis."""

from ._core import (  # noqa: F401
    Equilibrium,
    ModelError,
    ScenarioError,
    algebraic_connectivity,
    analyze_stability,
    bundled_scenarios,
    consensus_gain_matrix,
    jacobians,
    kron_reduce,
    laplacian,
    load_scenario,
    parse_scenario,
    power_flow,
    serialize_scenario,
    simulate,
    solve_equilibrium,
    tune,
    validate,
    verify_properties,
)

__all__ = [name for name in dir() if not name.startswith("_")]
