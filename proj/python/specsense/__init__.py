"""Python bindings for the specsense simulator."""

from ._core import (
    ConfigError,
    DomainError,
    InfeasibleError,
    SolverLimitError,
    alpha_weights,
    beta_weights,
    emit_plot_data,
    gap_benchmark,
    generate_scenario,
    grid_neighborhoods,
    heuristic_assign,
    los_probability,
    noise_power_mw,
    normalize_scenario,
    objective_value,
    pathloss_db,
    pick_min_cost_sap,
    run_campaign,
    solve_exact,
    spectrum_plan,
    write_campaign,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "InfeasibleError",
    "SolverLimitError",
    "alpha_weights",
    "beta_weights",
    "emit_plot_data",
    "gap_benchmark",
    "generate_scenario",
    "grid_neighborhoods",
    "heuristic_assign",
    "los_probability",
    "noise_power_mw",
    "normalize_scenario",
    "objective_value",
    "pathloss_db",
    "pick_min_cost_sap",
    "run_campaign",
    "solve_exact",
    "spectrum_plan",
    "write_campaign",
]
