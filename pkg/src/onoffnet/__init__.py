"""ON/OFF node activity, battery discharge and energy-aware routing toolkit."""

__version__ = "0.1.0"

from .activity import (
    GENERATOR_ID,
    NodeState,
    OnOffParams,
    Segment,
    Trajectory,
    monte_carlo_on_times,
    sample_trajectory,
    sojourn_survival,
    total_off_time,
    total_on_time,
)
from .battery import (
    BatteryState,
    ConsumedFraction,
    GassingParams,
    SodModel,
    active_time_at,
    advance,
    discharge_current,
    expected_consumed_fraction,
    predict_lifetime,
    sod_continuous,
    sod_modulated,
)
from .occupancy import (
    DensityCurve,
    OccupancySpec,
    OccupationLaw,
    closed_form_gap,
    density_curve,
    exact_occupation_distribution,
    mean_on_time,
    normalization_constant,
    on_time_cdf,
    on_time_density,
)
from .routing import (
    EnergyTable,
    HelloCodec,
    NetworkGraph,
    NodeRecord,
    RouteResult,
    TableEntry,
    collision_probability,
    decode_energy,
    encode_delay,
    encode_slot,
    select_route,
    update_energy_table,
)
from .scenario import (
    ConfigError,
    NodeSetup,
    ScenarioConfig,
    ScenarioResult,
    aggregate_metrics,
    load_scenario_config,
    run_scenario,
)

__all__ = [
    "GENERATOR_ID",
    "NodeState",
    "OnOffParams",
    "Segment",
    "Trajectory",
    "monte_carlo_on_times",
    "sample_trajectory",
    "sojourn_survival",
    "total_off_time",
    "total_on_time",
    "BatteryState",
    "ConsumedFraction",
    "GassingParams",
    "SodModel",
    "active_time_at",
    "advance",
    "discharge_current",
    "expected_consumed_fraction",
    "predict_lifetime",
    "sod_continuous",
    "sod_modulated",
    "DensityCurve",
    "OccupancySpec",
    "OccupationLaw",
    "closed_form_gap",
    "density_curve",
    "exact_occupation_distribution",
    "mean_on_time",
    "normalization_constant",
    "on_time_cdf",
    "on_time_density",
    "EnergyTable",
    "HelloCodec",
    "NetworkGraph",
    "NodeRecord",
    "RouteResult",
    "TableEntry",
    "collision_probability",
    "decode_energy",
    "encode_delay",
    "encode_slot",
    "select_route",
    "update_energy_table",
    "ConfigError",
    "NodeSetup",
    "ScenarioConfig",
    "ScenarioResult",
    "aggregate_metrics",
    "load_scenario_config",
    "run_scenario",
]
