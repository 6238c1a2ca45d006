"""Synthetic testbeds: geometry, per-sensor signal models and deterministic
trace generation."""

from .config import (
    config_hash,
    default_scenario_dict,
    load_scenario,
    scenario_from_dict,
    standard_scenario,
    write_config,
)
from .scenario import (
    DEFAULT_BUCKETS,
    BucketSpec,
    GeneratedData,
    PlacedInstance,
    Scenario,
    generate_traces,
    place_instances,
)
from .signals import (
    PropagationNoise,
    simulate_barometer,
    simulate_magnetometer,
    simulate_rss,
    simulate_sound,
)
from .testbed import (
    INDOOR,
    OUTDOOR,
    DevicePlacement,
    Hotspot,
    MagneticFieldModel,
    PressureModel,
    Region,
    Testbed,
    Wall,
)

__all__ = [
    "BucketSpec",
    "DEFAULT_BUCKETS",
    "DevicePlacement",
    "GeneratedData",
    "Hotspot",
    "INDOOR",
    "MagneticFieldModel",
    "OUTDOOR",
    "PlacedInstance",
    "PressureModel",
    "PropagationNoise",
    "Region",
    "Scenario",
    "Testbed",
    "Wall",
    "config_hash",
    "default_scenario_dict",
    "generate_traces",
    "load_scenario",
    "place_instances",
    "scenario_from_dict",
    "simulate_barometer",
    "simulate_magnetometer",
    "simulate_rss",
    "simulate_sound",
    "standard_scenario",
    "write_config",
]
