import pytest

from sensetrace.simulator import generate_traces, standard_scenario

STANDARD_SEED = 42


@pytest.fixture(scope="session")
def standard_scenario_obj():
    return standard_scenario(seed=STANDARD_SEED)


@pytest.fixture(scope="session")
def standard_data(standard_scenario_obj):
    """One generation of the standard 240-instance scenario, shared across
    the suite (generation is deterministic, so sharing is safe)."""
    return generate_traces(standard_scenario_obj)
