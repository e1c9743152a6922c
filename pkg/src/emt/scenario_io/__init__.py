from emt.scenario_io.results import (
    ALIGNMENT_FILE,
    CERTIFICATE_FILE,
    MANIFEST_FILE,
    TRAJECTORY_FILE,
    ResultIOError,
    read_table,
    sha256_text,
    trajectory_columns,
    write_results,
    write_table,
)
from emt.scenario_io.rng import SplitMix64, seeded_rng
from emt.scenario_io.scenario import (
    FrontierAdd,
    FrontierSpec,
    ScenarioConfig,
    emit_scenario,
    parse_scenario,
)

__all__ = [
    "ALIGNMENT_FILE",
    "CERTIFICATE_FILE",
    "MANIFEST_FILE",
    "TRAJECTORY_FILE",
    "FrontierAdd",
    "FrontierSpec",
    "ResultIOError",
    "ScenarioConfig",
    "SplitMix64",
    "emit_scenario",
    "parse_scenario",
    "read_table",
    "seeded_rng",
    "sha256_text",
    "trajectory_columns",
    "write_results",
    "write_table",
]
