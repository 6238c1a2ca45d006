"""Multi-sensor smartphone contact tracing: ranging, environment matching,
staged fusion, ID-exchange protocols and a deterministic simulator."""

from .core import (
    CONTACT_DISTANCE_M,
    ContactDecision,
    ContactWindow,
    DeviceId,
    GroundTruthLabel,
    ProximityState,
    SensorKind,
    SensorSample,
    make_window,
    read_trace,
    write_trace,
)
from .envmatch import EnvThresholds, dtw_score, env_similar, magnitude, select_env_sensor
from .errors import (
    EmptySequence,
    EmptyWindow,
    EvaluationError,
    InsufficientEvidence,
    InvalidDistance,
    InvalidMeasure,
    ModeError,
    NoContact,
    NotDue,
    ScenarioError,
    SenseTraceError,
)
from .evaluation import ConfusionCounts, TierSpec, accuracy, confusion, run_tier
from .fusion import (
    FusionConfig,
    StageEvidence,
    StageGates,
    build_evidence,
    decide,
    noise_gate,
    register_contact,
    stage_appearance,
    stage_distance,
    stage_environment,
)
from .ranging import (
    ChirpSpec,
    DistanceEstimate,
    PathLossParams,
    aggregate_window_distance,
    combine_distances,
    distance_from_rss,
    rss_from_distance,
    sound_distance,
)

__version__ = "0.1.0"
