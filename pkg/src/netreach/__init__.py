"""Reachability analysis and minimum-energy steering for leader-follower networks."""
from .aggregate import (
    AggregateSystem,
    Trajectory,
    build_aggregate,
    simulate_aggregate,
    simulate_subsystem_level,
    split_gain,
)
from .errors import (
    DimensionMismatch,
    HorizonTooShort,
    InvalidProfile,
    NetreachError,
    NumericalFailure,
    ParseError,
    SchemaError,
)
from .fixtures import load_fixture
from .kernels import BACKEND
from .model import (
    BaseInputMode,
    DimensionProfile,
    GainMatrix,
    NetworkSpec,
    Role,
    SubsystemModel,
    load_network,
    parse_network_spec,
    random_network,
    serialize_network_spec,
    validate_network,
)
from .reach import (
    ReachabilityReport,
    Verdict,
    controllability_matrix,
    is_base_reachable,
    is_leader_reachable,
    numerical_rank,
    pbh_test,
    reachability_gramian,
)
from .synth import build_cascade, follower_steerable, min_energy_steer, verify_plan

__version__ = "0.1.0"
