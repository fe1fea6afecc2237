"""Evolution of representations towards slowly drifting targets.

Engine, concept families (conjunctions, halfspaces, a compiled
correlational-query learner), drift schedules and an experiment harness.
"""
from .engine import (
    ConfigurationError,
    EngineConfig,
    NeighborSet,
    TrajectoryRecord,
    analyze_trajectory,
    empirical_performance,
    hoeffding_sample_size,
    run_evolution,
    select_mutation,
    theorem8_parameters,
)

__version__ = "0.1.0"
