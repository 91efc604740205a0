"""Frameless slotted random access with successive interference cancellation:
simulation, asymptotic analysis, and reproduction of the operating points
reported for the adaptive-termination scheme.
"""

from .access import (
    AccessParams,
    BeaconKey,
    p_miss,
    prob_user_silent,
    schedule_indicator,
    slot_access_probability,
    slot_degree_pmf,
    user_degree_pmf,
)
from .asymptotic import AsymptoticCurve, CurvePoint, FixedPointResult, and_or_fixed_point, sweep_curve
from .errors import ConfigError, FramelessAlohaError, ParameterError
from .experiments import (
    AggregateStats,
    LadderRung,
    SensitivityResult,
    SweepCell,
    SweepResult,
    beacon_experiment,
    monte_carlo,
    sensitivity_alpha,
    sweep_optimize,
)
from .graph import ContentionGraph, SlotNode
from .simulator import RunConfig, RunStats, derive_seed, genie_run, run_contention
from .termination import (
    DualThreshold,
    FixedLength,
    FractionOnly,
    GenieAided,
    StopReason,
    TerminationDecision,
    TerminationPolicy,
    apply_estimation_error,
    evaluate,
)

__version__ = "0.1.0"

__all__ = [
    "AccessParams",
    "AggregateStats",
    "AsymptoticCurve",
    "BeaconKey",
    "ConfigError",
    "ContentionGraph",
    "CurvePoint",
    "DualThreshold",
    "FixedLength",
    "FixedPointResult",
    "FractionOnly",
    "FramelessAlohaError",
    "GenieAided",
    "LadderRung",
    "ParameterError",
    "RunConfig",
    "RunStats",
    "SensitivityResult",
    "SlotNode",
    "StopReason",
    "SweepCell",
    "SweepResult",
    "TerminationDecision",
    "TerminationPolicy",
    "and_or_fixed_point",
    "apply_estimation_error",
    "beacon_experiment",
    "derive_seed",
    "evaluate",
    "genie_run",
    "monte_carlo",
    "p_miss",
    "prob_user_silent",
    "run_contention",
    "schedule_indicator",
    "sensitivity_alpha",
    "slot_access_probability",
    "slot_degree_pmf",
    "sweep_curve",
    "sweep_optimize",
    "user_degree_pmf",
]
