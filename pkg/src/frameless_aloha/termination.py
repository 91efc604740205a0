"""Termination rules for the contention period.

The receiver re-evaluates its rule while cancellation is running; the
instantaneous throughput is resolved users per slot spent, charging the
beacon slots of the next period, and the resolved fraction is measured
against the receiver's population estimate (the true count is unknown to it).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from .errors import ParameterError


class StopReason(Enum):
    NONE = "none"
    THROUGHPUT_HIT = "throughput_hit"
    FRACTION_HIT = "fraction_hit"
    HORIZON_EXHAUSTED = "horizon_exhausted"


@dataclass(frozen=True)
class TerminationDecision:
    stop: bool
    reason: StopReason


_NO_STOP = TerminationDecision(False, StopReason.NONE)
_STOP_THROUGHPUT = TerminationDecision(True, StopReason.THROUGHPUT_HIT)
_STOP_FRACTION = TerminationDecision(True, StopReason.FRACTION_HIT)
_STOP_HORIZON = TerminationDecision(True, StopReason.HORIZON_EXHAUSTED)


def _check_unit_interval(name: str, value: float) -> None:
    if not 0.0 < value <= 1.0:
        raise ParameterError(f"{name} must lie in (0, 1], got {value}")


@dataclass(frozen=True)
class DualThreshold:
    """Stop when instantaneous throughput reaches `throughput_threshold` or
    the estimated resolved fraction reaches `fraction_threshold`, whichever
    happens first.  On a simultaneous hit the throughput reason wins."""

    throughput_threshold: float = 1.0
    fraction_threshold: float = 0.87

    def __post_init__(self) -> None:
        _check_unit_interval("throughput_threshold", self.throughput_threshold)
        _check_unit_interval("fraction_threshold", self.fraction_threshold)


@dataclass(frozen=True)
class FractionOnly:
    """Stop once the estimated resolved fraction reaches the threshold."""

    fraction_threshold: float = 0.87

    def __post_init__(self) -> None:
        _check_unit_interval("fraction_threshold", self.fraction_threshold)


@dataclass(frozen=True)
class GenieAided:
    """Non-causal benchmark: the period length that maximizes throughput is
    picked in hindsight over a horizon of `horizon_factor` slots per user.
    Never fires during a run; the selection happens in the genie runner."""

    horizon_factor: float = 10.0

    def __post_init__(self) -> None:
        if not self.horizon_factor > 0:
            raise ParameterError(f"horizon_factor must be positive, got {self.horizon_factor}")


@dataclass(frozen=True)
class FixedLength:
    """Stop unconditionally after `n_slots` slots."""

    n_slots: int

    def __post_init__(self) -> None:
        if self.n_slots < 1:
            raise ParameterError(f"n_slots must be a positive count, got {self.n_slots}")


TerminationPolicy = DualThreshold | FractionOnly | GenieAided | FixedLength


def evaluate(policy: TerminationPolicy, n_resolved: int, n_users_est: int,
             n_slots: int, beacon_len: int = 1) -> TerminationDecision:
    """Evaluate `policy` after `n_slots` received slots with `n_resolved`
    users resolved so far.  Pure; safe to call once per cancellation cycle."""
    if n_slots < 1:
        raise ParameterError(f"n_slots must be a positive count, got {n_slots}")
    if n_users_est < 1:
        raise ParameterError(f"n_users_est must be a positive count, got {n_users_est}")
    if isinstance(policy, GenieAided):
        return _NO_STOP
    if isinstance(policy, FixedLength):
        return _STOP_HORIZON if n_slots >= policy.n_slots else _NO_STOP
    if isinstance(policy, DualThreshold):
        throughput = n_resolved / (n_slots + beacon_len - 1)
        if throughput >= policy.throughput_threshold:
            return _STOP_THROUGHPUT
    fraction = n_resolved / n_users_est
    if fraction >= policy.fraction_threshold:
        return _STOP_FRACTION
    return _NO_STOP


def apply_estimation_error(policy: TerminationPolicy, alpha: float) -> TerminationPolicy:
    """Rescale fraction thresholds for a population estimate off by the
    relative error `alpha`; the result is clamped to 1.  Throughput
    thresholds are unaffected because slot and resolution counts are exact.
    """
    if not alpha > -1.0:
        raise ParameterError(f"alpha must exceed -1, got {alpha}")
    if isinstance(policy, (DualThreshold, FractionOnly)):
        actual = min(1.0, policy.fraction_threshold / (1.0 + alpha))
        return replace(policy, fraction_threshold=actual)
    return policy
