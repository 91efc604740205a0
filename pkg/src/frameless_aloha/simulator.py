"""Slot-by-slot execution of a single contention period.

The receiver appends each received slot to the contention graph, runs
cancellation to a stall, and then evaluates its termination rule; with
`evaluate_each_cycle` the rule is instead checked after every cancellation
cycle, which freezes the run mid-avalanche at the first crossing.  All
randomness comes from the run seed: the beacon nonce keys the transmission
schedule and a separate salted key drives the per-slot erasure stream, so a
run is bit-for-bit reproducible from (config, seed) alone.
"""

from __future__ import annotations

from dataclasses import dataclass

from .access import (
    AccessParams,
    BeaconKey,
    bernoulli_block,
    derive_seed,
    erasure_key,
    schedule_block,
)
from .errors import ParameterError
from .graph import ContentionGraph
from .termination import (
    GenieAided,
    StopReason,
    TerminationPolicy,
    apply_estimation_error,
    evaluate,
)

__all__ = [
    "RunConfig",
    "RunStats",
    "run_contention",
    "genie_run",
    "derive_seed",
]


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one contention period."""

    n_users: int
    target_degree: float
    policy: TerminationPolicy
    erasure_prob: float = 0.0
    alpha: float = 0.0
    beacon_len: int = 1
    horizon_factor: float = 10.0
    seed: int = 1
    evaluate_each_cycle: bool = False

    def __post_init__(self) -> None:
        if self.n_users < 1:
            raise ParameterError(f"n_users must be a positive count, got {self.n_users}")
        if not self.target_degree > 0:
            raise ParameterError(f"target_degree must be positive, got {self.target_degree}")
        if not 0.0 <= self.erasure_prob <= 1.0:
            raise ParameterError(f"erasure_prob must lie in [0, 1], got {self.erasure_prob}")
        if not self.alpha > -1.0:
            raise ParameterError(f"alpha must exceed -1, got {self.alpha}")
        if self.beacon_len < 1:
            raise ParameterError(f"beacon_len must be a positive count, got {self.beacon_len}")
        if not self.horizon_factor > 0:
            raise ParameterError(f"horizon_factor must be positive, got {self.horizon_factor}")

    def access_params(self) -> AccessParams:
        return AccessParams(self.n_users, self.target_degree, self.alpha)


@dataclass(frozen=True)
class RunStats:
    """Outcome of one contention period.

    `fraction_resolved` is measured against the true population;
    `fraction_resolved_est` against the receiver's estimate (the quantity its
    stopping rule actually saw).  `throughput` charges the beacon overhead of
    the follow-up period: resolved / (slots + beacon_len - 1).
    """

    slots: int
    resolved: int
    fraction_resolved: float
    fraction_resolved_est: float
    throughput: float
    replicas_per_user: float
    reason: StopReason
    trajectory: tuple[tuple[int, int], ...] | None = None


class _SlotSource:
    """Block-buffered draw of (participants, erased) per slot.

    Blocks keep the hashing vectorized without changing its per-slot
    definition; participant lists are exactly the users whose schedule
    indicator fires for the slot.
    """

    def __init__(self, n_users: int, slot_access_prob: float, beacon: BeaconKey,
                 noise_key: int, erasure_prob: float) -> None:
        self.n_users = n_users
        self.p_a = slot_access_prob
        self.beacon = beacon
        self.noise_key = noise_key
        self.erasure_prob = erasure_prob
        self.block = max(16, min(512, 2_000_000 // max(1, n_users)))
        self._next_slot = 0
        self._buf_participants: list[list[int]] = []
        self._buf_erased: list[bool] = []
        self._buf_pos = 0

    def _refill(self) -> None:
        mask = schedule_block(self.n_users, self.beacon, self._next_slot, self.block, self.p_a)
        counts = mask.sum(axis=1)
        bounds = counts.cumsum()
        users = mask.nonzero()[1].tolist()
        parts: list[list[int]] = []
        lo = 0
        for hi in bounds.tolist():
            parts.append(users[lo:hi])
            lo = hi
        if self.erasure_prob > 0.0:
            erased = bernoulli_block(self.noise_key, self._next_slot, self.block,
                                     self.erasure_prob).tolist()
        else:
            erased = [False] * self.block
        self._buf_participants = parts
        self._buf_erased = erased
        self._buf_pos = 0
        self._next_slot += self.block

    def next_slot(self) -> tuple[list[int], bool]:
        if self._buf_pos >= len(self._buf_participants):
            self._refill()
        i = self._buf_pos
        self._buf_pos += 1
        return self._buf_participants[i], self._buf_erased[i]


def _horizon(config: RunConfig) -> int:
    factor = config.horizon_factor
    if isinstance(config.policy, GenieAided):
        factor = config.policy.horizon_factor
    return max(1, int(round(factor * config.n_users)))


def _source_for(config: RunConfig, seed: int, params: AccessParams) -> _SlotSource:
    beacon = BeaconKey.from_seed(seed)
    return _SlotSource(config.n_users, params.slot_access_prob, beacon,
                       erasure_key(seed), config.erasure_prob)


def run_contention(config: RunConfig, seed: int | None = None,
                   record_trajectory: bool = False) -> RunStats:
    """Simulate one contention period under the configured stopping rule.

    The estimation error rescales both the access probability (through the
    population estimate) and the fraction threshold the receiver applies.
    Runs that reach the horizon without the rule firing are still complete
    runs, flagged with the horizon reason.
    """
    if seed is None:
        seed = config.seed
    params = config.access_params()
    policy = apply_estimation_error(config.policy, config.alpha)
    graph = ContentionGraph(config.n_users)
    source = _source_for(config, seed, params)
    horizon = _horizon(config)
    n_est = params.n_users_est
    beacon_len = config.beacon_len
    trajectory: list[tuple[int, int]] | None = [] if record_trajectory else None
    decision = None
    slots = horizon
    for j in range(1, horizon + 1):
        participants, erased = source.next_slot()
        graph.add_slot(participants, erased)
        if config.evaluate_each_cycle:
            for _ in graph.peel_stepwise():
                d = evaluate(policy, graph.resolved_count, n_est, j, beacon_len)
                if d.stop:
                    decision = d
                    break
        else:
            graph.peel()
        if decision is None:
            d = evaluate(policy, graph.resolved_count, n_est, j, beacon_len)
            if d.stop:
                decision = d
        if trajectory is not None:
            trajectory.append((j, graph.resolved_count))
        if decision is not None:
            slots = j
            break
    reason = decision.reason if decision is not None else StopReason.HORIZON_EXHAUSTED
    resolved = graph.resolved_count
    return RunStats(
        slots=slots,
        resolved=resolved,
        fraction_resolved=resolved / config.n_users,
        fraction_resolved_est=resolved / n_est,
        throughput=resolved / (slots + beacon_len - 1),
        replicas_per_user=graph.total_edges / config.n_users,
        reason=reason,
        trajectory=tuple(trajectory) if trajectory is not None else None,
    )


def genie_run(config: RunConfig, seed: int | None = None,
              record_trajectory: bool = True, prune: bool = True) -> RunStats:
    """Non-causal benchmark run: pick, in hindsight, the period length that
    maximizes instantaneous throughput over the horizon (earliest on ties).

    With `prune` the scan stops once no future slot can beat the incumbent
    (resolved counts are capped by the population), which cannot change the
    argmax; disable it to record the full-horizon trajectory.
    """
    if seed is None:
        seed = config.seed
    params = config.access_params()
    graph = ContentionGraph(config.n_users)
    source = _source_for(config, seed, params)
    horizon = _horizon(config)
    n = config.n_users
    beacon_len = config.beacon_len
    trajectory: list[tuple[int, int]] | None = [] if record_trajectory else None
    best_resolved = 0
    best_slots = 1
    best_edges = 0
    for j in range(1, horizon + 1):
        participants, erased = source.next_slot()
        graph.add_slot(participants, erased)
        graph.peel()
        resolved = graph.resolved_count
        if trajectory is not None:
            trajectory.append((j, resolved))
        if j == 1 or resolved * (best_slots + beacon_len - 1) > best_resolved * (j + beacon_len - 1):
            best_resolved = resolved
            best_slots = j
            best_edges = graph.total_edges
        if prune and best_resolved and n * (best_slots + beacon_len - 1) < best_resolved * (j + beacon_len):
            break
    return RunStats(
        slots=best_slots,
        resolved=best_resolved,
        fraction_resolved=best_resolved / n,
        fraction_resolved_est=best_resolved / params.n_users_est,
        throughput=best_resolved / (best_slots + beacon_len - 1),
        replicas_per_user=best_edges / n,
        reason=StopReason.THROUGHPUT_HIT,
        trajectory=tuple(trajectory) if trajectory is not None else None,
    )
