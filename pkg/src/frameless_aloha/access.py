"""Slot-access model: transmission probabilities, degree distributions, and
the keyed schedule that decides who transmits in which slot.

Every transmission decision in a contention period is a pure function of
(user id, beacon nonce, slot index): a 64-bit hash of the triple is compared
against ``floor(p_a * 2**64)``.  The receiver can therefore reconstruct the
complete schedule of any user it has identified, which is what makes
interference cancellation possible without per-packet pointers.

The hash is a SplitMix64-finalizer cascade.  The construction is
implementation-defined; any keyed permutation with per-bit avalanche would do,
this one is chosen for speed and a trivially portable integer-only definition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15  # SplitMix64 stream increment
_BEACON_SALT = 0x8C589F0D1A92B7E3
_NOISE_SALT = 0x3A7D64E2C9B50F81


def mix64(value: int) -> int:
    """SplitMix64 finalizer on a 64-bit integer (pure Python, exact)."""
    z = value & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _mix64_inplace(z: np.ndarray) -> np.ndarray:
    # mutates its argument; caller must own the buffer
    z ^= z >> np.uint64(30)
    z *= np.uint64(0xBF58476D1CE4E5B9)
    z ^= z >> np.uint64(27)
    z *= np.uint64(0x94D049BB133111EB)
    z ^= z >> np.uint64(31)
    return z


def prob_threshold(prob: float) -> int:
    """Map a probability to the integer threshold used by the keyed schedule.

    A hash value h participates iff h < floor(prob * 2**64); prob = 1 maps to
    2**64 so that every hash passes.
    """
    if not 0.0 <= prob <= 1.0 or math.isnan(prob):
        raise ParameterError(f"probability must lie in [0, 1], got {prob}")
    return int(prob * 2.0**64)


def derive_seed(base_seed: int, index: int) -> int:
    """Deterministic child seed for work item `index` under `base_seed`."""
    return mix64((base_seed + (index + 1) * _GOLDEN) & _MASK64)


def erasure_key(seed: int) -> int:
    """Key for the per-slot erasure stream, independent of the beacon nonce."""
    return mix64((seed ^ _NOISE_SALT) & _MASK64)


@dataclass(frozen=True)
class BeaconKey:
    """64-bit nonce broadcast at the start of a contention period."""

    nonce: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "nonce", self.nonce & _MASK64)

    @classmethod
    def from_seed(cls, seed: int) -> "BeaconKey":
        return cls(mix64((seed ^ _BEACON_SALT) & _MASK64))


@dataclass(frozen=True)
class AccessParams:
    """Access parameters for one contention period.

    The receiver only knows an estimate of the population size; the estimate
    is ``round((1 + alpha) * n_users)`` where alpha is the relative error.
    The per-slot access probability is ``target_degree / n_users_est`` clamped
    at 1.
    """

    n_users: int
    target_degree: float
    alpha: float = 0.0
    n_users_est: int = field(init=False)
    slot_access_prob: float = field(init=False)

    def __post_init__(self) -> None:
        if self.n_users < 1:
            raise ParameterError(f"n_users must be a positive count, got {self.n_users}")
        if not self.target_degree > 0:
            raise ParameterError(f"target_degree must be positive, got {self.target_degree}")
        if not self.alpha > -1.0:
            raise ParameterError(f"alpha must exceed -1, got {self.alpha}")
        est = int(math.floor((1.0 + self.alpha) * self.n_users + 0.5))
        if est < 1:
            raise ParameterError(
                f"estimated population rounds to {est}; alpha={self.alpha} is too negative"
            )
        object.__setattr__(self, "n_users_est", est)
        object.__setattr__(
            self, "slot_access_prob", slot_access_probability(self.target_degree, est)
        )

    @property
    def actual_target_degree(self) -> float:
        """Mean slot degree actually realized when the estimate is off."""
        return self.target_degree / (1.0 + self.alpha)


def slot_access_probability(target_degree: float, n_users_est: int) -> float:
    """Per-slot transmission probability, clamped to 1 for tiny populations."""
    if not target_degree > 0:
        raise ParameterError(f"target_degree must be positive, got {target_degree}")
    if n_users_est < 1:
        raise ParameterError(f"n_users_est must be a positive count, got {n_users_est}")
    return min(1.0, target_degree / n_users_est)


def _poisson_pmf(rate: float, count: int) -> float:
    if count == 0:
        return math.exp(-rate)
    if rate == 0.0:
        return 0.0
    return math.exp(count * math.log(rate) - rate - math.lgamma(count + 1))


def slot_degree_pmf(target_degree: float, n: int, n_users: int | None = None,
                    mode: str = "poisson") -> float:
    """Probability that a slot contains exactly `n` transmissions.

    `poisson` mode is the large-population limit and needs no population size;
    `exact` mode evaluates the binomial with p = min(1, target_degree/n_users)
    and is kept as a cross-check for small populations.
    """
    if not target_degree > 0:
        raise ParameterError(f"target_degree must be positive, got {target_degree}")
    if n < 0:
        raise ParameterError(f"degree must be non-negative, got {n}")
    if mode == "poisson":
        return _poisson_pmf(target_degree, n)
    if mode == "exact":
        if n_users is None or n_users < 1:
            raise ParameterError("exact mode needs a positive n_users")
        if n > n_users:
            raise ParameterError(f"degree {n} exceeds population {n_users}")
        p = min(1.0, target_degree / n_users)
        return math.comb(n_users, n) * p**n * (1.0 - p) ** (n_users - n)
    raise ParameterError(f"unknown pmf mode {mode!r}")


def user_degree_pmf(target_degree: float, epsilon: float, m: int) -> float:
    """Probability that a user transmitted exactly `m` times in a contention
    period whose length exceeded the population by the relative amount
    `epsilon` (mean replica count is (1 + epsilon) * target_degree)."""
    if m < 0:
        raise ParameterError(f"replica count must be non-negative, got {m}")
    rate = (1.0 + epsilon) * target_degree
    if rate < 0:
        raise ParameterError(f"mean replica count must be non-negative, got {rate}")
    return _poisson_pmf(rate, m)


def prob_user_silent(target_degree: float, n_slots: float, n_users: int) -> float:
    """Probability that a user never transmitted in `n_slots` slots."""
    if not target_degree > 0:
        raise ParameterError(f"target_degree must be positive, got {target_degree}")
    if n_slots < 0:
        raise ParameterError(f"n_slots must be non-negative, got {n_slots}")
    if n_users < 1:
        raise ParameterError(f"n_users must be a positive count, got {n_users}")
    return math.exp(-(n_slots / n_users) * target_degree)


def p_miss(slot_access_prob: float, beacon_len: int) -> float:
    """Probability that a user transmits inside an L-slot beacon it has not
    yet decoded (it collides with the beacon in all L slots independently)."""
    if not 0.0 <= slot_access_prob <= 1.0:
        raise ParameterError(f"probability must lie in [0, 1], got {slot_access_prob}")
    if beacon_len < 1:
        raise ParameterError(f"beacon_len must be a positive count, got {beacon_len}")
    return slot_access_prob**beacon_len


def _slot_key(nonce: int, slot_index: int) -> int:
    return mix64((nonce + (slot_index + 1) * _GOLDEN) & _MASK64)


def schedule_indicator(user_id: int, beacon: BeaconKey, slot_index: int,
                       slot_access_prob: float) -> bool:
    """True iff `user_id` transmits in slot `slot_index` under `beacon`.

    Pure and stateless: repeated evaluation always returns the same value,
    and the marginal rate over slots equals `slot_access_prob` up to the
    2**-64 quantization of the threshold.
    """
    if user_id < 0:
        raise ParameterError(f"user_id must be non-negative, got {user_id}")
    if slot_index < 0:
        raise ParameterError(f"slot_index must be non-negative, got {slot_index}")
    thr = prob_threshold(slot_access_prob)
    if thr > _MASK64:
        return True
    h = mix64(_slot_key(beacon.nonce, slot_index) ^ (user_id & _MASK64))
    return h < thr


def schedule_block(n_users: int, beacon: BeaconKey, first_slot: int, n_slots: int,
                   slot_access_prob: float) -> np.ndarray:
    """Participation mask for users 0..n_users-1 over `n_slots` consecutive
    slots starting at `first_slot`; shape (n_slots, n_users), bit-identical
    to per-element `schedule_indicator` calls."""
    thr = prob_threshold(slot_access_prob)
    if thr > _MASK64:
        return np.ones((n_slots, n_users), dtype=bool)
    if thr == 0:
        return np.zeros((n_slots, n_users), dtype=bool)
    idx = np.arange(first_slot + 1, first_slot + n_slots + 1, dtype=np.uint64)
    keys = _mix64_inplace(np.uint64(beacon.nonce) + idx * np.uint64(_GOLDEN))
    uids = np.arange(n_users, dtype=np.uint64)
    h = _mix64_inplace(keys[:, None] ^ uids[None, :])
    return h < np.uint64(thr)


def bernoulli_block(key: int, first_slot: int, n_slots: int, prob: float) -> np.ndarray:
    """Keyed per-slot Bernoulli stream (used for erasure flags); shape (n_slots,)."""
    thr = prob_threshold(prob)
    if thr > _MASK64:
        return np.ones(n_slots, dtype=bool)
    if thr == 0:
        return np.zeros(n_slots, dtype=bool)
    idx = np.arange(first_slot + 1, first_slot + n_slots + 1, dtype=np.uint64)
    h = _mix64_inplace(np.uint64(key & _MASK64) + idx * np.uint64(_GOLDEN))
    return h < np.uint64(thr)
