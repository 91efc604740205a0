"""Bipartite contention graph and the iterative cancellation engine.

Users are one side of the graph, slots the other; an edge means the user
transmitted a replica in that slot.  Decoding is peeling: any non-erased slot
whose residual holds exactly one unresolved user yields that user, and the
user's replicas are then cancelled from every slot it appears in, which may
expose further singletons.  The resolved set reached at a stall is a closure
and does not depend on processing order.
"""

from __future__ import annotations

from collections import deque
from typing import IO, Iterable, Iterator

from .errors import ParameterError


class SlotNode:
    """One received slot: who transmitted, who is still uncancelled, and
    whether channel noise erased the slot for decoding purposes."""

    __slots__ = ("index", "participants", "residual", "erased")

    def __init__(self, index: int, participants: tuple[int, ...], erased: bool) -> None:
        self.index = index
        self.participants = participants
        self.residual: set[int] = set(participants)
        self.erased = erased

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        flag = " erased" if self.erased else ""
        return f"SlotNode({self.index}, {self.participants}, residual={sorted(self.residual)}{flag})"


class ContentionGraph:
    """Mutable decoding state for one contention period.

    Slots are appended as they are received; peeling can be run to a stall or
    advanced one cycle at a time so that a termination rule can fire mid
    avalanche.  Erased slots never produce a resolution but are still updated
    by cancellation, so they behave normally once re-examined.
    """

    def __init__(self, n_users: int) -> None:
        if n_users < 1:
            raise ParameterError(f"n_users must be a positive count, got {n_users}")
        self.n_users = n_users
        self.slots: list[SlotNode] = []
        self.resolved: list[bool] = [False] * n_users
        self.resolution_slot: list[int | None] = [None] * n_users
        self.replica_count: list[int] = [0] * n_users
        self.resolved_count = 0
        self.total_edges = 0
        self._user_slots: list[list[int]] = [[] for _ in range(n_users)]
        self._ready: deque[int] = deque()

    def add_slot(self, participants: Iterable[int], erased: bool = False) -> int:
        """Append a received slot and return its index.

        Replicas of already-resolved users are cancelled immediately (their
        content is known), so the residual only ever holds unresolved users.
        """
        users = sorted(set(int(u) for u in participants))
        if users and (users[0] < 0 or users[-1] >= self.n_users):
            raise ParameterError(f"user ids must lie in [0, {self.n_users}), got {users}")
        index = len(self.slots)
        slot = SlotNode(index, tuple(users), erased)
        resolved = self.resolved
        for u in users:
            self.replica_count[u] += 1
            self._user_slots[u].append(index)
            if resolved[u]:
                slot.residual.discard(u)
        self.total_edges += len(users)
        self.slots.append(slot)
        if not erased and len(slot.residual) == 1:
            self._ready.append(index)
        return index

    def _resolve(self, user: int, via_slot: int) -> None:
        self.resolved[user] = True
        self.resolution_slot[user] = via_slot
        self.resolved_count += 1
        slots = self.slots
        for si in self._user_slots[user]:
            slot = slots[si]
            slot.residual.discard(user)
            if not slot.erased and len(slot.residual) == 1:
                self._ready.append(si)

    def peel_stepwise(self, rng=None) -> Iterator[int]:
        """Advance cancellation one cycle at a time, yielding the number of
        users resolved in each cycle.  A cycle consumes the singleton slots
        present when it starts; singletons it creates wait for the next
        cycle.  `rng.shuffle` is applied to each cycle's worklist when given,
        which only permutes processing order, never the final resolved set.
        """
        while self._ready:
            batch = [si for si in self._ready if len(self.slots[si].residual) == 1]
            self._ready.clear()
            if rng is not None:
                rng.shuffle(batch)
            count = 0
            for si in batch:
                residual = self.slots[si].residual
                if len(residual) != 1:
                    continue  # consumed earlier in this same cycle
                (user,) = residual
                self._resolve(user, si)
                count += 1
            if count:
                yield count

    def peel(self, rng=None) -> int:
        """Run cancellation to a stall; returns how many users it resolved."""
        return sum(self.peel_stepwise(rng))

    def resolved_users(self) -> set[int]:
        return {u for u in range(self.n_users) if self.resolved[u]}

    def edge_list(self) -> list[tuple[int, int]]:
        """All (user_id, slot_index) edges, ordered by slot then user."""
        return [(u, slot.index) for slot in self.slots for u in slot.participants]

    def dump_edges(self, stream: IO[str]) -> None:
        """Debug dump: one `user_id slot_index` pair per line."""
        for u, si in self.edge_list():
            stream.write(f"{u} {si}\n")
