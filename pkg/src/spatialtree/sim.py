"""Cost-accounting simulator for a grid of constant-memory processors.

A :class:`SimState` tracks, for one logical run, the energy (sum of Manhattan
distances of all messages), the depth (longest chain of dependent messages),
and the message count.  Local computation is free; each message adds one
level to the receiver's dependency clock.  No routing, congestion, or timing
is modeled: the simulator prices exactly distance and dependency chains.

The module also provides the grid-wide communication primitives: range
broadcast and reduce over a virtual complete binary tree, the all-reduce
barrier, an up/down-sweep prefix sum, direct permutation routing, and
compaction of flagged records.
"""

from __future__ import annotations

import json
import operator
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

from .curves import CurveKind, cell_count, curve_coords

DEFAULT_MEMORY_BUDGET = 16


class TraceEvent(NamedTuple):
    src: int
    dst: int
    cost: int
    depth: int


@dataclass(frozen=True)
class CostReport:
    energy: int
    depth: int
    messages: int
    rounds: int


@dataclass(frozen=True)
class Placement:
    """First n positions of an order-k curve are occupied; the rest is padding."""

    kind: CurveKind
    k: int
    n: int

    @staticmethod
    def for_size(kind: CurveKind, n: int) -> "Placement":
        if n < 1:
            raise ValueError("placement needs at least one position")
        k = 0
        while cell_count(k) < n:
            k += 1
        return Placement(CurveKind(kind), k, n)

    def coord_lists(self):
        rows, cols = curve_coords(self.kind, self.k)
        return rows.tolist(), cols.tolist()

    def distance(self, i: int, j: int) -> int:
        rows, cols = curve_coords(self.kind, self.k)
        return int(abs(rows[i] - rows[j]) + abs(cols[i] - cols[j]))


class SimState:
    """Mutable cost accumulator for one run; confine to a single execution."""

    __slots__ = (
        "placement",
        "clock",
        "energy",
        "messages",
        "depth",
        "rounds",
        "events",
        "audit",
        "memory_budget",
        "max_words",
        "violations",
        "_rows",
        "_cols",
    )

    def __init__(self, placement: Placement, trace: bool = False,
                 audit_memory: bool = False, memory_budget: int = DEFAULT_MEMORY_BUDGET):
        self.placement = placement
        self.clock = [0] * placement.n
        self.energy = 0
        self.messages = 0
        self.depth = 0
        self.rounds = 0
        self.events: list[TraceEvent] | None = [] if trace else None
        self.audit = audit_memory
        self.memory_budget = memory_budget
        self.max_words = 0
        self.violations: list[tuple[int, int]] = []
        self._rows, self._cols = placement.coord_lists()

    def _deliver(self, src: int, dst: int, d: int) -> None:
        n = self.placement.n
        if src < 0 or src >= n or dst < 0 or dst >= n:
            raise ValueError(f"position out of range: {src} -> {dst} with n={n}")
        rows = self._rows
        cols = self._cols
        cost = abs(rows[src] - rows[dst]) + abs(cols[src] - cols[dst])
        self.energy += cost
        self.messages += 1
        if d > self.clock[dst]:
            self.clock[dst] = d
        if d > self.depth:
            self.depth = d
        if self.events is not None:
            self.events.append(TraceEvent(src, dst, cost, d))

    def send(self, src: int, dst: int) -> None:
        """Record one message; cost is the Manhattan distance between positions."""
        self._deliver(src, dst, self.clock[src] + 1)

    def send_batch(self, pairs) -> None:
        """One synchronous round of independent messages: every send departs
        at its source's start-of-round clock."""
        depths = [self.clock[src] + 1 for src, _ in pairs]
        for (src, dst), d in zip(pairs, depths):
            self._deliver(src, dst, d)

    def note_words(self, pos: int, words: int) -> None:
        """Audit hook: position currently holds this many live words."""
        if not self.audit:
            return
        if words > self.max_words:
            self.max_words = words
        if words > self.memory_budget:
            self.violations.append((pos, words))

    def report(self) -> CostReport:
        return CostReport(self.energy, self.depth, self.messages, self.rounds)

    def dump_trace(self, path) -> None:
        if self.events is None:
            raise ValueError("tracing was not enabled for this run")
        with open(path, "w") as fh:
            for ev in self.events:
                fh.write(json.dumps({"src": ev.src, "dst": ev.dst,
                                     "cost": ev.cost, "depth": ev.depth}))
                fh.write("\n")


def _check_range(sim: SimState, a: int, b: int) -> None:
    if a > b or a < 0 or b >= sim.placement.n:
        raise ValueError(f"invalid range [{a}, {b}] for n={sim.placement.n}")


def broadcast_range(sim: SimState, a: int, b: int) -> None:
    """Deliver one word from position a to every position in [a, b].

    The holder of a subrange sends to the holder of its right half; halving
    gives <= ceil(log2(len)) dependent levels and b - a messages.
    """
    _check_range(sim, a, b)
    stack = [(a, b)]
    while stack:
        lo, hi = stack.pop()
        if lo == hi:
            continue
        mid = (lo + hi) // 2
        sim.send(lo, mid + 1)
        stack.append((lo, mid))
        stack.append((mid + 1, hi))


def reduce_range(sim: SimState, a: int, b: int, values: Sequence, op: Callable):
    """Fold values[a..b] with op; the result lands at position a."""
    _check_range(sim, a, b)

    def go(lo, hi):
        if lo == hi:
            return values[lo]
        mid = (lo + hi) // 2
        left = go(lo, mid)
        right = go(mid + 1, hi)
        sim.send(mid + 1, lo)
        return op(left, right)

    return go(a, b)


def all_reduce_barrier(sim: SimState) -> None:
    """Reduce then broadcast over the whole grid; afterwards every clock is
    at least the pre-barrier maximum."""
    n = sim.placement.n
    if n <= 1:
        return
    reduce_range(sim, 0, n - 1, [0] * n, operator.add)
    broadcast_range(sim, 0, n - 1)


def prefix_sum(sim: SimState, values: Sequence, op: Callable = operator.add,
               identity=0) -> list:
    """Inclusive scan: position i ends up holding fold(values[0..i]).

    Up-sweep computes subrange totals bottom-up; down-sweep pushes carries
    top-down over the same binary range tree.
    """
    m = len(values)
    if m == 0:
        return []
    if m > sim.placement.n:
        raise ValueError("more values than occupied positions")
    totals = {}

    def up(lo, hi):
        if lo == hi:
            totals[(lo, hi)] = values[lo]
            return values[lo]
        mid = (lo + hi) // 2
        left = up(lo, mid)
        right = up(mid + 1, hi)
        sim.send(mid + 1, lo)
        tot = op(left, right)
        totals[(lo, hi)] = tot
        return tot

    out = [identity] * m

    def down(lo, hi, carry):
        if lo == hi:
            out[lo] = op(carry, values[lo])
            return
        mid = (lo + hi) // 2
        down(lo, mid, carry)
        sim.send(lo, mid + 1)
        down(mid + 1, hi, op(carry, totals[(lo, mid)]))

    up(0, m - 1)
    down(0, m - 1, identity)
    return out


def permute(sim: SimState, targets: dict[int, int]) -> None:
    """Route each source's record directly to its target, all in one round.

    ``targets`` must be a partial injection on occupied positions.
    """
    seen = set()
    n = sim.placement.n
    for src, dst in targets.items():
        if not (0 <= src < n and 0 <= dst < n):
            raise ValueError(f"permutation entry {src} -> {dst} out of range")
        if dst in seen:
            raise ValueError(f"duplicate permutation target {dst}")
        seen.add(dst)
    sim.send_batch([(src, targets[src]) for src in sorted(targets)])


def compact(sim: SimState, flags: Sequence[bool]) -> tuple[list, int]:
    """Move flagged records to prefix positions, preserving order.

    Returns (destinations, count) where destinations[i] is the new position
    of the record at i, or None if unflagged.  Costs one prefix sum plus the
    routing permutation.
    """
    m = len(flags)
    if m == 0:
        return [], 0
    counts = prefix_sum(sim, [1 if f else 0 for f in flags])
    dest: list[int | None] = [None] * m
    targets = {}
    for i, f in enumerate(flags):
        if f:
            dest[i] = counts[i] - 1
            targets[i] = counts[i] - 1
    permute(sim, targets)
    return dest, counts[m - 1]
