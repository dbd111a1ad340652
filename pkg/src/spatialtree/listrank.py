"""Euler tours and randomized contraction-based list ranking.

List ranking repeatedly splices out an independent set of elements chosen by
random-mate coin flips, solves the small remnant by a sequential walk, and
then replays the splices in reverse to assign every element its distance
from the head.  Ranking the successor chain of an Euler tour yields tour
indices, from which subtree sizes fall out as half the first/last gap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .rng import Lcg
from .sim import SimState
from .trees import RootedTree


class ChainError(ValueError):
    """The successor array does not describe a single chain."""


@dataclass
class EulerTour:
    """Vertex-visit sequence of length 2n-1, with first/last occurrence indices."""

    order: list[int]
    first: list[int]
    last: list[int]


def euler_tour(t: RootedTree, child_order: list[list[int]] | None = None) -> EulerTour:
    """Edge-duplication tour: from v, visit children in order, returning to v
    between children.  Starts and ends at the root."""
    ch = child_order if child_order is not None else t.children
    n = t.n
    order: list[int] = []
    first = [-1] * n
    last = [-1] * n
    stack: list[tuple[int, int]] = [(t.root, 0)]
    first[t.root] = 0
    last[t.root] = 0
    order.append(t.root)
    while stack:
        v, i = stack.pop()
        if i < len(ch[v]):
            stack.append((v, i + 1))
            c = ch[v][i]
            first[c] = len(order)
            last[c] = len(order)
            order.append(c)
            stack.append((c, 0))
        elif t.parent[v] >= 0 and stack:
            p = stack[-1][0]
            last[p] = len(order)
            order.append(p)
    return EulerTour(order, first, last)


def _validate_chain(succ: list[int], head: int) -> None:
    m = len(succ)
    if not 0 <= head < m:
        raise ChainError(f"head {head} out of range")
    npred = [0] * m
    tails = 0
    for x, s in enumerate(succ):
        if s == -1:
            tails += 1
        elif 0 <= s < m:
            npred[s] += 1
        else:
            raise ChainError(f"successor {s} of element {x} out of range")
    if tails != 1 or npred[head] != 0 or any(npred[x] > 1 for x in range(m)):
        raise ChainError("successor links must form one chain covering all elements")
    if sum(npred) != m - 1:
        raise ChainError("successor links must form one chain covering all elements")


def list_rank(sim: SimState, succ: list[int], head: int, seed: int,
              iteration_stats: list | None = None) -> list[int]:
    """Rank of every element: rank(head) = 0, rank(succ(x)) = rank(x) + 1.

    Elements occupy curve positions equal to their ids.  Each contraction
    iteration charges one announce message per live link and one splice
    message per removed element; the remnant of at most max(4, ceil(log2 m))
    elements is walked sequentially, then iterations are reverted in
    descending order.

    When ``iteration_stats`` is a list, one (live, messages, energy) triple
    is appended per contraction iteration.
    """
    m = len(succ)
    _validate_chain(succ, head)
    if m == 1:
        return [0]
    rng = Lcg(seed)
    nxt = list(succ)
    pred = [-1] * m
    for x, s in enumerate(nxt):
        if s >= 0:
            pred[s] = x
    weight = [1] * m           # original hops from x to nxt[x]
    alive = [True] * m
    src = [-1] * m             # who jumped over x
    delta = [0] * m            # rank offset of x from src[x]
    live = [x for x in range(m)]
    threshold = max(4, math.ceil(math.log2(m)))
    removed_per_iter: list[list[int]] = []
    while len(live) > threshold:
        msg0, en0 = sim.messages, sim.energy
        coin = {}
        for x in live:
            coin[x] = rng.next_bit()
        # one round of announces: identity and coin to the successor
        sim.send_batch([(x, nxt[x]) for x in live if nxt[x] >= 0])
        # heads whose successor flipped tails; selecting before any splice
        # keeps the set non-adjacent in the current chain
        removed = [y for y in live
                   if y != head and coin[y] == 1 and nxt[y] >= 0 and coin[nxt[y]] == 0]
        # one round of splice messages to the predecessors
        sim.send_batch([(y, pred[y]) for y in removed])
        for y in removed:
            p = pred[y]
            z = nxt[y]
            delta[y] = weight[p]
            weight[p] += weight[y]
            nxt[p] = z
            pred[z] = p
            src[y] = p
            alive[y] = False
        removed_per_iter.append(removed)
        if iteration_stats is not None:
            iteration_stats.append((len(live), sim.messages - msg0,
                                    sim.energy - en0))
        if sim.audit:
            for x in live:
                sim.note_words(x, 7)  # succ, pred, weight, rank, tag, src, coin
        live = [x for x in live if alive[x]]
        sim.rounds += 1
    rank = [0] * m
    cur = head
    while nxt[cur] >= 0:
        z = nxt[cur]
        sim.send(cur, z)
        rank[z] = rank[cur] + weight[cur]
        cur = z
    for removed in reversed(removed_per_iter):
        for y in removed:
            sim.send(src[y], y)
            rank[y] = rank[src[y]] + delta[y]
    return rank


def tour_links(t: RootedTree, child_order: list[list[int]] | None = None):
    """Successor chain over the 2n-1 tour slots.

    Slot v (v < n) is the first visit of vertex v; slot n + j is the j-th
    return visit, enumerated over (vertex, child index) pairs.  Returns
    (succ, head, ret_id) where ret_id[(v, i)] is the slot visiting v after
    its i-th child's subtree.
    """
    ch = child_order if child_order is not None else t.children
    n = t.n
    ret_id: dict[tuple[int, int], int] = {}
    nid = n
    for v in range(n):
        for i in range(len(ch[v])):
            ret_id[(v, i)] = nid
            nid += 1
    m = 2 * n - 1
    succ = [-1] * m
    child_index = [0] * n
    for v in range(n):
        for i, c in enumerate(ch[v]):
            child_index[c] = i

    def after(v: int) -> int:
        p = t.parent[v]
        if p < 0:
            return -1
        return ret_id[(p, child_index[v])]

    for v in range(n):
        if ch[v]:
            succ[v] = ch[v][0]
            for i in range(len(ch[v])):
                nxt = ch[v][i + 1] if i + 1 < len(ch[v]) else None
                succ[ret_id[(v, i)]] = nxt if nxt is not None else after(v)
        else:
            succ[v] = after(v)
    return succ, t.root, ret_id


def subtree_sizes_via_tour(sim: SimState, t: RootedTree, seed: int) -> list[int]:
    """Subtree sizes from a ranked Euler tour: s(v) = (last - first)/2 + 1.

    The first-visit slot of v sits at v's own position; the slot of v's last
    return visit sends its rank home, one message per internal vertex.
    """
    n = t.n
    if n == 1:
        return [1]
    if sim.placement.n < 2 * n - 1:
        raise ValueError("placement too small for the 2n-1 tour slots")
    succ, head, ret_id = tour_links(t)
    rank = list_rank(sim, succ, head, seed)
    sizes = [1] * n
    for v in range(n):
        first = rank[v]
        if t.children[v]:
            last_slot = ret_id[(v, len(t.children[v]) - 1)]
            sim.send(last_slot, v)
            last = rank[last_slot]
        else:
            last = first
        sizes[v] = (last - first) // 2 + 1
    return sizes
