"""Batched lowest common ancestors via subtree covers.

Light-first order makes every subtree a contiguous position range, so
ancestor-descendant queries reduce to range containment.  For the rest, the
heavy-light path decomposition (heavy child = rightmost child) yields a
subtree cover: one subtree per path root, at most O(log n) covering any
vertex.  If LCA(u, v) = w is neither endpoint, some cover subtree S rooted
at a child x of w contains exactly one endpoint, and that endpoint sees the
other's position inside r(w) minus r(x).
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

from .layout import Layout
from .rng import Lcg
from .sim import SimState, all_reduce_barrier, broadcast_range
from .treefix import treefix_sum, treefix_topdown
from .trees import RootedTree, bfs_order, light_first_children, subtree_sizes
from .virtual_tree import VirtualTree, build_refs_protocol, local_broadcast


@dataclass
class PathDecomposition:
    layer: list[int]
    path_root: list[int]


@dataclass(frozen=True)
class CoverEntry:
    root: int
    lo: int
    hi: int
    layer: int


def _new_path_indicators(t: RootedTree, sizes) -> list[int]:
    """1 where a vertex starts a new path: everywhere except the root and
    each vertex's heavy (rightmost) child."""
    ind = [1] * t.n
    ind[t.root] = 0
    for cs in light_first_children(t, sizes):
        if cs:
            ind[cs[-1]] = 0
    return ind


def path_decomposition(sim: SimState, t: RootedTree, layout: Layout, sizes,
                       seed: int, vt: VirtualTree | None = None) -> PathDecomposition:
    """Heavy-light decomposition; layers are computed on the simulator with a
    top-down treefix sum over new-path indicators."""
    ind = _new_path_indicators(t, sizes)
    layer = treefix_topdown(sim, t, layout, ind, seed, vt=vt)
    path_root = [0] * t.n
    for v in bfs_order(t):
        p = t.parent[v]
        path_root[v] = v if (p < 0 or ind[v]) else path_root[p]
    return PathDecomposition(layer, path_root)


def subtree_cover(decomp: PathDecomposition, sizes, layout: Layout) -> list[CoverEntry]:
    """One entry per path root: its contiguous range and its layer."""
    pos = layout.pos
    entries = []
    for v in range(len(sizes)):
        if decomp.path_root[v] == v:
            entries.append(CoverEntry(v, pos[v], pos[v] + sizes[v] - 1,
                                      decomp.layer[v]))
    entries.sort(key=lambda e: (e.layer, e.lo))
    return entries


def batched_lca(sim: SimState, t: RootedTree, layout: Layout,
                queries: list[tuple[int, int]], seed: int,
                max_multiplicity: int = 4) -> list[int]:
    """Answer LCA queries, each vertex appearing in at most max_multiplicity
    of them.

    Steps: subtree ranges via a unit-value treefix sum (settles the
    ancestor-descendant queries), parent ranges broadcast to children, path
    decomposition, then per layer a broadcast of r(w) minus r(x) inside every
    cover subtree, with an all-reduce barrier between layers.
    """
    n = t.n
    pos = layout.pos
    mult = [0] * n
    for u, v in queries:
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"query ({u}, {v}) out of range")
        mult[u] += 1
        mult[v] += 1
    worst = max(mult, default=0)
    if worst > max_multiplicity:
        raise ValueError(
            f"a vertex appears in {worst} queries, above the limit of "
            f"{max_multiplicity}; split hot vertices before querying")

    rng = Lcg(seed)
    sizes_ref = subtree_sizes(t)
    vt = build_refs_protocol(sim, t, sizes_ref, layout)

    # step 1: ranges from a unit treefix sum; answer containment queries
    sums = treefix_sum(sim, t, layout, [1] * n, rng.next_u64(), vt=vt)
    lo = [pos[v] for v in range(n)]
    hi = [pos[v] + sums[v] - 1 for v in range(n)]
    answers: list[int | None] = [None] * len(queries)
    for qi, (u, v) in enumerate(queries):
        if u == v:
            answers[qi] = u
        elif lo[u] <= pos[v] <= hi[u]:
            answers[qi] = u
        elif lo[v] <= pos[u] <= hi[v]:
            answers[qi] = v

    # step 2: every vertex sends its range to its children
    local_broadcast(sim, vt, layout, list(zip(lo, hi)))

    # step 3: path decomposition
    decomp = path_decomposition(sim, t, layout, sizes_ref, rng.next_u64(), vt=vt)
    cover = subtree_cover(decomp, sums, layout)

    # step 4: per layer, broadcast r(w) \ r(x) within each cover subtree
    by_layer: dict[int, list[CoverEntry]] = {}
    for e in cover:
        by_layer.setdefault(e.layer, []).append(e)
    pending: dict[int, list[tuple[int, int, int]]] = {}
    for qi, (u, v) in enumerate(queries):
        if answers[qi] is None:
            pending.setdefault(pos[u], []).append((qi, u, v))
            pending.setdefault(pos[v], []).append((qi, v, u))
    layers = 0
    for layer in sorted(by_layer):
        entries = by_layer[layer]
        starts = [e.lo for e in entries]
        did_broadcast = False
        for e in entries:
            if e.root == t.root:
                continue  # the whole-tree subtree has no parent
            broadcast_range(sim, e.lo, e.hi)
            did_broadcast = True
        if did_broadcast:
            layers += 1
            for p, recs in pending.items():
                i = bisect_right(starts, p) - 1
                if i < 0:
                    continue
                e = entries[i]
                if not (e.lo <= p <= e.hi) or e.root == t.root:
                    continue
                w = t.parent[e.root]
                wlo, whi = lo[w], hi[w]
                for qi, mine, other in recs:
                    op = pos[other]
                    if (wlo <= op < e.lo or e.hi < op <= whi):
                        if answers[qi] is None:
                            answers[qi] = w
                        elif answers[qi] != w:
                            raise RuntimeError("conflicting answers for one query")
            all_reduce_barrier(sim)
    sim.rounds += layers
    if any(a is None for a in answers):
        raise RuntimeError("a query was left unanswered")
    return answers
