import math
import operator

from spatialtree.curves import CurveKind, aligned_square_side, curve_coords
from spatialtree.layout import build_baseline, light_first_layout
from spatialtree.rng import Lcg
from spatialtree.sim import SimState
from spatialtree.trees import RootedTree, gen_tree, subtree_sizes
from spatialtree.virtual_tree import (build_refs_protocol, local_broadcast,
                                      local_reduce, transform)


def vt_for(t):
    return transform(t, subtree_sizes(t))


def test_binary_tree_is_a_fixed_point():
    t = gen_tree("perfect-binary", 15)
    vt = vt_for(t)
    assert all(not a for a in vt.app)
    assert sorted(map(tuple, vt.cur)) == sorted(map(tuple,
        [sorted(cs, key=lambda c: subtree_sizes(t)[c]) for cs in t.children]))


def test_star_four_children():
    vt = vt_for(gen_tree("star", 5))
    assert vt.cur[0] == [1, 3]
    assert vt.app[1] == [2]
    assert vt.app[3] == [4]


def test_star_eight_children_two_halving_levels():
    vt = vt_for(gen_tree("star", 9))
    assert vt.cur[0] == [1, 5]
    assert vt.app[1] == [2, 3] and vt.app[3] == [4]
    assert vt.app[5] == [6, 7] and vt.app[7] == [8]
    assert all(len(vt.cur[v]) <= 2 and len(vt.app[v]) <= 2 for v in range(9))


def test_degree_bound_and_coverage_on_random_trees():
    rng = Lcg(3)
    for trial in range(100):
        n = 1 + rng.next_below(400)
        t = gen_tree("random-attachment", n, seed=trial)
        vt = vt_for(t)
        for v in range(n):
            assert len(vt.cur[v]) + len(vt.app[v]) <= 4
        # virtual links reconnect exactly the vertex set
        assert sorted(vt.order()) == list(range(n))


def test_order_preservation_sizes_ascend_within_pairs():
    rng = Lcg(4)
    for trial in range(50):
        t = gen_tree("random-attachment", 2 + rng.next_below(300), seed=trial)
        sizes = subtree_sizes(t)
        vt = vt_for(t)
        lay = light_first_layout(t, sizes=sizes)
        for v in range(t.n):
            for pair in (vt.cur[v], vt.app[v]):
                if len(pair) == 2:
                    assert sizes[pair[0]] <= sizes[pair[1]]
        # positions untouched: the original light-first check still holds
        from spatialtree.layout import verify_light_first
        assert verify_light_first(t, sizes, lay)


def test_protocol_reconstruction_matches_transform():
    rng = Lcg(5)
    for trial in range(100):
        n = 1 + rng.next_below(512)
        t = gen_tree("random-attachment", n, seed=trial)
        sizes = subtree_sizes(t)
        lay = light_first_layout(t, sizes=sizes)
        sim = SimState(lay.placement())
        vt = build_refs_protocol(sim, t, sizes, lay)  # asserts equality inside
        assert sim.energy <= 40 * n  # measured constant, with headroom
        direct = transform(t, sizes)
        assert vt.cur == direct.cur and vt.app == direct.app


def test_local_broadcast_star_two_levels():
    t = gen_tree("star", 5)
    lay = light_first_layout(t)
    sim = SimState(lay.placement())
    got = local_broadcast(sim, vt_for(t), lay, ["m"] * 5)
    assert got[1:] == ["m"] * 4
    assert sim.depth <= 2


def test_local_broadcast_single_vertex():
    t = RootedTree([-1])
    lay = light_first_layout(t)
    sim = SimState(lay.placement())
    local_broadcast(sim, vt_for(t), lay, [9])
    assert sim.messages == 0


def test_local_broadcast_delivers_parent_values_everywhere():
    rng = Lcg(6)
    for trial in range(40):
        n = 1 + rng.next_below(300)
        t = gen_tree("random-attachment", n, seed=trial)
        lay = light_first_layout(t)
        vals = [rng.next_below(10 ** 6) for _ in range(n)]
        got = local_broadcast(SimState(lay.placement()), vt_for(t), lay, vals)
        for v in range(n):
            expect = vals[t.parent[v]] if t.parent[v] >= 0 else None
            assert got[v] == expect


def test_local_reduce_examples_and_oracle():
    t = gen_tree("star", 7)
    lay = light_first_layout(t)
    got = local_reduce(SimState(lay.placement()), vt_for(t), lay,
                       [1] * 7, operator.add, 0)
    assert got[0] == 6
    single = RootedTree([-1])
    slay = light_first_layout(single)
    assert local_reduce(SimState(slay.placement()), vt_for(single), slay,
                        [5], operator.add, 0) == [0]
    rng = Lcg(7)
    for trial in range(30):
        n = 1 + rng.next_below(250)
        t = gen_tree("random-attachment", n, seed=trial)
        lay = light_first_layout(t)
        vals = [rng.next_below(100) for _ in range(n)]
        got = local_reduce(SimState(lay.placement()), vt_for(t), lay,
                           vals, operator.add, 0)
        for v in range(n):
            assert got[v] == sum(vals[c] for c in t.children[v])


def test_broadcast_energy_recurrence_bound_general_trees():
    # E(n) <= 8 * alpha * degree * n with alpha = 3 on Hilbert and the
    # virtual tree sending at most 4 messages per vertex
    rng = Lcg(19)
    for trial in range(10):
        n = 64 + rng.next_below(4000)
        t = gen_tree("random-attachment", n, seed=trial)
        lay = light_first_layout(t)
        sim = SimState(lay.placement())
        local_broadcast(sim, vt_for(t), lay, [0] * n)
        assert sim.energy <= 8 * 3 * 4 * n


def test_broadcast_energy_linear_on_light_first_superlinear_on_bfs():
    light, bfs = [], []
    for k in (8, 10, 12, 14, 16, 18):
        t = gen_tree("perfect-binary", 2 ** k - 1)
        vt = vt_for(t)
        lay = light_first_layout(t)
        s = SimState(lay.placement())
        local_broadcast(s, vt, lay, [1] * t.n)
        light.append(s.energy)
        if k <= 12:
            blay = build_baseline(t, "bfs", CurveKind.HILBERT)
            s = SimState(blay.placement())
            local_broadcast(s, vt, blay, [1] * t.n)
            bfs.append(s.energy)
    for a, b in zip(light, light[1:]):
        assert b / a <= 4.5
    for a, b in zip(bfs, bfs[1:]):
        assert b / a >= 6.0


def test_zorder_diagonal_usage_bound_small():
    # every diagonal is "longest" for at most max_sends * ceil(log2(4 s^2))
    # messages, where s is the side of the smallest aligned square containing
    # the step
    rng = Lcg(8)
    for trial in range(6):
        n = 2 + rng.next_below(1024)
        t = gen_tree("random-attachment", n, seed=trial)
        lay = light_first_layout(t, CurveKind.ZORDER)
        vt = vt_for(t)
        sim = SimState(lay.placement(), trace=True)
        local_broadcast(sim, vt, lay, [0] * n)
        rows, cols = curve_coords(CurveKind.ZORDER, lay.k)
        sent = {}
        for ev in sim.events:
            sent[ev.src] = sent.get(ev.src, 0) + 1
        delta = max(sent.values())
        counts = {}
        spans = {}
        for ev in sim.events:
            lo, hi = min(ev.src, ev.dst), max(ev.src, ev.dst)
            best_t, best_d = -1, 0
            for step in range(lo, hi):
                a = (rows[step], cols[step])
                b = (rows[step + 1], cols[step + 1])
                if aligned_square_side(a, b) >= 4:
                    d = abs(a[0] - b[0]) + abs(a[1] - b[1])
                    if d > best_d:
                        best_t, best_d = step, d
            if best_t >= 0:
                counts[best_t] = counts.get(best_t, 0) + 1
                spans[best_t] = aligned_square_side(
                    (rows[best_t], cols[best_t]),
                    (rows[best_t + 1], cols[best_t + 1]))
        for step, c in counts.items():
            bound = delta * math.ceil(math.log2(4 * spans[step] ** 2))
            assert c <= bound, (step, c, bound)
