import pytest

from jcpd.matching import Matching
from jcpd.potentials import GNSS, LP, USER, ScheduleState, fcp_weight, preset
from jcpd.scenario import Scenario, default_scenario
from jcpd.scheduler import (
    check_plan_invariants,
    long_slot_cpd,
    postprocess_long,
    run,
    run_fcp,
    run_jcpd,
    short_slot_cpd,
)
from jcpd.visibility import ContactGraph, LinkType, PrecomputedTopology, SlotClock, link_type

P = preset("group1")


def graph(classes, pairs, anchors=(), state=0):
    names = tuple(f"n{i}" for i in range(len(classes)))
    edges = {(i, j): link_type(classes[i], classes[j]) for i, j in pairs}
    return ContactGraph(state, names, tuple(classes), edges, frozenset(anchors))


def toy_scenario(classes, pairs, anchors=(), demand=None, states=1, algorithm="jcpd"):
    g = {s: graph(classes, pairs, anchors, s) for s in range(states)}
    names = list(g[0].nodes)
    return Scenario(nodes=names, classes=list(classes), kinds=["x"] * len(classes), ground_stations=[],
                    clock=SlotClock(), params=P, demand=dict(demand or {}), horizon_s=360.0 * states,
                    algorithm=algorithm, topology=PrecomputedTopology(g))


def state_for(classes, anchors=(), demand=None):
    st = ScheduleState(classes=list(classes), params=P, demand=dict(demand or {}))
    st.start_state(0, anchors)
    return st


@pytest.fixture(scope="module")
def small():
    return default_scenario(users__count=8, clock__horizon_s=360 * 2)


@pytest.fixture(scope="module")
def small_plan(small):
    return run(small)


# ---- LongSlot stage ----------------------------------------------------------

def test_long_stage_empty_graph():
    classes = [GNSS, GNSS]
    st = state_for(classes)
    m, _, busy, _ = long_slot_cpd(1, st, graph(classes, [(0, 1)]))
    assert m.pairs == () or len(m.pairs) == 0
    assert busy == set()


def test_long_postprocess_resets_lp_telemetry():
    classes = [GNSS, LP]
    st = state_for(classes, anchors={0})
    st.D[1] = 5
    busy = postprocess_long(Matching(((0, 1),), 1.0), 1, st)
    assert st.D[1] == 0
    assert busy == {0}


def test_long_stage_heavy_lp_offloads_to_anchor_gnss():
    classes = [GNSS, LP]
    st = state_for(classes, anchors={0})
    st.D[1] = 60
    m, _, busy, w = long_slot_cpd(1, st, graph(classes, [(0, 1)], anchors={0}))
    assert set(m.pairs) == {(0, 1)} and w[(0, 1)] > 0
    assert st.D[1] == 0 and busy == {0}


def test_long_stage_effective_lp_pair():
    classes = [LP, LP]
    st = state_for(classes)
    st.set_last(0, 1, 5)
    m, _, _, _ = long_slot_cpd(30, st, graph(classes, [(0, 1)]))
    assert set(m.pairs) == {(0, 1)}
    assert st.ranging_got == [1, 1]
    assert st.last(0, 1) == 30


def test_served_user_edges_dropped():
    classes = [LP, USER]
    st = state_for(classes, demand={1: 2})
    st.user_got[1] = 2
    m, _, _, w = long_slot_cpd(1, st, graph(classes, [(0, 1)]))
    assert not m.pairs and not w


# ---- ShortSlot stage ---------------------------------------------------------

def test_short_stage_all_busy():
    classes = [GNSS, GNSS, GNSS]
    st = state_for(classes)
    m, _, w = short_slot_cpd(1, st, graph(classes, [(0, 1), (1, 2)]), {0, 1, 2})
    assert not m.pairs and not w


def test_short_stage_resets_gnss_telemetry():
    classes = [GNSS, GNSS]
    st = state_for(classes, anchors={1})
    st.D[0] = 4
    m, _, _ = short_slot_cpd(1, st, graph(classes, [(0, 1)], anchors={1}), set())
    assert set(m.pairs) == {(0, 1)}
    assert st.D[0] == 0


def test_short_stage_noneffective_link_kept():
    classes = [GNSS, GNSS]
    st = state_for(classes, anchors={1})
    st.D[0] = 4  # communication keeps the weight positive
    st.set_last(0, 1, 10 - P.I_S)
    m, _, _ = short_slot_cpd(10, st, graph(classes, [(0, 1)], anchors={1}), set())
    assert set(m.pairs) == {(0, 1)}
    assert st.ranging_got == [0, 0]
    assert st.last(0, 1) == 10 - P.I_S


def test_short_stage_skips_busy():
    classes = [GNSS, GNSS, GNSS]
    st = state_for(classes)
    m, _, _ = short_slot_cpd(1, st, graph(classes, [(0, 1), (1, 2)]), {1})
    assert not m.pairs


# ---- whole runs ----------------------------------------------------------------

def test_one_state_slot_counts():
    sc = default_scenario(users__count=4, clock__horizon_s=360)
    plan = run_jcpd(sc)
    assert len(plan.long_links) == 40 and len(plan.short_links) == 120
    assert plan.complete


def test_small_plan_invariants(small, small_plan):
    assert check_plan_invariants(small_plan, small.demand) == []
    for s, got in enumerate(small_plan.user_got):
        assert all(got[u] <= L for u, L in small.demand.items())


def test_cross_level_exclusion(small_plan):
    cls = small_plan.classes
    for n, longs in enumerate(small_plan.long_links, start=1):
        busy = {x for i, j, _lt, _w in longs for x in (i, j) if cls[x] is GNSS}
        for k in range(3 * n - 2, 3 * n + 1):
            assert not busy & {x for i, j, _w in small_plan.short_links[k - 1] for x in (i, j)}


def test_deterministic(small):
    a, b = run(small), run(small)
    assert a.long_links == b.long_links and a.short_links == b.short_links
    assert a.ranging_got == b.ranging_got


def test_zero_users():
    sc = default_scenario(users__count=0, clock__horizon_s=360)
    plan = run(sc)
    assert not any(lt in (LinkType.LP_USER, LinkType.GNSS_USER) for *_x, lt, _w in plan.links())


def test_invariant_checker_flags_problems(small_plan):
    import copy
    bad = copy.deepcopy(small_plan)
    # put a busy GNSS satellite into a ShortSlot of the same LongSlot
    n = next(n for n, longs in enumerate(bad.long_links, 1)
             if any(bad.classes[i] is GNSS for i, _j, _lt, _w in longs))
    g = next(i for i, _j, _lt, _w in bad.long_links[n - 1] if bad.classes[i] is GNSS)
    other = next(x for x, c in enumerate(bad.classes) if c is GNSS and x != g)
    bad.short_links[3 * n - 3] = bad.short_links[3 * n - 3] + [(g, other, 1.0)]
    probs = check_plan_invariants(bad)
    assert any("busy" in p for p in probs)


# ---- FCP ---------------------------------------------------------------------

def test_fcp_single_edge_selected():
    sc = toy_scenario([GNSS, GNSS], [(0, 1)], algorithm="fcp")
    plan = run_fcp(sc)
    assert all([link[:2] for link in links] == [(0, 1)] for links in plan.short_links)


def test_fcp_stops_serving_user_after_demand():
    # one LP, one user with L_u = 1
    sc = toy_scenario([LP, USER], [(0, 1)], demand={1: 1}, algorithm="fcp", states=2)
    plan = run_fcp(sc)
    per_state = 40
    for s in range(2):
        longs = plan.long_links[s * per_state:(s + 1) * per_state]
        assert [n for n, links in enumerate(longs, 1) if links] == [1]


def test_fcp_fairness_prefers_unserved():
    counts = [0, 3, 0]
    assert fcp_weight(0, 2, counts) > fcp_weight(0, 1, counts)


def test_fcp_plan_respects_user_cap(small):
    sc = default_scenario(users__count=8, clock__horizon_s=360 * 2, algorithm="fcp")
    plan = run(sc)
    assert plan.algorithm == "fcp"
    assert check_plan_invariants(plan, sc.demand) == []
