import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jcpd.ephemeris import Ephemeris, EphemerisTable, KeplerElements
from jcpd.scenario import default_scenario
from jcpd.visibility import (
    ContactGraph,
    LinkType,
    NodeClass,
    PointingSpec,
    PrecomputedTopology,
    SlotClock,
    VisibilityModel,
    export_topology,
    import_topology,
    line_of_sight,
    link_type,
    long_graph,
    short_graph,
    within_pointing,
)

EARTH = [((0.0, 0.0, 0.0), 6371.0)]
G, L, U = NodeClass.GNSS, NodeClass.LP, NodeClass.USER


@pytest.fixture(scope="module")
def sc():
    return default_scenario(users__count=8, clock__horizon_s=360 * 4)


def test_line_of_sight_examples():
    assert not line_of_sight((10000, 0, 0), (-10000, 0, 0), EARTH)
    assert line_of_sight((10000, 0, 0), (10000, 5000, 0), EARTH)
    # closest approach 7000/sqrt(2) ~ 4950 km < 6371
    assert not line_of_sight((7000, 0, 0), (0, 7000, 0), EARTH)


def test_pointing_examples():
    spec = PointingSpec(60.0)
    obs = (27899.0, 0, 0)
    assert within_pointing(obs, PointingSpec(1.0), (0, 0, 0))
    assert not within_pointing(obs, spec, (60000.0, 0, 0))
    # 45 deg off boresight
    assert within_pointing(obs, spec, (0, 27899.0, 0))
    assert not within_pointing(obs, PointingSpec(44.0), (0, 27899.0, 0))
    assert within_pointing(obs, None, (60000.0, 0, 0))


def test_zenith_pointing():
    gs = (6371.0, 0, 0)
    spec = PointingSpec(85.0, "zenith")
    assert within_pointing(gs, spec, (30000.0, 0, 0))
    assert not within_pointing(gs, spec, (6371.0 - 100, 3000.0, 0))


def test_pointing_spec_limits():
    with pytest.raises(ValueError):
        PointingSpec(95.0, "zenith")
    with pytest.raises(ValueError):
        PointingSpec(0.0)
    PointingSpec(180.0)


def test_link_type_table():
    assert link_type(G, G) is LinkType.GNSS_GNSS
    assert link_type(L, G) is LinkType.LP_GNSS
    assert link_type(L, L) is LinkType.LP_LP
    assert link_type(U, L) is LinkType.LP_USER
    assert link_type(G, U) is LinkType.GNSS_USER
    assert link_type(U, U) is None
    assert link_type(NodeClass.GS, G) is None
    assert LinkType.GNSS_GNSS.switching_unit == "short"
    assert {lt.switching_unit for lt in LinkType if lt is not LinkType.GNSS_GNSS} == {"long"}


def test_clock_defaults():
    c = SlotClock()
    assert (c.shorts_per_long, c.longslots_per_state, c.shortslots_per_state) == (3, 40, 120)
    for n in range(1, 41):
        assert list(c.short_range(n)) == [3 * n - 2, 3 * n - 1, 3 * n]
    assert c.global_long(2, 1) == 81 and c.global_short(1, 120) == 240
    assert c.long_of_short(240) == 80 and c.state_of_long(81) == 2
    assert c.n_states(86400) == 240


def test_clock_rejects_bad_lengths():
    with pytest.raises(ValueError, match="LongSlot not a multiple of ShortSlot"):
        SlotClock(360, 7, 3)
    with pytest.raises(ValueError):
        SlotClock(100, 9, 3)
    with pytest.raises(ValueError):
        SlotClock().n_states(500)


def _toy_graph():
    nodes = ("g1", "g2", "l1", "u1")
    classes = (G, G, L, U)
    edges = {(0, 1): LinkType.GNSS_GNSS, (0, 2): LinkType.LP_GNSS, (2, 3): LinkType.LP_USER}
    return ContactGraph(0, nodes, classes, edges, frozenset({0}))


def test_long_and_short_views():
    g = _toy_graph()
    assert set(long_graph(g).edges) == {(0, 2), (2, 3)}
    assert set(short_graph(g).edges) == {(0, 1)}
    assert short_graph(g, {0}).edges == {}
    assert short_graph(g, {0, 1}).edges == {}
    only = ContactGraph(0, ("a", "b"), (G, G), {(0, 1): LinkType.GNSS_GNSS})
    assert long_graph(only).edges == {}


def test_contact_graph_rejects_mislabels():
    with pytest.raises(ValueError):
        ContactGraph(0, ("a", "b"), (G, L), {(0, 1): LinkType.GNSS_GNSS})
    with pytest.raises(ValueError):
        ContactGraph(0, ("a", "b"), (G, G), {(1, 0): LinkType.GNSS_GNSS})


def test_anchor_flags_skip_users():
    assert _toy_graph().anchor_flags == {"g1": True, "g2": False, "l1": False}


def test_opposed_meo_not_visible(sc):
    vm = sc.topology
    # MEO-01 and MEO-05 share a plane and are 180 deg apart
    assert not vm.pair_visible("MEO-01", "MEO-05", 0.0)


def test_overhead_satellite_seen_by_station():
    eph = Ephemeris()
    from jcpd.ephemeris import GroundStation
    eph.register("S", KeplerElements(27899.0))
    eph.register("GS-eq", GroundStation("eq", 0.0, 0.0))
    vm = VisibilityModel(["S"], [G], [PointingSpec(60.0)], ["GS-eq"], [PointingSpec(85.0, "zenith")],
                         eph, SlotClock())
    assert vm.pair_visible("S", "GS-eq", 0.0)
    assert vm.pair_visible("GS-eq", "S", 0.0)


def test_geo_l4_blocked_when_earth_between(sc):
    vm = sc.topology
    eph = sc.ephemeris
    # first epoch (minute grid) where L4 is most nearly behind Earth as seen from GEO-1
    ts = np.arange(0.0, 86400.0 * 2, 60.0)
    g = eph.positions(["GEO-1", "LP-L4"], ts)
    u = g[:, 0] / np.linalg.norm(g[:, 0], axis=1)[:, None]
    v = g[:, 1] / np.linalg.norm(g[:, 1], axis=1)[:, None]
    t = float(ts[np.argmin(np.einsum("ij,ij->i", u, v))])
    assert not vm.pair_visible("GEO-1", "LP-L4", t)
    # the same pair is visible at some other epoch on the grid
    assert any(vm.pair_visible("GEO-1", "LP-L4", float(x)) for x in ts[::120])


def test_continuity_required():
    # B sits beside A, then passes behind Earth mid-state, then returns
    eph = Ephemeris()
    eph.register("A", EphemerisTable((0.0, 360.0), ((20000.0, 0, 0), (20000.0, 0, 0))))
    eph.register("B", EphemerisTable((0.0, 150.0, 210.0, 360.0),
                                     ((20000.0, 1000.0, 0), (-20000.0, 0, 0), (-20000.0, 0, 0), (20000.0, 1000.0, 0))))
    eph.register("C", EphemerisTable((0.0, 360.0), ((20000.0, 5000.0, 0), (20000.0, 5000.0, 0))))
    vm = VisibilityModel(["A", "B", "C"], [L, L, L], [None, None, None], [], [], eph, SlotClock())
    assert vm.pair_visible("A", "B", 0.0)
    g = vm.fsa_contact_graph(0)
    assert (0, 1) not in g.edges
    assert (0, 2) in g.edges


def test_fast_graph_matches_reference(sc):
    vm = sc.topology
    for state in (0, 3):
        g = vm.fsa_contact_graph(state)
        times = vm.sample_times(state)
        n = len(vm.nodes)
        allv = np.ones((n, n), dtype=bool)
        anchor = np.ones(n, dtype=bool)
        for t in times:
            v, gv = vm.visibility_matrix(float(t))
            allv &= v
            anchor &= gv.any(axis=1)
        ref = {(i, j) for i in range(n) for j in range(i + 1, n)
               if allv[i, j] and link_type(vm.classes[i], vm.classes[j]) is not None}
        assert set(g.edges) == ref
        sats = {i for i in range(n) if vm.classes[i] in (G, L)}
        assert g.anchors == {i for i in sats if anchor[i]}


def test_default_graph_labels_and_partition(sc):
    g = sc.contact_graph(0)
    for (i, j), lt in g.edges.items():
        gnss_pair = g.classes[i] is G and g.classes[j] is G
        assert (lt.switching_unit == "short") == gnss_pair
    assert set(long_graph(g).edges) | set(short_graph(g).edges) == set(g.edges)
    assert not set(long_graph(g).edges) & set(short_graph(g).edges)
    assert all(g.classes[a] in (G, L) for a in g.anchors)
    assert g.anchors, "default geometry should have anchors"


def test_anchors_monotone_in_station_count():
    full = default_scenario(users__count=0, clock__horizon_s=360 * 3)
    few = default_scenario(users__count=0, clock__horizon_s=360 * 3,
                           ground_stations=[{"name": "Kashi", "latitude_deg": 39.47, "longitude_deg": 75.99}])
    for s in range(3):
        assert few.contact_graph(s).anchors <= full.contact_graph(s).anchors


def test_sample_times_cover_state_ends(sc):
    ts = sc.topology.sample_times(2)
    assert ts[0] == 720.0 and ts[-1] == 1080.0 and len(ts) == 121


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_pair_visibility_symmetric(sc, data):
    nodes = sc.nodes + sc.ground_stations
    a = data.draw(st.sampled_from(nodes))
    b = data.draw(st.sampled_from([x for x in nodes if x != a]))
    if a.startswith("GS-") and b.startswith("GS-"):
        return
    t = data.draw(st.floats(0, 86400))
    assert sc.topology.pair_visible(a, b, t) == sc.topology.pair_visible(b, a, t)


def test_topology_round_trip(sc, tmp_path):
    graphs = [sc.contact_graph(s) for s in range(2)]
    e, a = tmp_path / "e.csv", tmp_path / "a.csv"
    export_topology(graphs, e, a)
    assert e.read_text().splitlines()[0] == "state_index,node_a,node_b,link_type"
    assert a.read_text().splitlines()[0] == "state_index,node,is_anchor"
    back = import_topology(e, a, sc.nodes, sc.classes)
    for g in graphs:
        assert back[g.state_index].edges == g.edges
        assert back[g.state_index].anchors == g.anchors
    topo = PrecomputedTopology(back)
    with pytest.raises(ValueError):
        topo.fsa_contact_graph(9)
