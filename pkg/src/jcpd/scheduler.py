"""Two-stage contact plan design.

Every LongSlot first schedules the Earth-Moon scale links (LP satellites,
users, GNSS-LP) by maximum-weight matching, then the nested ShortSlots each
schedule intra-GNSS links among the GNSS satellites left free. ``run_jcpd``
weights edges with the potential-energy model; ``run_fcp`` runs the same
loop with fairness weights as a baseline.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

from .matching import Matching, check_matching, max_weight_matching
from .potentials import (
    GNSS,
    USER,
    ScheduleState,
    accrue_telemetry,
    edge_weight_long,
    edge_weight_short,
    fcp_weight,
    mean_neighbor_telemetry,
    ranging_interval,
)
from .visibility import ContactGraph, LinkType, SlotClock, link_type

log = logging.getLogger(__name__)


class ScheduleViolation(AssertionError):
    pass


@dataclass
class ContactPlan:
    nodes: list
    classes: list
    clock: SlotClock
    n_states: int
    algorithm: str
    group: str = ""
    scenario_hash: str = ""
    seed: int = 0
    # index n-1 / k-1 holds the links of global LongSlot n / ShortSlot k
    long_links: list = field(default_factory=list)  # [(i, j, LinkType, weight)]
    short_links: list = field(default_factory=list)  # [(i, j, weight)]
    anchors: list = field(default_factory=list)  # frozenset per state
    ranging_got: list = field(default_factory=list)  # per state: scheduler N^got per node
    user_got: list = field(default_factory=list)  # per state: delivered links per node
    runtime_s: float = 0.0

    @property
    def complete(self) -> bool:
        c = self.clock
        return (len(self.anchors) == self.n_states
                and len(self.long_links) == self.n_states * c.longslots_per_state
                and len(self.short_links) == self.n_states * c.shortslots_per_state)

    def links(self):
        """Yield (slot_kind, slot_index, i, j, link_type, weight) in slot order."""
        m = self.clock.shorts_per_long
        for n, longs in enumerate(self.long_links, start=1):
            for i, j, lt, w in longs:
                yield "long", n, i, j, lt, w
            for k in range(m * (n - 1) + 1, m * n + 1):
                if k - 1 < len(self.short_links):
                    for i, j, w in self.short_links[k - 1]:
                        yield "short", k, i, j, LinkType.GNSS_GNSS, w


def _telemetry_reset(i: int, j: int, state: ScheduleState, long_stage: bool) -> None:
    anchors = state.anchors
    cls = state.classes
    for a, b in ((i, j), (j, i)):
        if cls[a] is USER or cls[b] is USER:
            continue
        if a not in anchors and b in anchors:
            state.D[a] = 0
            if long_stage and cls[a] is GNSS:
                state.offloading.add(a)


def _ranging_update(i: int, j: int, slot: int, state: ScheduleState, update_always: bool) -> bool:
    interval = ranging_interval(state.classes[i], state.classes[j], state.params)
    if slot - state.last(i, j) > interval:
        state.ranging_got[i] += 1
        state.ranging_got[j] += 1
        state.set_last(i, j, slot)
        return True
    if update_always:
        state.set_last(i, j, slot)
    return False


def postprocess_long(m: Matching, n: int, state: ScheduleState, update_always: bool = False) -> set:
    """Apply LongSlot link effects; returns the GNSS satellites now busy."""
    cls = state.classes
    busy = set()
    for i, j in m.pairs:
        ci, cj = cls[i], cls[j]
        if ci is USER or cj is USER:
            u, s = (i, j) if ci is USER else (j, i)
            state.user_got[u] += 1
            state.set_last(u, s, n)
        else:
            _telemetry_reset(i, j, state, True)
            _ranging_update(i, j, n, state, update_always)
        if ci is GNSS:
            busy.add(i)
        if cj is GNSS:
            busy.add(j)
    return busy


def postprocess_short(m: Matching, k: int, state: ScheduleState, update_always: bool = False) -> None:
    for i, j in m.pairs:
        _telemetry_reset(i, j, state, False)
        _ranging_update(i, j, k, state, update_always)


def long_slot_cpd(n: int, state: ScheduleState, g: ContactGraph, params=None, *,
                  update_always: bool = False, validate: bool = True, weight_fn=None):
    """LongSlot CPD at global LongSlot ``n``.

    Returns ``(matching, state, busy_gnss, weights)``; ``weights`` maps each
    positive candidate pair to the weight handed to the matcher.
    """
    p = params or state.params
    if weight_fn is None:
        dbar = {i: mean_neighbor_telemetry(i, state, g)
                for i in g.anchors if state.classes[i] is GNSS}
        cls = state.classes
        ugot, demand = state.user_got, state.demand
        edges = []
        for i, j in g.long_edges:
            # users with demand met carry zero user potential: weight <= 0
            if cls[j] is USER and ugot[j] >= demand.get(j, 0):
                continue
            w = edge_weight_long(i, j, n, state, g, p, dbar)
            if w > 0:
                edges.append((i, j, w))
    else:
        edges = weight_fn(g.long_edges)
    m = max_weight_matching(edges)
    if validate:
        _validate(m, edges)
    weights = {(a, b): w for a, b, w in edges}
    busy = postprocess_long(m, n, state, update_always)
    return m, state, busy, weights


def short_slot_cpd(k: int, state: ScheduleState, g: ContactGraph, busy_gnss, params=None, *,
                   update_always: bool = False, validate: bool = True, weight_fn=None):
    """ShortSlot CPD at global ShortSlot ``k`` over GNSS satellites not in ``busy_gnss``."""
    p = params or state.params
    cand = [(i, j) for i, j in g.short_edges if i not in busy_gnss and j not in busy_gnss]
    if weight_fn is None:
        edges = []
        for i, j in cand:
            w = edge_weight_short(i, j, k, state, p)
            if w > 0:
                edges.append((i, j, w))
    else:
        edges = weight_fn(cand)
    m = max_weight_matching(edges)
    if validate:
        _validate(m, edges)
        if m.nodes() & set(busy_gnss):
            raise ScheduleViolation("busy GNSS satellite matched in a ShortSlot")
    weights = {(a, b): w for a, b, w in edges}
    postprocess_short(m, k, state, update_always)
    return m, state, weights


def _validate(m: Matching, edges) -> None:
    try:
        check_matching(m, edges)
    except AssertionError as exc:
        raise ScheduleViolation(str(exc)) from None


class _FairnessWeights:
    """Per-state link counters for the FCP baseline."""

    def __init__(self, size: int):
        self.counts = [0] * size

    def reset(self) -> None:
        for i in range(len(self.counts)):
            self.counts[i] = 0

    def weigh(self, pairs):
        c = self.counts
        return [(i, j, fcp_weight(i, j, c)) for i, j in pairs]

    def record(self, m: Matching) -> None:
        for i, j in m.pairs:
            self.counts[i] += 1
            self.counts[j] += 1


def _run(scenario, fair: bool) -> ContactPlan:
    t0 = time.perf_counter()
    clock = scenario.clock
    classes = scenario.classes
    state = ScheduleState(classes=list(classes), params=scenario.params, demand=dict(scenario.demand))
    plan = ContactPlan(nodes=list(scenario.nodes), classes=list(classes), clock=clock,
                       n_states=scenario.n_states, algorithm="fcp" if fair else "jcpd",
                       group="fcp" if fair else scenario.group, scenario_hash=scenario.scenario_hash,
                       seed=scenario.seed)
    upd = scenario.update_m_on_noneffective
    val = scenario.validate
    fairness = _FairnessWeights(len(classes)) if fair else None
    users = [i for i, c in enumerate(classes) if c is USER]

    for s in range(scenario.n_states):
        g = scenario.contact_graph(s)
        state.start_state(s, g.anchors)
        plan.anchors.append(g.anchors)
        if fair:
            fairness.reset()
            served = set(u for u in users if state.user_got[u] >= state.demand.get(u, 0))
        for n_local in range(1, clock.longslots_per_state + 1):
            n = clock.global_long(s, n_local)
            state.n = n
            state.offloading.clear()
            accrue_telemetry(state, "long")
            if fair:
                def long_w(pairs):
                    return fairness.weigh([(i, j) for i, j in pairs if i not in served and j not in served])
                m, _, busy, weights = long_slot_cpd(n, state, g, update_always=upd, validate=val,
                                                    weight_fn=long_w)
                fairness.record(m)
                served.update(u for u in m.nodes() if classes[u] is USER
                              and state.user_got[u] >= state.demand.get(u, 0))
            else:
                m, _, busy, weights = long_slot_cpd(n, state, g, update_always=upd, validate=val)
            plan.long_links.append([(i, j, link_type(classes[i], classes[j]), weights[(i, j)])
                                    for i, j in m.pairs])
            for k_local in clock.short_range(n_local):
                k = clock.global_short(s, k_local)
                state.k = k
                accrue_telemetry(state, "short")
                if fair:
                    ms, _, sw = short_slot_cpd(k, state, g, busy, update_always=upd, validate=val,
                                               weight_fn=fairness.weigh)
                    fairness.record(ms)
                else:
                    ms, _, sw = short_slot_cpd(k, state, g, busy, update_always=upd, validate=val)
                plan.short_links.append([(i, j, sw[(i, j)]) for i, j in ms.pairs])
            if val:
                for a in state.anchors:
                    if state.D[a] != 0:
                        raise ScheduleViolation(f"anchor {scenario.nodes[a]} holds telemetry")
        plan.ranging_got.append(tuple(state.ranging_got))
        plan.user_got.append(tuple(state.user_got))
        if val and not fair:
            for u in users:
                if state.user_got[u] > state.demand.get(u, 0):
                    raise ScheduleViolation(f"user {scenario.nodes[u]} served beyond demand")
        if s % 40 == 39:
            log.info("%s: state %d/%d", plan.algorithm, s + 1, scenario.n_states)
    plan.runtime_s = time.perf_counter() - t0
    return plan


def run_jcpd(scenario) -> ContactPlan:
    return _run(scenario, fair=False)


def run_fcp(scenario) -> ContactPlan:
    return _run(scenario, fair=True)


def run(scenario) -> ContactPlan:
    if scenario.algorithm == "fcp":
        return run_fcp(scenario)
    return run_jcpd(scenario)


def check_plan_invariants(plan: ContactPlan, demand: dict | None = None) -> list[str]:
    """Recheck terminal, cross-level and user-cap constraints on a finished plan."""
    problems = []
    clock = plan.clock
    cls = plan.classes
    m = clock.shorts_per_long
    for n, longs in enumerate(plan.long_links, start=1):
        seen = set()
        for i, j, lt, _w in longs:
            if lt is LinkType.GNSS_GNSS:
                problems.append(f"LongSlot {n}: GNSS-GNSS link {i}-{j}")
            if link_type(cls[i], cls[j]) is not lt:
                problems.append(f"LongSlot {n}: mislabelled link {i}-{j}")
            for x in (i, j):
                if x in seen:
                    problems.append(f"LongSlot {n}: node {x} used twice")
                seen.add(x)
        busy = {x for x in seen if cls[x] is GNSS}
        for k in range(m * (n - 1) + 1, m * n + 1):
            if k - 1 >= len(plan.short_links):
                break
            sseen = set()
            for i, j, _w in plan.short_links[k - 1]:
                if cls[i] is not GNSS or cls[j] is not GNSS:
                    problems.append(f"ShortSlot {k}: non-GNSS link {i}-{j}")
                for x in (i, j):
                    if x in sseen:
                        problems.append(f"ShortSlot {k}: node {x} used twice")
                    if x in busy:
                        problems.append(f"ShortSlot {k}: GNSS {x} busy in LongSlot {n}")
                    sseen.add(x)
    if demand is not None:
        per_state = clock.longslots_per_state
        for s in range(len(plan.anchors)):
            delivered: dict = {}
            for longs in plan.long_links[s * per_state:(s + 1) * per_state]:
                for i, j, _lt, _w in longs:
                    for x in (i, j):
                        if cls[x] is USER:
                            delivered[x] = delivered.get(x, 0) + 1
            for u, c in delivered.items():
                if c > demand.get(u, 0):
                    problems.append(f"state {s}: user {u} got {c} > {demand.get(u, 0)}")
    return problems
