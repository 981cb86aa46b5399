"""Evaluation metrics computed from a finished ContactPlan.

Everything here is a pure function of (plan, scenario). Ranging counts are
recomputed by replaying the interval rule over the plan's links, which gives
a second code path next to the scheduler's own counters.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .potentials import GNSS, LP, USER, PotentialParams
from .visibility import LinkType


class IncompletePlan(ValueError):
    pass


LINK_CATEGORIES = (LinkType.LP_USER, LinkType.GNSS_USER, LinkType.LP_LP, LinkType.GNSS_GNSS, LinkType.LP_GNSS)


@dataclass
class DelayReport:
    mean_gnss_slots: float  # ShortSlots
    mean_lp_slots: float  # LongSlots
    mean_gnss_s: float
    mean_lp_s: float
    anchor_delay: float  # always 0; kept so the property is visible in output
    samples_gnss: int
    samples_lp: int
    censored_gnss: int  # waits cut off at the horizon
    censored_lp: int
    per_node: dict = field(default_factory=dict)  # node index -> mean wait in native slots


@dataclass
class RangingReport:
    mean_gnss_per_state: float
    mean_lp_per_state: float
    per_state: list  # per state: tuple of effective counts per node
    matches_scheduler: bool


@dataclass
class MetricsReport:
    mean_delay_nonanchor_gnss: float
    mean_delay_nonanchor_gnss_s: float
    mean_delay_nonanchor_lp: float
    mean_delay_nonanchor_lp_s: float
    delay_censored: int
    mean_ranging_links_per_gnss_per_state: float
    mean_ranging_links_per_lp_per_state: float
    ranging_replay_matches: bool
    user_satisfaction_ratio: float | None  # None when there are no users
    link_type_counts: dict  # LinkType value -> per-state mean
    runtime_s: float = 0.0

    def as_rows(self) -> list[tuple[str, object]]:
        """Flat (metric, value) pairs; runtime is left out so reports stay reproducible."""
        rows = []
        for k, v in asdict(self).items():
            if k == "runtime_s":
                continue
            if k == "link_type_counts":
                rows.extend((f"links_per_state.{lt}", c) for lt, c in v.items())
            else:
                rows.append((k, v))
        return rows


def _require_complete(plan) -> None:
    if not plan.complete:
        raise IncompletePlan(
            f"plan covers {len(plan.long_links)} LongSlots / {len(plan.short_links)} ShortSlots, "
            f"expected {plan.n_states} full FSA states")


def _forward_wait(hit: np.ndarray, excluded: np.ndarray):
    """Per-slot distance to the next True in ``hit`` (inclusive).

    Returns (waits over slots not in ``excluded``, number censored at the end).
    """
    n = len(hit)
    nxt = np.empty(n, dtype=np.int64)
    upcoming = -1
    for s in range(n - 1, -1, -1):
        if hit[s]:
            upcoming = s
        nxt[s] = upcoming
    idx = np.arange(n)
    censored = nxt < 0
    wait = np.where(censored, n - idx, nxt - idx)
    keep = ~excluded
    return wait[keep], int(np.count_nonzero(censored & keep))


def delay_report(plan) -> DelayReport:
    """Mean forward wait, in native slots, until a non-anchor satellite reaches an anchor."""
    _require_complete(plan)
    clock = plan.clock
    cls = plan.classes
    m = clock.shorts_per_long
    n_long = len(plan.long_links)
    n_short = len(plan.short_links)
    per_state_long = clock.longslots_per_state
    per_state_short = clock.shortslots_per_state

    def anchor_mask(i, per_state, total):
        out = np.zeros(total, dtype=bool)
        for s, anchors in enumerate(plan.anchors):
            if i in anchors:
                out[s * per_state:(s + 1) * per_state] = True
        return out

    def state_of_long(n):  # n is 1-based
        return (n - 1) // per_state_long

    gnss = [i for i, c in enumerate(cls) if c is GNSS]
    lp = [i for i, c in enumerate(cls) if c is LP]
    hit_short = {i: np.zeros(n_short, dtype=bool) for i in gnss}
    hit_long = {i: np.zeros(n_long, dtype=bool) for i in lp}

    for n, longs in enumerate(plan.long_links, start=1):
        anchors = plan.anchors[state_of_long(n)]
        for i, j, _lt, _w in longs:
            for a, b in ((i, j), (j, i)):
                if b not in anchors or cls[b] is USER:
                    continue
                if cls[a] is LP:
                    hit_long[a][n - 1] = True
                elif cls[a] is GNSS:
                    # an anchor LP carries the data down for the whole LongSlot
                    hit_short[a][m * (n - 1):m * n] = True
    for k, shorts in enumerate(plan.short_links, start=1):
        anchors = plan.anchors[(k - 1) // per_state_short]
        for i, j, _w in shorts:
            if j in anchors:
                hit_short[i][k - 1] = True
            if i in anchors:
                hit_short[j][k - 1] = True

    out = {}
    res = []
    for nodes, hits, per_state, total in ((gnss, hit_short, per_state_short, n_short),
                                          (lp, hit_long, per_state_long, n_long)):
        waits, censored = [], 0
        for i in nodes:
            own = anchor_mask(i, per_state, total)
            # a satellite that is itself an anchor hands its data down directly
            w, c = _forward_wait(hits[i] | own, own)
            censored += c
            if len(w):
                waits.append(w)
                out[i] = float(w.mean())
            else:
                out[i] = 0.0
        allw = np.concatenate(waits) if waits else np.zeros(0)
        res.append((float(allw.mean()) if len(allw) else 0.0, len(allw), censored))
    (g_mean, g_n, g_c), (l_mean, l_n, l_c) = res
    return DelayReport(mean_gnss_slots=g_mean, mean_lp_slots=l_mean,
                       mean_gnss_s=g_mean * clock.short_slot_len_s, mean_lp_s=l_mean * clock.long_slot_len_s,
                       anchor_delay=0.0, samples_gnss=g_n, samples_lp=l_n,
                       censored_gnss=g_c, censored_lp=l_c, per_node=out)


def replay_effective_ranging(plan, params: PotentialParams, update_always: bool = False) -> list[tuple]:
    """Effective ranging links per node per state, replayed from the plan's links."""
    _require_complete(plan)
    cls = plan.classes
    size = len(cls)
    m = plan.clock.shorts_per_long
    per_state = plan.clock.longslots_per_state
    last: dict = {}
    out = []
    counts = [0] * size

    def visit(i, j, slot, interval):
        key = (i, j) if i < j else (j, i)
        prev = last.get(key, -interval)
        if slot - prev > interval:
            counts[i] += 1
            counts[j] += 1
            last[key] = slot
        elif update_always:
            last[key] = slot

    for n, longs in enumerate(plan.long_links, start=1):
        for i, j, _lt, _w in longs:
            if cls[i] is not USER and cls[j] is not USER:
                visit(i, j, n, params.I_L)
        for k in range(m * (n - 1) + 1, m * n + 1):
            for i, j, _w in plan.short_links[k - 1]:
                visit(i, j, k, params.I_S)
        if n % per_state == 0:
            out.append(tuple(counts))
            counts = [0] * size
    return out


def ranging_report(plan, scenario) -> RangingReport:
    per_state = replay_effective_ranging(plan, scenario.params, scenario.update_m_on_noneffective)
    cls = plan.classes
    arr = np.array(per_state, dtype=float).reshape(len(per_state), len(cls))
    gnss = [i for i, c in enumerate(cls) if c is GNSS]
    lp = [i for i, c in enumerate(cls) if c is LP]
    g = float(arr[:, gnss].mean()) if gnss and len(arr) else 0.0
    lpm = float(arr[:, lp].mean()) if lp and len(arr) else 0.0
    return RangingReport(g, lpm, per_state, matches_scheduler=[tuple(x) for x in plan.ranging_got] == per_state)


def satisfaction_report(plan, scenario) -> float | None:
    """Mean over users and states of min(delivered, L_u) / L_u; None without users."""
    _require_complete(plan)
    per_state = plan.clock.longslots_per_state
    demand = {u: L for u, L in scenario.demand.items() if L > 0}
    if not demand:
        return None
    ratios = []
    for s in range(plan.n_states):
        got = dict.fromkeys(demand, 0)
        for longs in plan.long_links[s * per_state:(s + 1) * per_state]:
            for i, j, _lt, _w in longs:
                for x in (i, j):
                    if x in got:
                        got[x] += 1
        ratios.extend(min(got[u], L) / L for u, L in demand.items())
    return float(np.mean(ratios))


def link_composition_report(plan) -> dict:
    """Per-state mean link count in each of the five link categories."""
    _require_complete(plan)
    totals = dict.fromkeys(LINK_CATEGORIES, 0)
    for _kind, _slot, _i, _j, lt, _w in plan.links():
        totals[lt] += 1
    n = max(plan.n_states, 1)
    return {lt.value: totals[lt] / n for lt in LINK_CATEGORIES}


def compute_metrics(plan, scenario) -> MetricsReport:
    d = delay_report(plan)
    r = ranging_report(plan, scenario)
    return MetricsReport(
        mean_delay_nonanchor_gnss=d.mean_gnss_slots,
        mean_delay_nonanchor_gnss_s=d.mean_gnss_s,
        mean_delay_nonanchor_lp=d.mean_lp_slots,
        mean_delay_nonanchor_lp_s=d.mean_lp_s,
        delay_censored=d.censored_gnss + d.censored_lp,
        mean_ranging_links_per_gnss_per_state=r.mean_gnss_per_state,
        mean_ranging_links_per_lp_per_state=r.mean_lp_per_state,
        ranging_replay_matches=r.matches_scheduler,
        user_satisfaction_ratio=satisfaction_report(plan, scenario),
        link_type_counts=link_composition_report(plan),
        runtime_s=plan.runtime_s,
    )
