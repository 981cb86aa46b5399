"""Potential-energy edge weights.

Four potentials drive link selection: communication (telemetry waiting to
reach an anchor), ranging (time since a pair last ranged), user service, and
the exclusion a GNSS satellite exerts against LongSlot links that would take
its only terminal away from the GNSS network.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, replace

from .visibility import ContactGraph, NodeClass

GNSS, LP, USER = NodeClass.GNSS, NodeClass.LP, NodeClass.USER


@dataclass(frozen=True)
class PotentialParams:
    # communication constants and virtual heights (non-anchor -> anchor)
    C_c_S: float = 200.0
    C_c_L: float = 100.0
    h_SL: float = 2.0
    h_SS: float = 7.0
    h_LS: float = 5.0
    h_LL: float = 5.0
    # ranging
    C_r_S: float = 15.0
    C_r_L: float = 20.0
    B_r_S: float = 800.0
    B_r_L: float = 500.0
    N_S: int = 60
    N_L: int = 5
    I_S: int = 19  # ShortSlots
    I_L: int = 20  # LongSlots
    # user service
    C_U: float = 10.0
    B_U: float = 300.0
    I_U: int = 20  # LongSlots
    # exclusion (GNSS -> LP / user)
    C_e_L: float = 120.0
    C_e_U: float = 150.0
    B_e_L: float = 200.0
    B_e_U: float = 100.0

    def __post_init__(self):
        for name in ("I_S", "I_L", "I_U"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in ("N_S", "N_L"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


PRESETS = {
    "group1": PotentialParams(),
    "group2": PotentialParams(C_e_L=170.0, B_e_L=500.0),
    "group3": PotentialParams(C_e_L=170.0, B_e_L=500.0, C_U=100.0),
}


def preset(name: str, **overrides) -> PotentialParams:
    try:
        base = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown parameter group {name!r}; known presets: {', '.join(sorted(PRESETS))}") from None
    return replace(base, **overrides) if overrides else base


@dataclass
class ScheduleState:
    """Mutable scheduler bookkeeping, indexed by roster position."""

    classes: list
    params: PotentialParams
    demand: dict = field(default_factory=dict)  # user index -> L_u
    D: list = None
    ranging_got: list = None
    user_got: list = None
    last_contact: dict = field(default_factory=dict)  # (i, j), i < j -> slot index
    anchors: frozenset = frozenset()
    offloading: set = field(default_factory=set)  # GNSS holding an anchor-LP link this LongSlot
    state: int = 0
    n: int = 0  # global LongSlot index (1-based)
    k: int = 0  # global ShortSlot index (1-based)

    def __post_init__(self):
        size = len(self.classes)
        if self.D is None:
            self.D = [0] * size
        if self.ranging_got is None:
            self.ranging_got = [0] * size
        if self.user_got is None:
            self.user_got = [0] * size

    def last(self, i: int, j: int) -> int:
        key = (i, j) if i < j else (j, i)
        m = self.last_contact.get(key)
        if m is not None:
            return m
        return initial_last_contact(self.classes[i], self.classes[j], self.params)

    def set_last(self, i: int, j: int, slot: int) -> None:
        self.last_contact[(i, j) if i < j else (j, i)] = slot

    def start_state(self, state: int, anchors) -> None:
        self.state = state
        self.anchors = frozenset(anchors)
        for i in range(len(self.classes)):
            self.ranging_got[i] = 0
            self.user_got[i] = 0
        for i in self.anchors:
            self.D[i] = 0


def initial_last_contact(ci: NodeClass, cj: NodeClass, p: PotentialParams) -> int:
    if USER in (ci, cj):
        return -p.I_U
    if ci is GNSS and cj is GNSS:
        return -p.I_S
    return -p.I_L


def ranging_interval(ci: NodeClass, cj: NodeClass, p: PotentialParams) -> int:
    return p.I_S if (ci is GNSS and cj is GNSS) else p.I_L


def accrue_telemetry(state: ScheduleState, slot_kind: str) -> ScheduleState:
    """One telemetry unit per slot: LP satellites on LongSlots, GNSS on ShortSlots."""
    cls = GNSS if slot_kind == "short" else LP
    if slot_kind not in ("short", "long"):
        raise ValueError(slot_kind)
    anchors = state.anchors
    D = state.D
    for i, c in enumerate(state.classes):
        if c is cls:
            if i in anchors or i in state.offloading:
                D[i] = 0
            else:
                D[i] += 1
    return state


def comm_potential(i: int, j: int, state: ScheduleState, p: PotentialParams) -> float:
    if i in state.anchors or j not in state.anchors:
        return 0.0
    ci, cj = state.classes[i], state.classes[j]
    if ci is GNSS:
        c = p.C_c_S
        h = p.h_SS if cj is GNSS else p.h_SL
    elif ci is LP:
        c = p.C_c_L
        h = p.h_LS if cj is GNSS else p.h_LL
    else:
        return 0.0
    return c * state.D[i] * h


def ranging_potential(i: int, j: int, n: int, state: ScheduleState, p: PotentialParams) -> float:
    ci = state.classes[i]
    if ci is GNSS:
        c, b, target = p.C_r_S, p.B_r_S, p.N_S
    else:
        c, b, target = p.C_r_L, p.B_r_L, p.N_L
    interval = ranging_interval(ci, state.classes[j], p)
    got = state.ranging_got[i]
    gap = n - state.last(i, j)
    if gap > interval and got < target:
        return c * (target - got) * (gap - interval) + b
    return 0.0


def user_potential(u: int, j: int, n: int, state: ScheduleState, p: PotentialParams) -> float:
    want = state.demand.get(u, 0)
    got = state.user_got[u]
    gap = n - state.last(u, j)
    if gap > p.I_U and got < want:
        return p.C_U * (want - got) * (gap - p.I_U) + p.B_U
    return 0.0


def mean_neighbor_telemetry(i: int, state: ScheduleState, graph: ContactGraph) -> float:
    vals = [state.D[j] for j in graph.gnss_neighbors.get(i, ()) if j not in state.anchors]
    return sum(vals) / len(vals) if vals else 0.0


def exclusion_potential(i: int, j: int, n: int, state: ScheduleState, graph: ContactGraph,
                        p: PotentialParams, dbar: float | None = None) -> float:
    """Penalty GNSS satellite ``i`` puts on a LongSlot link to LP/user ``j``.

    Anchors use the mean telemetry of their visible non-anchor GNSS
    neighbours in place of their own (always zero) load.
    """
    if state.classes[j] is LP:
        c, b = p.C_e_L, p.B_e_L
    else:
        c, b = p.C_e_U, p.B_e_U
    if i in state.anchors:
        load = mean_neighbor_telemetry(i, state, graph) if dbar is None else dbar
    else:
        load = state.D[i]
    v = c * (load + p.N_S - state.ranging_got[i]) + b
    return v if v > 0 else 0.0


class WrongGraph(ValueError):
    pass


def edge_weight_long(i: int, j: int, n: int, state: ScheduleState, graph: ContactGraph,
                     p: PotentialParams, dbar: dict | None = None) -> float:
    ci, cj = state.classes[i], state.classes[j]
    if ci is GNSS and cj is GNSS:
        raise WrongGraph("GNSS-GNSS edges belong to the ShortSlot graph")
    if cj is GNSS or (cj is LP and ci is USER):
        i, j, ci, cj = j, i, cj, ci
    # now ci in {GNSS, LP}; GNSS always first when present
    if cj is USER:
        eu = user_potential(j, i, n, state, p)
        if ci is LP:
            return eu
        d = None if dbar is None else dbar.get(i)
        return eu - exclusion_potential(i, j, n, state, graph, p, d)
    w = (comm_potential(i, j, state, p) + comm_potential(j, i, state, p)
         + ranging_potential(i, j, n, state, p) + ranging_potential(j, i, n, state, p))
    if ci is GNSS:
        d = None if dbar is None else dbar.get(i)
        w -= exclusion_potential(i, j, n, state, graph, p, d)
    return w


def edge_weight_short(i: int, j: int, k: int, state: ScheduleState, p: PotentialParams) -> float:
    cls = state.classes
    if cls[i] is not GNSS or cls[j] is not GNSS:
        return (comm_potential(i, j, state, p) + comm_potential(j, i, state, p)
                + ranging_potential(i, j, k, state, p) + ranging_potential(j, i, k, state, p))
    # same sum as above, unrolled for the hot GNSS-GNSS case
    w = 0.0
    anchors = state.anchors
    ai, aj = i in anchors, j in anchors
    if aj and not ai:
        w += p.C_c_S * state.D[i] * p.h_SS
    elif ai and not aj:
        w += p.C_c_S * state.D[j] * p.h_SS
    m = state.last_contact.get((i, j) if i < j else (j, i))
    excess = k - (-p.I_S if m is None else m) - p.I_S
    if excess > 0:
        got = state.ranging_got
        for g in (got[i], got[j]):
            if g < p.N_S:
                w += p.C_r_S * (p.N_S - g) * excess + p.B_r_S
    return w


def fcp_weight(i: int, j: int, link_counts: list) -> float:
    """Fairness weight for the baseline: favours nodes with fewer links so far."""
    return 1.0 / (1 + link_counts[i]) + 1.0 / (1 + link_counts[j])
