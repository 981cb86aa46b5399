"""Contact graphs per FSA state.

A pair of nodes is in contact for a state when it keeps line of sight
(Earth and Moon spheres) and mutual pointing-cone coverage at every sample
of the state. Anchors are satellites that see some ground station at every
sample.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .ephemeris import EARTH_RADIUS_KM, MOON_RADIUS_KM

COINCIDENT_KM = 1.0


class NodeClass(str, enum.Enum):
    GNSS = "gnss"
    LP = "lp"
    USER = "user"
    GS = "gs"


class LinkType(str, enum.Enum):
    LP_USER = "lp-user"
    GNSS_USER = "gnss-user"
    LP_LP = "lp-lp"
    GNSS_GNSS = "gnss-gnss"
    LP_GNSS = "lp-gnss"

    @property
    def switching_unit(self) -> str:
        return "short" if self is LinkType.GNSS_GNSS else "long"


def link_type(a: NodeClass, b: NodeClass) -> LinkType | None:
    """Table of permitted link classes; None for pairs that never link."""
    pair = {a, b}
    if NodeClass.GS in pair or pair == {NodeClass.USER}:
        return None
    if pair == {NodeClass.GNSS}:
        return LinkType.GNSS_GNSS
    if pair == {NodeClass.LP}:
        return LinkType.LP_LP
    if pair == {NodeClass.LP, NodeClass.GNSS}:
        return LinkType.LP_GNSS
    if pair == {NodeClass.LP, NodeClass.USER}:
        return LinkType.LP_USER
    return LinkType.GNSS_USER


@dataclass(frozen=True)
class PointingSpec:
    half_cone_deg: float
    boresight: str = "earth"  # "earth" (towards Earth centre) or "zenith"

    def __post_init__(self):
        if self.boresight not in ("earth", "zenith"):
            raise ValueError(f"unknown boresight {self.boresight!r}")
        limit = 90.0 if self.boresight == "zenith" else 180.0
        if not 0.0 < self.half_cone_deg <= limit:
            raise ValueError(f"half cone must lie in (0, {limit}] for {self.boresight}")


@dataclass(frozen=True)
class SlotClock:
    fsa_state_len_s: float = 360.0
    long_slot_len_s: float = 9.0
    short_slot_len_s: float = 3.0

    def __post_init__(self):
        for name in ("fsa_state_len_s", "long_slot_len_s", "short_slot_len_s"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not _is_multiple(self.long_slot_len_s, self.short_slot_len_s):
            raise ValueError("LongSlot not a multiple of ShortSlot")
        if not _is_multiple(self.fsa_state_len_s, self.long_slot_len_s):
            raise ValueError("FSA state not a multiple of LongSlot")

    @property
    def shorts_per_long(self) -> int:
        return round(self.long_slot_len_s / self.short_slot_len_s)

    @property
    def longslots_per_state(self) -> int:
        return round(self.fsa_state_len_s / self.long_slot_len_s)

    @property
    def shortslots_per_state(self) -> int:
        return self.longslots_per_state * self.shorts_per_long

    def short_range(self, n: int) -> range:
        """ShortSlots k = M*n-(M-1) .. M*n nested in LongSlot n (1-based)."""
        m = self.shorts_per_long
        return range(m * n - (m - 1), m * n + 1)

    def global_long(self, state: int, n: int) -> int:
        return state * self.longslots_per_state + n

    def global_short(self, state: int, k: int) -> int:
        return state * self.shortslots_per_state + k

    def long_of_short(self, k_global: int) -> int:
        return (k_global - 1) // self.shorts_per_long + 1

    def state_of_long(self, n_global: int) -> int:
        return (n_global - 1) // self.longslots_per_state

    def state_start_s(self, state: int) -> float:
        return state * self.fsa_state_len_s

    def n_states(self, horizon_s: float) -> int:
        if not _is_multiple(horizon_s, self.fsa_state_len_s):
            raise ValueError("horizon is not a whole number of FSA states")
        return round(horizon_s / self.fsa_state_len_s)


def _is_multiple(a: float, b: float) -> bool:
    q = a / b
    return abs(q - round(q)) < 1e-9 and round(q) >= 1


@dataclass(frozen=True)
class ContactGraph:
    state_index: int
    nodes: tuple  # node ids, indexed by position
    classes: tuple  # NodeClass per node
    edges: dict  # (i, j) with i < j -> LinkType
    anchors: frozenset = frozenset()

    def __post_init__(self):
        for (i, j), lt in self.edges.items():
            if i >= j:
                raise ValueError(f"edge ({i}, {j}) must be ordered and loop-free")
            if lt is not link_type(self.classes[i], self.classes[j]):
                raise ValueError(f"edge {self.nodes[i]}-{self.nodes[j]} mislabelled {lt}")

    @property
    def anchor_flags(self) -> dict:
        return {nd: (i in self.anchors) for i, nd in enumerate(self.nodes)
                if self.classes[i] in (NodeClass.GNSS, NodeClass.LP)}

    @cached_property
    def gnss_neighbors(self) -> dict:
        out: dict = {}
        for (i, j), lt in self.edges.items():
            if lt is LinkType.GNSS_GNSS:
                out.setdefault(i, []).append(j)
                out.setdefault(j, []).append(i)
        return out

    @cached_property
    def long_edges(self) -> list:
        return sorted(e for e, lt in self.edges.items() if lt is not LinkType.GNSS_GNSS)

    @cached_property
    def short_edges(self) -> list:
        return sorted(e for e, lt in self.edges.items() if lt is LinkType.GNSS_GNSS)


def long_graph(g: ContactGraph) -> ContactGraph:
    """Drop intra-GNSS edges; what remains is scheduled per LongSlot."""
    edges = {e: g.edges[e] for e in g.long_edges}
    return ContactGraph(g.state_index, g.nodes, g.classes, edges, g.anchors)


def short_graph(g: ContactGraph, busy_gnss=frozenset()) -> ContactGraph:
    """Intra-GNSS edges only, minus any edge touching a busy satellite."""
    busy = set(busy_gnss)
    edges = {(i, j): g.edges[(i, j)] for i, j in g.short_edges if i not in busy and j not in busy}
    return ContactGraph(g.state_index, g.nodes, g.classes, edges, g.anchors)


# --- geometry ---------------------------------------------------------------

def line_of_sight(p1, p2, occluders) -> bool:
    """True iff segment p1-p2 stays strictly outside every (centre, radius) sphere."""
    p1 = np.asarray(p1, float)
    p2 = np.asarray(p2, float)
    return bool(np.all(_los(p1, p2, [(np.asarray(c, float), r) for c, r in occluders])))


def _los(p1, p2, occluders):
    d = p2 - p1
    dd = np.einsum("...k,...k->...", d, d)
    ok = np.ones(np.broadcast(dd).shape, dtype=bool)
    safe = np.where(dd > 0, dd, 1.0)
    for c, r in occluders:
        s = np.einsum("...k,...k->...", c - p1, d) / safe
        s = np.clip(s, 0.0, 1.0)
        closest = p1 + s[..., None] * d
        diff = c - closest
        ok &= np.einsum("...k,...k->...", diff, diff) > r * r
    return ok


def within_pointing(observer_pos, spec: PointingSpec | None, target_pos, earth_center=(0.0, 0.0, 0.0)) -> bool:
    """True iff target lies inside the observer's cone. ``spec=None`` means omnidirectional."""
    return bool(_pointing(np.asarray(observer_pos, float), spec, np.asarray(target_pos, float),
                          np.asarray(earth_center, float)))


def _pointing(obs, spec, tgt, earth):
    if spec is None:
        return np.ones(np.broadcast(obs[..., 0], tgt[..., 0]).shape, dtype=bool)
    bore = earth - obs if spec.boresight == "earth" else obs - earth
    dirv = tgt - obs
    nb = np.linalg.norm(bore, axis=-1)
    nd = np.linalg.norm(dirv, axis=-1)
    denom = np.where(nb * nd > 0, nb * nd, 1.0)
    cosang = np.einsum("...k,...k->...", bore, dirv) / denom
    return cosang >= math.cos(math.radians(spec.half_cone_deg)) - 1e-12


@dataclass
class VisibilityOptions:
    sample_step_s: float | None = None  # default: one ShortSlot
    earth_margin_km: float = 0.0
    moon_occlusion: bool = True


@dataclass
class VisibilityModel:
    """Evaluates pair visibility and per-state contact graphs for a roster."""

    nodes: list  # ids of satellites and users
    classes: list
    pointing: list  # PointingSpec | None per node
    gs_ids: list
    gs_pointing: list
    ephemeris: object
    clock: SlotClock
    options: VisibilityOptions = field(default_factory=VisibilityOptions)

    def __post_init__(self):
        self._index = {nd: i for i, nd in enumerate(self.nodes)}
        self._gs_index = {nd: i for i, nd in enumerate(self.gs_ids)}

    def _occluders(self, t, include_earth=True):
        occ = []
        if include_earth:
            occ.append((np.zeros(3), EARTH_RADIUS_KM + self.options.earth_margin_km))
        if self.options.moon_occlusion:
            from .ephemeris import moon_position
            occ.append((moon_position(self.ephemeris.frame, t), MOON_RADIUS_KM))
        return occ

    def pair_visible(self, a: str, b: str, t: float) -> bool:
        ga, gb = a in self._gs_index, b in self._gs_index
        if ga and gb:
            raise ValueError("ground stations never link to each other")
        if a == b:
            raise ValueError("pair_visible needs two distinct nodes")
        pa = self.ephemeris.node_position(a, t)
        pb = self.ephemeris.node_position(b, t)
        sa = self.gs_pointing[self._gs_index[a]] if ga else self.pointing[self._index[a]]
        sb = self.gs_pointing[self._gs_index[b]] if gb else self.pointing[self._index[b]]
        if np.linalg.norm(pa - pb) < COINCIDENT_KM:
            return False
        # a station's zenith cone (<= 90 deg) already keeps the ray above its horizon
        occ = self._occluders(t, include_earth=not (ga or gb))
        return (line_of_sight(pa, pb, occ)
                and within_pointing(pa, sa, pb) and within_pointing(pb, sb, pa))

    def sample_times(self, state: int) -> np.ndarray:
        step = self.options.sample_step_s or self.clock.short_slot_len_s
        t0 = self.clock.state_start_s(state)
        count = int(round(self.clock.fsa_state_len_s / step))
        return t0 + step * np.arange(count + 1)

    def visibility_matrix(self, t: float, pos=None, gpos=None):
        """(N, N) satellite/user mutual visibility and (N, G) station visibility at t."""
        if pos is None:
            pos = self.ephemeris.positions(self.nodes, [t])[0]
        if gpos is None:
            gpos = self.ephemeris.positions(self.gs_ids, [t])[0] if self.gs_ids else np.zeros((0, 3))
        n = len(self.nodes)
        p1 = pos[:, None, :]
        p2 = pos[None, :, :]
        vis = _los(p1, p2, self._occluders(t))
        sep = np.linalg.norm(p1 - p2, axis=-1)
        vis &= sep >= COINCIDENT_KM
        earth = np.zeros(3)
        for spec in set(self.pointing):
            rows = np.array([s == spec for s in self.pointing])
            if spec is None:
                continue
            ok = _pointing(pos[rows][:, None, :], spec, p2, earth)
            vis[rows] &= ok
            vis[:, rows] &= ok.T
        vis[np.arange(n), np.arange(n)] = False

        g = len(self.gs_ids)
        gvis = np.zeros((n, g), dtype=bool)
        if g:
            s1 = pos[:, None, :]
            s2 = gpos[None, :, :]
            gvis = _los(s1, s2, self._occluders(t, include_earth=False))
            for spec in set(self.pointing):
                if spec is None:
                    continue
                rows = np.array([s == spec for s in self.pointing])
                gvis[rows] &= _pointing(pos[rows][:, None, :], spec, s2, earth)
            for gi, gspec in enumerate(self.gs_pointing):
                gvis[:, gi] &= _pointing(gpos[gi][None, :], gspec, pos, earth)
        return vis, gvis

    def _candidate_pairs(self):
        if getattr(self, "_pairs", None) is None:
            n = len(self.nodes)
            pairs, labels = [], []
            for i in range(n):
                for j in range(i + 1, n):
                    lt = link_type(self.classes[i], self.classes[j])
                    if lt is not None:
                        pairs.append((i, j))
                        labels.append(lt)
            arr = np.array(pairs, dtype=int).reshape(-1, 2)
            self._pairs = (arr, labels)
        return self._pairs

    def _cone_cos(self, specs):
        """Per-node cone cosines; -inf for omnidirectional nodes."""
        out = np.full(len(specs), -np.inf)
        for i, s in enumerate(specs):
            if s is not None:
                out[i] = math.cos(math.radians(s.half_cone_deg)) - 1e-12
        return out

    def fsa_contact_graph(self, state: int) -> ContactGraph:
        times = self.sample_times(state)
        pos = self.ephemeris.positions(self.nodes, times)  # (T, N, 3)
        pairs, labels = self._candidate_pairs()
        n = len(self.nodes)
        cos_n = self._cone_cos(self.pointing)
        ok = np.ones(len(pairs), dtype=bool)
        for ti, t in enumerate(times):
            if not ok.any():
                break
            live = np.nonzero(ok)[0]
            a = pos[ti, pairs[live, 0]]
            b = pos[ti, pairs[live, 1]]
            vis = _los(a, b, self._occluders(t))
            d = b - a
            dist = np.linalg.norm(d, axis=-1)
            vis &= dist >= COINCIDENT_KM
            safe = np.where(dist > 0, dist, 1.0)
            ra = np.linalg.norm(a, axis=-1)
            rb = np.linalg.norm(b, axis=-1)
            # Earth-pointing boresight: cos = (-a . d) / (|a||d|)
            cos_a = -np.einsum("ij,ij->i", a, d) / (ra * safe)
            cos_b = np.einsum("ij,ij->i", b, d) / (rb * safe)
            vis &= cos_a >= cos_n[pairs[live, 0]]
            vis &= cos_b >= cos_n[pairs[live, 1]]
            ok[live[~vis]] = False
        edges = {(int(i), int(j)): labels[q] for q, (i, j) in enumerate(pairs) if ok[q]}

        sats = [i for i in range(n) if self.classes[i] in (NodeClass.GNSS, NodeClass.LP)]
        anchor = np.zeros(n, dtype=bool)
        if self.gs_ids and sats:
            gpos = self.ephemeris.positions(self.gs_ids, times)  # (T, G, 3)
            sidx = np.array(sats)
            cos_s = cos_n[sidx]
            cos_g = self._cone_cos(self.gs_pointing)
            seen_all = np.ones(len(sats), dtype=bool)
            for ti, t in enumerate(times):
                sp = pos[ti, sidx][:, None, :]  # (S, 1, 3)
                gp = gpos[ti][None, :, :]  # (1, G, 3)
                vis = _los(sp, gp, self._occluders(t, include_earth=False))
                d = gp - sp
                dist = np.linalg.norm(d, axis=-1)
                safe = np.where(dist > 0, dist, 1.0)
                cos_sat = -np.einsum("sgk,sgk->sg", np.broadcast_to(sp, d.shape), d) / (
                    np.linalg.norm(sp, axis=-1) * safe)
                cos_gs = -np.einsum("sgk,sgk->sg", np.broadcast_to(gp, d.shape), d) / (
                    np.linalg.norm(gp, axis=-1) * safe)
                vis &= cos_sat >= cos_s[:, None]
                vis &= cos_gs >= cos_g[None, :]
                seen_all &= vis.any(axis=1)
            anchor[sidx] = seen_all
        anchors = frozenset(int(i) for i in np.nonzero(anchor)[0])
        return ContactGraph(state, tuple(self.nodes), tuple(self.classes), edges, anchors)


# --- topology CSV -----------------------------------------------------------

def export_topology(graphs, edges_path, anchors_path) -> None:
    with open(edges_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["state_index", "node_a", "node_b", "link_type"])
        for g in graphs:
            for (i, j) in sorted(g.edges):
                w.writerow([g.state_index, g.nodes[i], g.nodes[j], g.edges[(i, j)].value])
    with open(anchors_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["state_index", "node", "is_anchor"])
        for g in graphs:
            for nd, flag in g.anchor_flags.items():
                w.writerow([g.state_index, nd, int(flag)])


def import_topology(edges_path, anchors_path, nodes, classes) -> dict:
    """Read exported topology back into {state_index: ContactGraph}."""
    index = {nd: i for i, nd in enumerate(nodes)}
    edges: dict = {}
    anchors: dict = {}
    with open(edges_path, newline="") as fh:
        for row in csv.DictReader(fh):
            s = int(row["state_index"])
            i, j = sorted((index[row["node_a"]], index[row["node_b"]]))
            lt = LinkType(row["link_type"])
            edges.setdefault(s, {})[(i, j)] = lt
    with open(anchors_path, newline="") as fh:
        for row in csv.DictReader(fh):
            s = int(row["state_index"])
            anchors.setdefault(s, set())
            if row["is_anchor"].strip().lower() in ("1", "true"):
                anchors[s].add(index[row["node"]])
    states = sorted(set(edges) | set(anchors))
    return {s: ContactGraph(s, tuple(nodes), tuple(classes), edges.get(s, {}), frozenset(anchors.get(s, ())))
            for s in states}


class PrecomputedTopology:
    """Stands in for VisibilityModel when contacts come from CSV."""

    def __init__(self, graphs: dict):
        self.graphs = graphs

    def fsa_contact_graph(self, state: int) -> ContactGraph:
        try:
            return self.graphs[state]
        except KeyError:
            raise ValueError(f"imported topology has no state {state}") from None


def topology_paths(directory) -> tuple[Path, Path]:
    d = Path(directory)
    return d / "topology_edges.csv", d / "topology_anchors.csv"
