"""Build a runnable Scenario (roster, ephemeris, visibility) from a config."""

from __future__ import annotations

import hashlib
import json
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .ephemeris import (
    EARTH_RADIUS_KM,
    Ephemeris,
    EphemerisTable,
    GroundStation,
    KeplerElements,
    LpPlacement,
    RotatingFrameSpec,
    walker_delta,
)
from .potentials import PotentialParams
from .visibility import (
    NodeClass,
    PointingSpec,
    PrecomputedTopology,
    SlotClock,
    VisibilityModel,
    VisibilityOptions,
    import_topology,
)

# named random substreams; appending users never shifts earlier draws
STREAM_USER_JITTER = 1

# contact graphs depend only on geometry, so scenarios that differ in
# parameters or algorithm share them within a process
_GRAPH_CACHE: OrderedDict = OrderedDict()
GRAPH_CACHE_SIZE = 4
_GEOMETRY_KEYS = ("seed", "constellation", "ground_stations", "gs_half_cone_deg", "clock", "users", "visibility")


def geometry_key(cfg: dict) -> str:
    doc = {k: cfg.get(k) for k in _GEOMETRY_KEYS}
    doc["clock"] = {k: v for k, v in (doc["clock"] or {}).items() if k != "horizon_s"}
    doc["users"] = {k: v for k, v in (doc["users"] or {}).items() if k not in ("links_per_state", "per_user_links")}
    doc["_base_dir"] = str(cfg.get("_base_dir", "."))
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()


def _shared_graphs(key: str) -> dict:
    graphs = _GRAPH_CACHE.get(key)
    if graphs is None:
        graphs = _GRAPH_CACHE[key] = {}
        while len(_GRAPH_CACHE) > GRAPH_CACHE_SIZE:
            _GRAPH_CACHE.popitem(last=False)
    else:
        _GRAPH_CACHE.move_to_end(key)
    return graphs


@dataclass
class Scenario:
    nodes: list  # satellite and user ids, roster order
    classes: list
    kinds: list  # MEO/IGSO/GEO/L3/L4/L5/DRO/user
    ground_stations: list  # station ids
    clock: SlotClock
    params: PotentialParams
    demand: dict  # user index -> L_u
    horizon_s: float
    seed: int = 0
    algorithm: str = "jcpd"
    group: str = "group1"
    update_m_on_noneffective: bool = False
    validate: bool = True
    topology: object = None  # VisibilityModel or PrecomputedTopology
    config: dict = field(default_factory=dict)
    _graphs: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.horizon_s <= 0:
            raise cfgmod.ConfigError("horizon must be positive")
        try:
            self.n_states = self.clock.n_states(self.horizon_s)
        except ValueError as exc:
            raise cfgmod.ConfigError(str(exc)) from None
        users = [i for i, c in enumerate(self.classes) if c is NodeClass.USER]
        if set(self.demand) - set(users):
            raise cfgmod.ConfigError("demand lists a node that is not a user")

    @property
    def scenario_hash(self) -> str:
        return cfgmod.scenario_hash(self.config) if self.config else "adhoc"

    def index(self, node: str) -> int:
        return self.nodes.index(node)

    def contact_graph(self, state: int):
        g = self._graphs.get(state)
        if g is None:
            g = self.topology.fsa_contact_graph(state)
            self._graphs[state] = g
        return g


def build_scenario(cfg: dict) -> Scenario:
    cfgmod.check_config(cfg)
    base_dir = Path(cfg.get("_base_dir", "."))
    con = cfg["constellation"]
    moon = con["moon"]
    frame = RotatingFrameSpec(moon["distance_km"], moon["period_days"] * cfgmod.DAY_S,
                              moon["phase_epoch_deg"], moon["mass_ratio"])
    eph = Ephemeris(frame=frame, greenwich_offset_deg=con["greenwich_offset_deg"])

    nodes, classes, kinds, pointing = [], [], [], []

    def add(node_id, cls, kind, source, cone):
        nodes.append(node_id)
        classes.append(cls)
        kinds.append(kind)
        pointing.append(PointingSpec(cone, "earth") if cone else None)
        eph.register(node_id, source)

    meo = con.get("meo")
    if meo:
        t, p, f = (int(x) for x in meo["walker"].split("/"))
        a = EARTH_RADIUS_KM + meo["altitude_km"]
        for i, el in enumerate(walker_delta(t, p, f, a, meo["inclination_deg"], meo["raan0_deg"])):
            add(f"MEO-{i + 1:02d}", NodeClass.GNSS, "MEO", el, meo["half_cone_deg"])
    igso = con.get("igso")
    if igso:
        gmst0 = con["greenwich_offset_deg"]
        for i in range(igso["count"]):
            raan = igso["raan0_deg"] + igso["raan_interval_deg"] * i
            # equal node longitude keeps all IGSO on one ground track
            u0 = (igso["node_longitude_deg"] + gmst0 - raan) % 360.0
            el = KeplerElements.geosynchronous(inclination_deg=igso["inclination_deg"],
                                               raan_deg=raan % 360.0, arg_latitude_epoch_deg=u0)
            add(f"IGSO-{i + 1}", NodeClass.GNSS, "IGSO", el, igso["half_cone_deg"])
    geo = con.get("geo")
    if geo:
        for i, lon in enumerate(geo["longitudes_deg"]):
            el = KeplerElements.geosynchronous(arg_latitude_epoch_deg=(lon + con["greenwich_offset_deg"]) % 360.0)
            add(f"GEO-{i + 1}", NodeClass.GNSS, "GEO", el, geo["half_cone_deg"])
    lp = con.get("lp")
    lp_kw = {}
    if lp:
        lp_kw = dict(dro_radius_km=lp["dro_radius_km"], dro_period_s=lp["dro_period_days"] * cfgmod.DAY_S)
        for point in lp["points"]:
            phase = lp["dro_phase_deg"] if point == "DRO" else 0.0
            add(f"LP-{point}", NodeClass.LP, point, LpPlacement(point, phase_offset_deg=phase, **lp_kw),
                lp["half_cone_deg"])

    users = cfg["users"]
    count = users.get("count", 0)
    placement = users["placement"]
    per_user = users.get("per_user_links")
    jitter = users.get("jitter_deg", 0.0)
    demand = {}
    dro_base = lp["dro_phase_deg"] if lp else 0.0
    for u in range(count):
        point = placement[u % len(placement)]
        off = 0.0
        if jitter > 0:
            rng = np.random.default_rng([cfg["seed"], STREAM_USER_JITTER, u])
            off = float(rng.uniform(-jitter, jitter))
        if point == "DRO":
            off += dro_base
        place = LpPlacement(point, phase_offset_deg=off, **lp_kw)
        uid = f"U{u + 1:03d}-{point}"
        add(uid, NodeClass.USER, "user", place, None)
        demand[len(nodes) - 1] = per_user[u] if per_user is not None else users["links_per_state"]

    for name, path in con.get("ephemeris_overrides", {}).items():
        if name not in eph.sources:
            raise cfgmod.ConfigError(f"ephemeris override for unknown node {name!r}")
        p = Path(path)
        eph.sources[name] = EphemerisTable.from_csv(p if p.is_absolute() else base_dir / p)

    gs_ids, gs_pointing = [], []
    for gs in cfg["ground_stations"]:
        gid = f"GS-{gs['name']}"
        eph.register(gid, GroundStation(gs["name"], gs["latitude_deg"], gs["longitude_deg"]))
        gs_ids.append(gid)
        gs_pointing.append(PointingSpec(cfg["gs_half_cone_deg"], "zenith"))

    ck = cfg["clock"]
    clock = SlotClock(ck["fsa_state_len_s"], ck["long_slot_len_s"], ck["short_slot_len_s"])
    vis = cfg["visibility"]
    topo_cfg = vis.get("topology")
    if topo_cfg:
        def rel(p):
            p = Path(p)
            return p if p.is_absolute() else base_dir / p
        topology = PrecomputedTopology(import_topology(rel(topo_cfg["edges_csv"]), rel(topo_cfg["anchors_csv"]),
                                                       nodes, classes))
    else:
        topology = VisibilityModel(nodes, classes, pointing, gs_ids, gs_pointing, eph, clock,
                                   VisibilityOptions(vis.get("sample_step_s"), vis.get("earth_margin_km", 0.0),
                                                     vis.get("moon_occlusion", True)))
    sch = cfg["scheduler"]
    sc = Scenario(nodes=nodes, classes=classes, kinds=kinds, ground_stations=gs_ids, clock=clock,
                  params=cfgmod.build_params(cfg["params"]), demand=demand, horizon_s=ck["horizon_s"],
                  seed=cfg["seed"], algorithm=cfg["algorithm"], group=cfgmod.params_label(cfg),
                  update_m_on_noneffective=sch.get("update_m_on_noneffective", False),
                  validate=sch.get("validate", True), topology=topology, config=cfg)
    if not topo_cfg:
        sc._graphs = _shared_graphs(geometry_key(cfg))
    sc.ephemeris = eph
    return sc


def default_scenario(**overrides) -> Scenario:
    """Reference scenario with ``--set``-style overrides given as keyword pairs.

    Keys use ``__`` for dots, e.g. ``users__count=72``.
    """
    sets = [f"{k.replace('__', '.')}={json.dumps(v)}" for k, v in overrides.items()]
    return build_scenario(cfgmod.apply_overrides(cfgmod.default_config(), sets))
