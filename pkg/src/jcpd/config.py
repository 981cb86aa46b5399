"""Scenario configuration: defaults, schema checks, overrides and hashing.

A config is a JSON document. ``DEFAULT_CONFIG`` reproduces the reference
BeiDou + libration-point scenario; any field can be changed from the command
line with ``--set dotted.path=value``.
"""

from __future__ import annotations

import copy
import hashlib
import json
from pathlib import Path

import jsonschema

from .potentials import PRESETS, PotentialParams

DAY_S = 86400.0


class ConfigError(Exception):
    """Config could not be parsed or failed validation; ``errors`` lists every problem."""

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class ParseError(ConfigError):
    pass


class SchemaError(ConfigError):
    pass


DEFAULT_CONFIG: dict = {
    "name": "beidou-lp",
    "seed": 0,
    "algorithm": "jcpd",
    "constellation": {
        "meo": {"walker": "24/3/1", "altitude_km": 21528.0, "inclination_deg": 55.0,
                "raan0_deg": 0.0, "half_cone_deg": 60.0},
        "igso": {"count": 3, "inclination_deg": 55.0, "raan0_deg": 0.0, "raan_interval_deg": 120.0,
                 "node_longitude_deg": 118.0, "half_cone_deg": 45.0},
        "geo": {"longitudes_deg": [80.0, 110.5, 140.0], "half_cone_deg": 45.0},
        "lp": {"points": ["L3", "L4", "L5", "DRO"], "dro_radius_km": 70000.0,
               "dro_period_days": 13.660830, "dro_phase_deg": 0.0, "half_cone_deg": 75.0},
        "moon": {"distance_km": 384400.0, "period_days": 27.321661, "phase_epoch_deg": 0.0,
                 "mass_ratio": 0.01215},
        "greenwich_offset_deg": 0.0,
        "ephemeris_overrides": {},
    },
    "ground_stations": [
        {"name": "Jiamusi", "latitude_deg": 46.8, "longitude_deg": 130.3},
        {"name": "Kashi", "latitude_deg": 39.47, "longitude_deg": 75.99},
        {"name": "Sanya", "latitude_deg": 18.23, "longitude_deg": 109.02},
    ],
    "gs_half_cone_deg": 85.0,
    "clock": {"fsa_state_len_s": 360.0, "long_slot_len_s": 9.0, "short_slot_len_s": 3.0,
              "horizon_s": 7 * DAY_S},
    "params": "group1",
    "users": {"count": 48, "placement": ["L3", "L4", "L5", "DRO"], "links_per_state": 4,
              "per_user_links": None, "jitter_deg": 0.0},
    "visibility": {"sample_step_s": None, "earth_margin_km": 0.0, "moon_occlusion": True,
                   "topology": None},
    "scheduler": {"update_m_on_noneffective": False, "validate": True},
    "output": {"directory": "out"},
}

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_cone = {"type": "number", "exclusiveMinimum": 0, "maximum": 180}

SCHEMA: dict = {
    "type": "object",
    "additionalProperties": False,
    "required": ["constellation", "ground_stations", "clock", "params", "users", "algorithm", "seed"],
    "properties": {
        "name": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "algorithm": {"enum": ["jcpd", "fcp"]},
        "constellation": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "meo": {"type": ["object", "null"], "additionalProperties": False, "properties": {
                    "walker": {"type": "string", "pattern": r"^\d+/\d+/\d+$"},
                    "altitude_km": _pos, "inclination_deg": {"type": "number", "minimum": 0, "maximum": 180},
                    "raan0_deg": _num, "half_cone_deg": _cone}},
                "igso": {"type": ["object", "null"], "additionalProperties": False, "properties": {
                    "count": {"type": "integer", "minimum": 0},
                    "inclination_deg": {"type": "number", "minimum": 0, "maximum": 180},
                    "raan0_deg": _num, "raan_interval_deg": _num, "node_longitude_deg": _num,
                    "half_cone_deg": _cone}},
                "geo": {"type": ["object", "null"], "additionalProperties": False, "properties": {
                    "longitudes_deg": {"type": "array", "items": _num}, "half_cone_deg": _cone}},
                "lp": {"type": ["object", "null"], "additionalProperties": False, "properties": {
                    "points": {"type": "array", "items": {"enum": ["L3", "L4", "L5", "DRO"]}},
                    "dro_radius_km": _pos, "dro_period_days": _pos, "dro_phase_deg": _num,
                    "half_cone_deg": _cone}},
                "moon": {"type": "object", "additionalProperties": False, "properties": {
                    "distance_km": _pos, "period_days": _pos, "phase_epoch_deg": _num,
                    "mass_ratio": {"type": "number", "exclusiveMinimum": 0, "maximum": 0.5}}},
                "greenwich_offset_deg": _num,
                "ephemeris_overrides": {"type": "object", "additionalProperties": {"type": "string"}},
            },
        },
        "ground_stations": {"type": "array", "items": {
            "type": "object", "additionalProperties": False,
            "required": ["name", "latitude_deg", "longitude_deg"],
            "properties": {"name": {"type": "string"},
                           "latitude_deg": {"type": "number", "minimum": -90, "maximum": 90},
                           "longitude_deg": {"type": "number", "exclusiveMinimum": -180, "maximum": 180}}}},
        "gs_half_cone_deg": {"type": "number", "exclusiveMinimum": 0, "maximum": 90},
        "clock": {"type": "object", "additionalProperties": False,
                  "required": ["fsa_state_len_s", "long_slot_len_s", "short_slot_len_s", "horizon_s"],
                  "properties": {"fsa_state_len_s": _pos, "long_slot_len_s": _pos,
                                 "short_slot_len_s": _pos, "horizon_s": _pos}},
        "params": {"oneOf": [
            {"type": "string"},
            {"type": "object", "additionalProperties": False,
             "properties": dict({"preset": {"type": "string"}},
                                **{name: _num for name in PotentialParams.field_names()})},
        ]},
        "users": {"type": "object", "additionalProperties": False, "properties": {
            "count": {"type": "integer", "minimum": 0},
            "placement": {"type": "array", "minItems": 1, "items": {"enum": ["L3", "L4", "L5", "DRO"]}},
            "links_per_state": {"type": "integer", "minimum": 0},
            "per_user_links": {"type": ["array", "null"], "items": {"type": "integer", "minimum": 0}},
            "jitter_deg": {"type": "number", "minimum": 0}}},
        "visibility": {"type": "object", "additionalProperties": False, "properties": {
            "sample_step_s": {"type": ["number", "null"], "exclusiveMinimum": 0},
            "earth_margin_km": {"type": "number", "minimum": 0},
            "moon_occlusion": {"type": "boolean"},
            "topology": {"type": ["object", "null"], "additionalProperties": False,
                         "required": ["edges_csv", "anchors_csv"],
                         "properties": {"edges_csv": {"type": "string"}, "anchors_csv": {"type": "string"}}}}},
        "scheduler": {"type": "object", "additionalProperties": False, "properties": {
            "update_m_on_noneffective": {"type": "boolean"}, "validate": {"type": "boolean"}}},
        "output": {"type": "object", "additionalProperties": False,
                   "properties": {"directory": {"type": "string"}}},
    },
}


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k != "ephemeris_overrides":
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def default_config() -> dict:
    return copy.deepcopy(DEFAULT_CONFIG)


def parse_config(text: str, source: str = "<string>") -> dict:
    """Parse JSON text and layer it over the defaults (partial configs are fine)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ParseError(f"{source}: top level must be an object")
    return _merge(DEFAULT_CONFIG, doc)


def load_config(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    cfg = parse_config(text, str(path))
    cfg["_base_dir"] = str(path.resolve().parent)
    return cfg


def _coerce(value: str):
    try:
        return json.loads(value)
    except json.JSONDecodeError:
        return value


def apply_overrides(cfg: dict, overrides) -> dict:
    """Apply ``dotted.path=value`` strings; values are read as JSON when possible."""
    cfg = copy.deepcopy(cfg)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        parts = key.strip().split(".")
        node = cfg
        for p in parts[:-1]:
            if not isinstance(node.get(p), dict):
                if p in node and node[p] is not None:
                    raise ConfigError(f"override {key!r}: {p!r} is not a section")
                node[p] = {}
            node = node[p]
        node[parts[-1]] = _coerce(raw)
    return cfg


def validate_config(cfg: dict) -> list[str]:
    """Every schema and invariant violation as a human-readable line."""
    doc = {k: v for k, v in cfg.items() if not k.startswith("_")}
    errors = []
    validator = jsonschema.Draft7Validator(SCHEMA)
    for err in sorted(validator.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path))):
        where = ".".join(str(p) for p in err.absolute_path) or "<root>"
        errors.append(f"{where}: {err.message}")
    if errors:
        return errors

    clock = doc["clock"]
    if not _multiple(clock["long_slot_len_s"], clock["short_slot_len_s"]):
        errors.append("clock.long_slot_len_s: LongSlot not a multiple of ShortSlot")
    if not _multiple(clock["fsa_state_len_s"], clock["long_slot_len_s"]):
        errors.append("clock.fsa_state_len_s: FSA state not a multiple of LongSlot")
    if not _multiple(clock["horizon_s"], clock["fsa_state_len_s"]):
        errors.append("clock.horizon_s: horizon is not a whole number of FSA states")

    params = doc["params"]
    name = params if isinstance(params, str) else params.get("preset")
    if name is not None and name not in PRESETS:
        errors.append(f"params: unknown parameter group {name!r}; known presets: {', '.join(sorted(PRESETS))}")
    else:
        try:
            build_params(params)
        except (ValueError, TypeError) as exc:
            errors.append(f"params: {exc}")

    users = doc["users"]
    per_user = users.get("per_user_links")
    if per_user is not None and len(per_user) != users.get("count", 0):
        errors.append("users.per_user_links: length must equal users.count")

    meo = doc["constellation"].get("meo")
    if meo and "walker" in meo:
        t, p, _f = (int(x) for x in meo["walker"].split("/"))
        if p == 0 or t % p:
            errors.append("constellation.meo.walker: total must be a multiple of planes")
    names = [g["name"] for g in doc["ground_stations"]]
    if len(set(names)) != len(names):
        errors.append("ground_stations: names must be unique")
    return errors


def _multiple(a, b) -> bool:
    q = a / b
    return abs(q - round(q)) < 1e-9 and round(q) >= 1


def check_config(cfg: dict) -> dict:
    errs = validate_config(cfg)
    if errs:
        raise SchemaError(errs)
    return cfg


def build_params(spec) -> PotentialParams:
    if isinstance(spec, str):
        if spec not in PRESETS:
            raise ValueError(f"unknown parameter group {spec!r}; known presets: {', '.join(sorted(PRESETS))}")
        return PRESETS[spec]
    spec = dict(spec)
    name = spec.pop("preset", None)
    base = PRESETS[name] if name else PotentialParams()
    fields = base.to_dict()
    for k, v in spec.items():
        fields[k] = int(v) if k in ("N_S", "N_L", "I_S", "I_L", "I_U") else float(v)
    return PotentialParams(**fields)


def params_label(cfg: dict) -> str:
    if cfg["algorithm"] == "fcp":
        return "fcp"
    p = cfg["params"]
    if isinstance(p, str):
        return p
    return p.get("preset") or "custom"


def canonical(cfg: dict) -> str:
    doc = {k: v for k, v in cfg.items() if not k.startswith("_") and k != "output"}
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def scenario_hash(cfg: dict) -> str:
    return hashlib.sha256(canonical(cfg).encode()).hexdigest()[:16]


def dump_config(cfg: dict) -> str:
    doc = {k: v for k, v in cfg.items() if not k.startswith("_")}
    return json.dumps(doc, indent=2, sort_keys=True)
