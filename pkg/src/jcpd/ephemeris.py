"""Inertial positions for GNSS satellites, the Moon, libration-point nodes,
users and ground stations.

All positions are Earth-centred inertial, in km. The Moon moves on a circular
orbit in the equatorial plane; libration-point nodes are pinned in the
Earth-Moon rotating frame.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Union

import numpy as np
from scipy.optimize import brentq

GM_EARTH = 398600.4418  # km^3/s^2
EARTH_RADIUS_KM = 6371.0
MOON_RADIUS_KM = 1737.4
EARTH_ROTATION_RAD_S = 7.2921159e-5
SIDEREAL_DAY_S = 2 * math.pi / EARTH_ROTATION_RAD_S
SIDEREAL_MONTH_S = 27.321661 * 86400.0
EARTH_MOON_DISTANCE_KM = 384400.0
EARTH_MOON_MU = 0.01215


class UnknownNode(KeyError):
    pass


class TimeOutsideEphemerisRange(ValueError):
    pass


@dataclass(frozen=True)
class KeplerElements:
    semi_major_axis_km: float
    inclination_deg: float = 0.0
    raan_deg: float = 0.0
    arg_latitude_epoch_deg: float = 0.0
    period_s: float | None = None

    def __post_init__(self):
        if not self.semi_major_axis_km > EARTH_RADIUS_KM:
            raise ValueError("semi-major axis must exceed the Earth radius")
        if not 0.0 <= self.inclination_deg <= 180.0:
            raise ValueError("inclination must lie in [0, 180] deg")
        if self.period_s is None:
            period = 2 * math.pi * math.sqrt(self.semi_major_axis_km**3 / GM_EARTH)
            object.__setattr__(self, "period_s", period)

    @classmethod
    def geosynchronous(cls, **kw) -> "KeplerElements":
        # radius from the sidereal day so GEO nodes hold their longitude
        a = (GM_EARTH * (SIDEREAL_DAY_S / (2 * math.pi)) ** 2) ** (1 / 3)
        return cls(semi_major_axis_km=a, period_s=SIDEREAL_DAY_S, **kw)


@dataclass(frozen=True)
class RotatingFrameSpec:
    earth_moon_distance_km: float = EARTH_MOON_DISTANCE_KM
    moon_period_s: float = SIDEREAL_MONTH_S
    moon_phase_epoch_deg: float = 0.0
    mass_ratio: float = EARTH_MOON_MU

    def __post_init__(self):
        if self.earth_moon_distance_km <= 0 or self.moon_period_s <= 0:
            raise ValueError("Earth-Moon distance and period must be positive")


@dataclass(frozen=True)
class LpPlacement:
    point: str  # L3 | L4 | L5 | DRO
    dro_radius_km: float = 70000.0
    phase_offset_deg: float = 0.0
    dro_period_s: float = SIDEREAL_MONTH_S / 2

    def __post_init__(self):
        if self.point not in ("L3", "L4", "L5", "DRO"):
            raise ValueError(f"unknown libration placement {self.point!r}")
        if self.point == "DRO" and self.dro_radius_km <= MOON_RADIUS_KM:
            raise ValueError("DRO radius must exceed the Moon radius")


@dataclass(frozen=True)
class GroundStation:
    name: str
    latitude_deg: float
    longitude_deg: float

    def __post_init__(self):
        if abs(self.latitude_deg) > 90:
            raise ValueError("|latitude| must be <= 90")
        if not -180 < self.longitude_deg <= 180:
            raise ValueError("longitude must lie in (-180, 180]")


@dataclass(frozen=True)
class EphemerisTable:
    times_s: tuple
    positions_km: tuple  # tuple of (x, y, z)

    def __post_init__(self):
        if len(self.times_s) < 2 or len(self.times_s) != len(self.positions_km):
            raise ValueError("ephemeris needs >= 2 samples with matching positions")
        if any(b <= a for a, b in zip(self.times_s, self.times_s[1:])):
            raise ValueError("ephemeris times must be strictly increasing")

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "EphemerisTable":
        times, pos = [], []
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            missing = {"time_s", "x_km", "y_km", "z_km"} - set(reader.fieldnames or ())
            if missing:
                raise ValueError(f"{path}: missing columns {sorted(missing)}")
            for row in reader:
                times.append(float(row["time_s"]))
                pos.append((float(row["x_km"]), float(row["y_km"]), float(row["z_km"])))
        return cls(tuple(times), tuple(pos))

    def to_csv(self, path: Union[str, Path]) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["time_s", "x_km", "y_km", "z_km"])
            for t, (x, y, z) in zip(self.times_s, self.positions_km):
                w.writerow([repr(t), repr(x), repr(y), repr(z)])

    def at(self, t: float) -> np.ndarray:
        times = self.times_s
        if t < times[0] or t > times[-1]:
            raise TimeOutsideEphemerisRange(f"t={t} outside [{times[0]}, {times[-1]}]")
        hi = int(np.searchsorted(times, t, side="left"))
        if times[hi] == t:
            return np.array(self.positions_km[hi], dtype=float)
        lo = hi - 1
        f = (t - times[lo]) / (times[hi] - times[lo])
        p0 = np.array(self.positions_km[lo], dtype=float)
        p1 = np.array(self.positions_km[hi], dtype=float)
        return p0 + f * (p1 - p0)


def propagate_kepler(el: KeplerElements, t) -> np.ndarray:
    """Circular two-body position; ``t`` may be a scalar or 1-D array."""
    t = np.asarray(t, dtype=float)
    u = math.radians(el.arg_latitude_epoch_deg) + 2 * math.pi * t / el.period_s
    raan = math.radians(el.raan_deg)
    inc = math.radians(el.inclination_deg)
    cu, su = np.cos(u), np.sin(u)
    co, so = math.cos(raan), math.sin(raan)
    ci, si = math.cos(inc), math.sin(inc)
    a = el.semi_major_axis_km
    x = a * (co * cu - so * su * ci)
    y = a * (so * cu + co * su * ci)
    z = a * (su * si)
    return np.stack([x, y, z], axis=-1)


def moon_angle(frame: RotatingFrameSpec, t):
    return math.radians(frame.moon_phase_epoch_deg) + 2 * math.pi * np.asarray(t, float) / frame.moon_period_s


def moon_position(frame: RotatingFrameSpec, t) -> np.ndarray:
    th = moon_angle(frame, t)
    d = frame.earth_moon_distance_km
    return np.stack([d * np.cos(th), d * np.sin(th), np.zeros_like(th)], axis=-1)


@lru_cache(maxsize=None)
def l3_distance_ratio(mu: float) -> float:
    """Earth-to-L3 distance over Earth-Moon distance from the collinear quintic."""

    def f(x):  # barycentric x axis, Earth at -mu, Moon at 1 - mu
        return x - (1 - mu) * (x + mu) / abs(x + mu) ** 3 - mu * (x - 1 + mu) / abs(x - 1 + mu) ** 3

    x = brentq(f, -2.0, -mu - 1e-6, xtol=1e-15)
    return -x - mu


def lp_position(place: LpPlacement, frame: RotatingFrameSpec, t) -> np.ndarray:
    th = moon_angle(frame, t)
    d = frame.earth_moon_distance_km
    off = math.radians(place.phase_offset_deg)
    if place.point == "DRO":
        moon = np.stack([d * np.cos(th), d * np.sin(th), np.zeros_like(th)], axis=-1)
        # retrograde in the rotating frame: phase decreases with time
        phi = off - 2 * math.pi * np.asarray(t, float) / place.dro_period_s
        r = place.dro_radius_km
        # rotating-frame offset (radial, along-track) mapped to inertial axes
        dx_rot, dy_rot = r * np.cos(phi), r * np.sin(phi)
        dx = dx_rot * np.cos(th) - dy_rot * np.sin(th)
        dy = dx_rot * np.sin(th) + dy_rot * np.cos(th)
        return moon + np.stack([dx, dy, np.zeros_like(dx)], axis=-1)
    if place.point == "L4":
        ang, rad = th + math.pi / 3, d
    elif place.point == "L5":
        ang, rad = th - math.pi / 3, d
    else:
        ang, rad = th + math.pi, d * l3_distance_ratio(frame.mass_ratio)
    ang = ang + off
    return np.stack([rad * np.cos(ang), rad * np.sin(ang), np.zeros_like(ang)], axis=-1)


def gs_position(gs: GroundStation, t, greenwich_offset_deg: float = 0.0) -> np.ndarray:
    lat = math.radians(gs.latitude_deg)
    lon = math.radians(gs.longitude_deg + greenwich_offset_deg) + EARTH_ROTATION_RAD_S * np.asarray(t, float)
    r = EARTH_RADIUS_KM
    return np.stack([r * math.cos(lat) * np.cos(lon),
                     r * math.cos(lat) * np.sin(lon),
                     r * math.sin(lat) * np.ones_like(lon)], axis=-1)


Source = Union[KeplerElements, LpPlacement, GroundStation, EphemerisTable]


@dataclass
class Ephemeris:
    """Registry mapping node ids to exactly one position source."""

    frame: RotatingFrameSpec = field(default_factory=RotatingFrameSpec)
    greenwich_offset_deg: float = 0.0
    sources: dict = field(default_factory=dict)

    def register(self, node: str, source: Source) -> None:
        if node in self.sources:
            raise ValueError(f"node {node!r} already registered")
        self.sources[node] = source

    def node_position(self, node: str, t) -> np.ndarray:
        try:
            src = self.sources[node]
        except KeyError:
            raise UnknownNode(node) from None
        if isinstance(src, KeplerElements):
            return propagate_kepler(src, t)
        if isinstance(src, LpPlacement):
            return lp_position(src, self.frame, t)
        if isinstance(src, GroundStation):
            return gs_position(src, t, self.greenwich_offset_deg)
        ts = np.atleast_1d(np.asarray(t, float))
        out = np.array([src.at(float(x)) for x in ts])
        return out[0] if np.ndim(t) == 0 else out

    def positions(self, nodes, times) -> np.ndarray:
        """Array of shape (len(times), len(nodes), 3)."""
        times = np.asarray(times, float)
        out = np.empty((len(times), len(nodes), 3))
        for j, nd in enumerate(nodes):
            out[:, j, :] = self.node_position(nd, times)
        return out


def walker_delta(total: int, planes: int, phasing: int, a_km: float, inc_deg: float,
                 raan0_deg: float = 0.0) -> list[KeplerElements]:
    """Walker-delta T/P/F pattern, ordered plane by plane."""
    per_plane = total // planes
    out = []
    for p in range(planes):
        for s in range(per_plane):
            u = 360.0 * s / per_plane + 360.0 * phasing * p / total
            out.append(KeplerElements(a_km, inc_deg, raan0_deg + 360.0 * p / planes, u % 360.0))
    return out
