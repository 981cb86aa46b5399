import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jcpd.ephemeris import (
    EARTH_RADIUS_KM,
    SIDEREAL_DAY_S,
    Ephemeris,
    EphemerisTable,
    GroundStation,
    KeplerElements,
    LpPlacement,
    RotatingFrameSpec,
    TimeOutsideEphemerisRange,
    UnknownNode,
    gs_position,
    l3_distance_ratio,
    lp_position,
    moon_position,
    propagate_kepler,
    walker_delta,
)

A_MEO = 6371.0 + 21528.0
D = 384400.0


def close(a, b, tol=1e-6):
    return np.allclose(np.asarray(a, float), np.asarray(b, float), rtol=0, atol=tol)


def test_equatorial_orbit_epoch_and_half_period():
    el = KeplerElements(10000.0)
    assert close(propagate_kepler(el, 0.0), (10000, 0, 0))
    assert close(propagate_kepler(el, el.period_s / 2), (-10000, 0, 0), 1e-6)


def test_meo_quarter_period():
    el = KeplerElements(A_MEO)
    assert close(propagate_kepler(el, el.period_s / 4), (0, A_MEO, 0), 1e-6)


def test_inclined_orbit_reaches_expected_latitude():
    el = KeplerElements(A_MEO, inclination_deg=55.0)
    p = propagate_kepler(el, el.period_s / 4)
    assert math.degrees(math.asin(p[2] / A_MEO)) == pytest.approx(55.0, abs=1e-9)


def test_element_validation():
    with pytest.raises(ValueError):
        KeplerElements(6000.0)
    with pytest.raises(ValueError):
        KeplerElements(8000.0, inclination_deg=181)


def test_geosynchronous_period_is_sidereal_day():
    el = KeplerElements.geosynchronous()
    assert el.period_s == SIDEREAL_DAY_S
    assert el.semi_major_axis_km == pytest.approx(42164.2, abs=0.5)


def test_moon_positions():
    fr = RotatingFrameSpec()
    assert close(moon_position(fr, 0.0), (D, 0, 0))
    assert close(moon_position(fr, fr.moon_period_s / 4), (0, D, 0), 1e-6)
    assert close(moon_position(fr, fr.moon_period_s), (D, 0, 0), 1e-6)


def test_l4_l5_dro_at_epoch():
    fr = RotatingFrameSpec()
    c, s = math.cos(math.pi / 3), math.sin(math.pi / 3)
    assert close(lp_position(LpPlacement("L4"), fr, 0.0), (D * c, D * s, 0), 1e-6)
    assert close(lp_position(LpPlacement("L5"), fr, 0.0), (D * c, -D * s, 0), 1e-6)
    assert close(lp_position(LpPlacement("DRO"), fr, 0.0), (D + 70000.0, 0, 0), 1e-6)


def test_l3_opposite_moon_at_collinear_distance():
    fr = RotatingFrameSpec()
    p = lp_position(LpPlacement("L3"), fr, 0.0)
    r = l3_distance_ratio(fr.mass_ratio)
    assert close(p, (-r * D, 0, 0), 1e-6)
    # independent check: residual of the collinear equilibrium equation
    mu = fr.mass_ratio
    x = -r - mu  # barycentric coordinate, units of d
    resid = x - (1 - mu) * (x + mu) / abs(x + mu) ** 3 - mu * (x - 1 + mu) / abs(x - 1 + mu) ** 3
    assert abs(resid) < 1e-10
    assert 0.99 < r < 1.0


def test_ground_station_positions():
    R = EARTH_RADIUS_KM
    assert close(gs_position(GroundStation("a", 0, 0), 0.0), (R, 0, 0))
    assert close(gs_position(GroundStation("b", 0, 90), 0.0), (0, R, 0))
    pole = GroundStation("p", 90, 0)
    for t in (0.0, 1234.5, 40000.0):
        assert close(gs_position(pole, t), (0, 0, R))


def test_ground_station_validation():
    with pytest.raises(ValueError):
        GroundStation("x", 91, 0)
    with pytest.raises(ValueError):
        GroundStation("x", 0, -180)


def test_registry_dispatch_and_errors(tmp_path):
    eph = Ephemeris()
    el = KeplerElements(A_MEO, 55.0, 30.0, 10.0)
    eph.register("M", el)
    assert np.array_equal(eph.node_position("M", 321.0), propagate_kepler(el, 321.0))
    with pytest.raises(UnknownNode):
        eph.node_position("nope", 0.0)
    with pytest.raises(ValueError):
        eph.register("M", el)

    tab = EphemerisTable((0.0, 10.0, 20.0), ((0, 0, 0), (10, 20, 30), (20, 0, 0)))
    path = tmp_path / "e.csv"
    tab.to_csv(path)
    assert path.read_text().splitlines()[0] == "time_s,x_km,y_km,z_km"
    eph.register("T", EphemerisTable.from_csv(path))
    assert close(eph.node_position("T", 10.0), (10, 20, 30))
    assert close(eph.node_position("T", 5.0), (5, 10, 15))
    with pytest.raises(TimeOutsideEphemerisRange):
        eph.node_position("T", 25.0)


def test_table_validation():
    with pytest.raises(ValueError):
        EphemerisTable((0.0,), ((0, 0, 0),))
    with pytest.raises(ValueError):
        EphemerisTable((0.0, 0.0), ((0, 0, 0), (1, 1, 1)))


def test_walker_pattern():
    els = walker_delta(24, 3, 1, A_MEO, 55.0)
    assert len(els) == 24
    assert sorted({e.raan_deg for e in els}) == [0.0, 120.0, 240.0]
    plane0 = [e.arg_latitude_epoch_deg for e in els[:8]]
    assert plane0 == [45.0 * i for i in range(8)]
    assert els[8].arg_latitude_epoch_deg == 15.0


times = st.floats(min_value=0, max_value=30 * 86400, allow_nan=False)


@settings(max_examples=100)
@given(t=times, inc=st.floats(0, 180), raan=st.floats(0, 360), u0=st.floats(0, 360))
def test_kepler_radius_and_period(t, inc, raan, u0):
    el = KeplerElements(A_MEO, inc, raan, u0)
    p = propagate_kepler(el, t)
    assert abs(np.linalg.norm(p) / A_MEO - 1) < 1e-6
    assert np.linalg.norm(p - propagate_kepler(el, t + el.period_s)) < 1e-3


@settings(max_examples=100)
@given(t=times)
def test_lp_geometry_invariants(t):
    fr = RotatingFrameSpec()
    moon = moon_position(fr, t)
    l4 = lp_position(LpPlacement("L4"), fr, t)
    l5 = lp_position(LpPlacement("L5"), fr, t)
    assert abs(np.linalg.norm(moon) - D) < 1e-6
    assert abs(np.linalg.norm(l4) / D - 1) < 1e-6
    # mirror across the Earth-Moon line
    u = moon / np.linalg.norm(moon)
    mirrored = 2 * np.dot(l4, u) * u - l4
    assert np.linalg.norm(mirrored - l5) < 1e-6
    dro = lp_position(LpPlacement("DRO"), fr, t)
    assert abs(np.linalg.norm(dro - moon) - 70000.0) < 1e-6


def test_dro_is_retrograde_in_rotating_frame():
    fr = RotatingFrameSpec()
    pl = LpPlacement("DRO")
    rel = []
    for t in (0.0, 3600.0):
        th = 2 * math.pi * t / fr.moon_period_s
        off = lp_position(pl, fr, t) - moon_position(fr, t)
        # rotate into the co-rotating frame
        rel.append((off[0] * math.cos(th) + off[1] * math.sin(th), -off[0] * math.sin(th) + off[1] * math.cos(th)))
    assert rel[1][1] < 0  # angle decreases


def test_positions_bit_identical():
    eph = Ephemeris()
    eph.register("M", KeplerElements(A_MEO, 55.0, 120.0, 15.0))
    eph.register("L", LpPlacement("L4"))
    ts = np.linspace(0, 1000, 7)
    assert np.array_equal(eph.positions(["M", "L"], ts), eph.positions(["M", "L"], ts))
    assert eph.positions(["M", "L"], ts).shape == (7, 2, 3)
