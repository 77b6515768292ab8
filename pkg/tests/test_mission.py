import math

import pytest

from auvstack.frames import EarthFrame
from auvstack.mission import (
    MissionError,
    Waypoint,
    import_kml,
    latlon_to_local,
    load_mission,
    waypoint_from_dict,
)

KML = """<?xml version="1.0" encoding="UTF-8"?>
<kml xmlns="http://www.opengis.net/kml/2.2">
  <Document><Placemark><LineString>
    <coordinates>
      -71.0,41.0,2.0
      -70.999,41.0,3.5
      -70.999,41.001,4.0
      -71.0,41.001,4.5
      -71.0005,41.0005,5.0
    </coordinates>
  </LineString></Placemark></Document>
</kml>
"""


class TestWaypoint:
    def test_depth_xor_altitude(self):
        with pytest.raises(MissionError):
            Waypoint(0, 0)
        with pytest.raises(MissionError):
            Waypoint(0, 0, depth=2.0, altitude=1.0)

    def test_speed_positive(self):
        with pytest.raises(MissionError):
            Waypoint(0, 0, depth=2.0, speed=0.0)

    def test_altitude_resolution(self):
        wp = Waypoint(0, 0, altitude=0.5)
        assert wp.resolve_depth(20.0) == pytest.approx(19.5)

    def test_dict_round_trip(self):
        wp = Waypoint(3.0, -4.0, depth=2.5, speed=0.8)
        again = waypoint_from_dict(wp.to_dict(), None, EarthFrame.ENU)
        assert (again.x, again.y, again.depth, again.speed) == (3.0, -4.0, 2.5, 0.8)

    def test_latlon_requires_datum(self):
        with pytest.raises(MissionError, match="datum"):
            waypoint_from_dict({"lat": 41.0, "lon": -71.0, "depth": 1.0}, None, EarthFrame.ENU)


class TestTangentPlane:
    def test_north_offset(self):
        x, y = latlon_to_local(41.001, -71.0, (41.0, -71.0), EarthFrame.ENU)
        assert x == pytest.approx(0.0, abs=1e-9)
        assert y == pytest.approx(111.19, abs=0.2)  # ~111.2 m per mdeg latitude

    def test_east_offset_scales_with_cos_lat(self):
        x, y = latlon_to_local(41.0, -70.999, (41.0, -71.0), EarthFrame.ENU)
        assert y == pytest.approx(0.0, abs=1e-9)
        assert x == pytest.approx(111.19 * math.cos(math.radians(41.0)), abs=0.2)

    def test_ned_swaps_axes(self):
        xe, yn = latlon_to_local(41.001, -70.999, (41.0, -71.0), EarthFrame.ENU)
        xn, ye = latlon_to_local(41.001, -70.999, (41.0, -71.0), EarthFrame.NED)
        assert xn == pytest.approx(yn)
        assert ye == pytest.approx(xe)


class TestKml:
    def test_linestring_import(self):
        wps = import_kml(KML, (41.0, -71.0))
        assert len(wps) == 5
        assert wps[0].x == pytest.approx(0.0, abs=1e-9)
        assert wps[0].depth == 2.0
        assert wps[1].x == pytest.approx(111.19 * math.cos(math.radians(41.0)) * 0.001 * 1000, rel=0.01)

    def test_rejects_no_linestring(self):
        with pytest.raises(MissionError):
            import_kml("<kml></kml>", (41.0, -71.0))

    def test_load_mission_dispatches_kml(self, tmp_path):
        p = tmp_path / "track.kml"
        p.write_text(KML)
        wps = load_mission(p, (41.0, -71.0))
        assert len(wps) == 5


class TestMissionFile:
    def test_yaml_round(self, tmp_path):
        p = tmp_path / "m.yaml"
        p.write_text(
            "waypoints:\n"
            "  - {xy: [10, 0], depth: 3.0, speed: 0.8}\n"
            "  - {xy: [10, 10], altitude: 1.5}\n"
        )
        wps = load_mission(p)
        assert len(wps) == 2
        assert wps[1].altitude == 1.5

    def test_error_names_entry(self, tmp_path):
        p = tmp_path / "m.yaml"
        p.write_text("waypoints:\n  - {xy: [10, 0]}\n")
        with pytest.raises(MissionError, match=r"waypoints\[0\]"):
            load_mission(p)
