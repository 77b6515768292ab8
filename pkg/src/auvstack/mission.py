"""Waypoint missions: local/geodetic positions, YAML files, KML import.

Waypoints carry a horizontal position (local tangent-frame meters, or lat/lon
degrees resolved through a configured datum), exactly one of depth (m,
positive down) or altitude (m above the seabed), and an optional speed.

Geodetic conversion is a flat-earth tangent-plane approximation around the
datum; that is sufficient for the local simulator worlds this stack drives.
"""

from __future__ import annotations

import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path

import yaml

from .frames import EarthFrame

EARTH_RADIUS_M = 6371000.0


class MissionError(ValueError):
    pass


def latlon_to_local(
    lat: float, lon: float, datum: tuple[float, float], frame: EarthFrame
) -> tuple[float, float]:
    """Flat-earth offset of (lat, lon) from the datum, in the local frame axes."""
    lat0, lon0 = datum
    north = math.radians(lat - lat0) * EARTH_RADIUS_M
    east = math.radians(lon - lon0) * EARTH_RADIUS_M * math.cos(math.radians(lat0))
    if frame is EarthFrame.ENU:
        return east, north
    return north, east


@dataclass
class Waypoint:
    """One mission waypoint. Exactly one of depth/altitude must be set."""

    x: float
    y: float
    depth: float | None = None
    altitude: float | None = None
    speed: float | None = None

    def __post_init__(self):
        if (self.depth is None) == (self.altitude is None):
            raise MissionError("waypoint needs exactly one of depth or altitude")
        if self.speed is not None and self.speed <= 0.0:
            raise MissionError("waypoint speed must be > 0")
        for v in (self.x, self.y, self.depth, self.altitude, self.speed):
            if v is not None and not math.isfinite(v):
                raise MissionError("waypoint fields must be finite")

    def resolve_depth(self, seabed_depth: float) -> float:
        """Commanded depth, converting altitude via the flat simulated seabed."""
        if self.depth is not None:
            return self.depth
        return seabed_depth - self.altitude

    def to_dict(self) -> dict:
        d: dict = {"xy": [self.x, self.y]}
        if self.depth is not None:
            d["depth"] = self.depth
        if self.altitude is not None:
            d["altitude"] = self.altitude
        if self.speed is not None:
            d["speed"] = self.speed
        return d


def waypoint_from_dict(
    entry: dict,
    datum: tuple[float, float] | None,
    frame: EarthFrame,
    where: str = "waypoint",
) -> Waypoint:
    if not isinstance(entry, dict):
        raise MissionError(f"{where}: expected a mapping")
    has_xy = "xy" in entry
    has_geo = "lat" in entry or "lon" in entry
    if has_xy == has_geo:
        raise MissionError(f"{where}: give either xy or lat/lon")
    if has_xy:
        xy = entry["xy"]
        if not (isinstance(xy, (list, tuple)) and len(xy) == 2):
            raise MissionError(f"{where}.xy: expected [x, y]")
        x, y = float(xy[0]), float(xy[1])
    else:
        if "lat" not in entry or "lon" not in entry:
            raise MissionError(f"{where}: lat and lon must appear together")
        if datum is None:
            raise MissionError(f"{where}: lat/lon waypoints need a configured datum")
        x, y = latlon_to_local(float(entry["lat"]), float(entry["lon"]), datum, frame)
    try:
        return Waypoint(
            x=x,
            y=y,
            depth=None if entry.get("depth") is None else float(entry["depth"]),
            altitude=None if entry.get("altitude") is None else float(entry["altitude"]),
            speed=None if entry.get("speed") is None else float(entry["speed"]),
        )
    except MissionError as e:
        raise MissionError(f"{where}: {e}") from None


def load_mission(
    path: str | Path,
    datum: tuple[float, float] | None = None,
    frame: EarthFrame = EarthFrame.ENU,
) -> list[Waypoint]:
    path = Path(path)
    if path.suffix.lower() == ".kml":
        return import_kml(path.read_text(), datum, frame)
    data = yaml.safe_load(path.read_text())
    if not isinstance(data, dict) or "waypoints" not in data:
        raise MissionError(f"{path}: mission file needs a top-level 'waypoints' list")
    wps = data["waypoints"]
    if not isinstance(wps, list) or not wps:
        raise MissionError(f"{path}: waypoints must be a non-empty list")
    return [
        waypoint_from_dict(w, datum, frame, where=f"waypoints[{i}]") for i, w in enumerate(wps)
    ]


def import_kml(
    text: str,
    datum: tuple[float, float] | None,
    frame: EarthFrame = EarthFrame.ENU,
) -> list[Waypoint]:
    """Waypoints from the first LineString of a KML document.

    KML coordinate triples are lon,lat,third; the third value is taken as a
    positive-down depth in meters (0 when omitted).
    """
    try:
        root = ET.fromstring(text)
    except ET.ParseError as e:
        raise MissionError(f"KML parse error: {e}") from None
    coords_el = None
    for el in root.iter():
        if el.tag.rsplit("}", 1)[-1] == "LineString":
            for sub in el.iter():
                if sub.tag.rsplit("}", 1)[-1] == "coordinates":
                    coords_el = sub
                    break
        if coords_el is not None:
            break
    if coords_el is None or not (coords_el.text or "").strip():
        raise MissionError("KML has no LineString coordinates")
    if datum is None:
        raise MissionError("KML import needs a configured datum")
    waypoints = []
    for i, token in enumerate(coords_el.text.split()):
        parts = token.split(",")
        if len(parts) < 2:
            raise MissionError(f"KML coordinate {i}: expected lon,lat[,depth]")
        lon, lat = float(parts[0]), float(parts[1])
        depth = float(parts[2]) if len(parts) > 2 else 0.0
        x, y = latlon_to_local(lat, lon, datum, frame)
        waypoints.append(Waypoint(x=x, y=y, depth=depth))
    return waypoints
