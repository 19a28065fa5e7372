"""Zone resolution from simulated positioning hardware.

Two ways in: range observations to known beacons (least-squares
trilateration, then point-in-zone) or an RFID tag read (table lookup).
Coordinates live on a flat local map in meters; there is no curvature.

All functions are pure; the only state is the loaded :class:`ZoneMap`.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from .errors import (
    ConfigError,
    DegenerateGeometry,
    NotCovered,
    Underdetermined,
    UnknownTag,
    UnknownZone,
)

# Relative singular-value cutoff below which beacon geometry is rejected.
_SINGULAR_TOL = 1e-9
# Perpendicular distance under which a point counts as on a polygon edge.
_EDGE_TOL = 1e-12


class GeoPoint(NamedTuple):
    x: float
    y: float


class BeaconObservation(NamedTuple):
    beacon: GeoPoint
    distance: float


class Zone(BaseModel):
    """Named polygonal region; polygon is a simple ring of >=3 vertices."""

    model_config = ConfigDict(frozen=True)

    zone_id: str
    display_name: str
    polygon: tuple[tuple[float, float], ...]

    @field_validator("polygon")
    @classmethod
    def _at_least_triangle(cls, v):
        if len(v) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        return v

    def centroid(self) -> GeoPoint:
        """Area centroid of the polygon ring (shoelace weights)."""
        a = 0.0
        cx = 0.0
        cy = 0.0
        n = len(self.polygon)
        for i in range(n):
            x1, y1 = self.polygon[i]
            x2, y2 = self.polygon[(i + 1) % n]
            w = x1 * y2 - x2 * y1
            a += w
            cx += (x1 + x2) * w
            cy += (y1 + y2) * w
        if abs(a) < 1e-18:
            raise ConfigError(f"zone {self.zone_id} has zero area")
        return GeoPoint(cx / (3.0 * a), cy / (3.0 * a))


class ZoneMap(BaseModel):
    """Every zone of the service area plus the RFID tag table."""

    model_config = ConfigDict(frozen=True)

    zones: tuple[Zone, ...]
    rfid_tags: dict[str, str] = {}

    def zone(self, zone_id: str) -> Zone:
        for z in self.zones:
            if z.zone_id == zone_id:
                return z
        raise UnknownZone(zone_id)

    def has_zone(self, zone_id: str) -> bool:
        return any(z.zone_id == zone_id for z in self.zones)

    def validate_geometry(self) -> "ZoneMap":
        """Check zone ids unique, tags resolvable, polygons simple with
        positive area, and zone interiors pairwise disjoint.

        Shared boundaries are fine; overlapping interiors are a
        configuration error.
        """
        from shapely.geometry import Polygon  # load-time validation only

        ids = [z.zone_id for z in self.zones]
        if len(set(ids)) != len(ids):
            raise ConfigError("duplicate zone_id in zone map")
        for tag, zone_id in self.rfid_tags.items():
            if not self.has_zone(zone_id):
                raise ConfigError(f"rfid tag {tag!r} maps to unknown zone {zone_id!r}")
        polys = {}
        for z in self.zones:
            poly = Polygon(z.polygon)
            if not poly.is_valid:
                raise ConfigError(f"zone {z.zone_id} polygon is not simple")
            if poly.area <= 0:
                raise ConfigError(f"zone {z.zone_id} polygon has no area")
            polys[z.zone_id] = poly
        for i, a in enumerate(ids):
            for b in ids[i + 1:]:
                if polys[a].intersection(polys[b]).area > 1e-9:
                    raise ConfigError(f"zones {a} and {b} overlap")
        return self


_GN_MAX_STEPS = 40
_GN_STEP_TOL = 1e-10  # meters


def trilaterate(observations: Sequence[BeaconObservation]) -> GeoPoint:
    """Point minimizing the sum of squared range residuals.

    Linearizes by subtracting the first range equation, solves the linear
    least-squares system, then refines with damped Gauss-Newton on the true
    residuals until the step stalls.
    """
    if len(observations) < 3:
        raise Underdetermined(f"{len(observations)} observations, need >= 3")
    beacons = np.array([[o.beacon.x, o.beacon.y] for o in observations], dtype=float)
    dists = np.array([o.distance for o in observations], dtype=float)
    if not (np.isfinite(beacons).all() and np.isfinite(dists).all()):
        raise ValueError("non-finite beacon coordinates or distances")
    if (dists < 0).any():
        raise ValueError("negative range")

    # ||p - b_i||^2 = d_i^2, minus the first equation:
    #   2 (b_i - b_0) . p = d_0^2 - d_i^2 + ||b_i||^2 - ||b_0||^2
    a_mat = 2.0 * (beacons[1:] - beacons[0])
    norms = (beacons ** 2).sum(axis=1)
    rhs = dists[0] ** 2 - dists[1:] ** 2 + norms[1:] - norms[0]

    svals = np.linalg.svd(a_mat, compute_uv=False)
    if svals[-1] < _SINGULAR_TOL * svals[0]:
        raise DegenerateGeometry("beacons are collinear")

    p, *_ = np.linalg.lstsq(a_mat, rhs, rcond=None)
    best_res = _sum_sq_residual(p, beacons, dists)
    for _ in range(_GN_MAX_STEPS):
        step = _gauss_newton_step(p, beacons, dists)
        if step is None:
            break
        # backtrack a worsening step rather than overshoot
        improved = False
        for _ in range(8):
            candidate = p - step
            res = _sum_sq_residual(candidate, beacons, dists)
            if res <= best_res:
                improved = True
                break
            step = step / 2.0
        if not improved:
            break
        moved = float(np.hypot(*(candidate - p)))
        p, best_res = candidate, res
        if moved < _GN_STEP_TOL:
            break
    return GeoPoint(float(p[0]), float(p[1]))


def _gauss_newton_step(p: np.ndarray, beacons: np.ndarray, dists: np.ndarray) -> np.ndarray | None:
    diff = p - beacons
    ranges = np.hypot(diff[:, 0], diff[:, 1])
    usable = ranges > 1e-12  # gradient undefined at a beacon itself
    if usable.sum() < 2:
        return None
    jac = diff[usable] / ranges[usable, None]
    res = ranges[usable] - dists[usable]
    step, *_ = np.linalg.lstsq(jac, res, rcond=None)
    return step


def _sum_sq_residual(p: np.ndarray, beacons: np.ndarray, dists: np.ndarray) -> float:
    diff = p - beacons
    r = np.hypot(diff[:, 0], diff[:, 1]) - dists
    return float((r ** 2).sum())


def residual_rms(p: GeoPoint, observations: Sequence[BeaconObservation]) -> float:
    """Post-fit RMS range residual, for callers that want to threshold fixes."""
    beacons = np.array([[o.beacon.x, o.beacon.y] for o in observations], dtype=float)
    dists = np.array([o.distance for o in observations], dtype=float)
    return math.sqrt(_sum_sq_residual(np.array(p, dtype=float), beacons, dists) / len(observations))


def point_in_polygon(p: GeoPoint, polygon: Sequence[tuple[float, float]]) -> bool:
    """True iff ``p`` is inside the simple polygon or on its boundary."""
    x, y = p
    inside = False
    n = len(polygon)
    for i in range(n):
        x1, y1 = polygon[i]
        x2, y2 = polygon[(i + 1) % n]
        if _on_segment(x, y, x1, y1, x2, y2):
            return True
        if (y1 > y) != (y2 > y):
            # x where the edge crosses the horizontal through y
            x_cross = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x_cross > x:
                inside = not inside
    return inside


def _on_segment(x: float, y: float, x1: float, y1: float, x2: float, y2: float) -> bool:
    ex, ey = x2 - x1, y2 - y1
    length = math.hypot(ex, ey)
    if length == 0.0:
        return math.hypot(x - x1, y - y1) <= _EDGE_TOL
    cross = ex * (y - y1) - ey * (x - x1)
    if abs(cross) / length > _EDGE_TOL * max(1.0, length):
        return False
    t = ((x - x1) * ex + (y - y1) * ey) / (length * length)
    return -_EDGE_TOL <= t <= 1.0 + _EDGE_TOL


def resolve_gps(
    observations: Sequence[BeaconObservation], zone_map: ZoneMap
) -> tuple[str, GeoPoint]:
    """Trilaterate, then name the zone containing the fix.

    A point on a shared boundary resolves to the lexicographically smallest
    zone_id so downstream CU routing is deterministic.
    """
    point = trilaterate(observations)
    containing = [z.zone_id for z in zone_map.zones if point_in_polygon(point, z.polygon)]
    if not containing:
        raise NotCovered(f"({point.x:.3f}, {point.y:.3f}) lies in no zone")
    return min(containing), point


def resolve_rfid(tag_id: str, zone_map: ZoneMap) -> str:
    """Zone mapped to a physical tag."""
    try:
        return zone_map.rfid_tags[tag_id]
    except KeyError:
        raise UnknownTag(tag_id) from None
