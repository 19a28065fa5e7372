import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for oracles.py

from restocloud.geolocation import Zone, ZoneMap


def square(x0: float, y0: float, side: float = 10.0) -> tuple:
    return ((x0, y0), (x0 + side, y0), (x0 + side, y0 + side), (x0, y0 + side))


@pytest.fixture
def unit_square_zone() -> Zone:
    return Zone(zone_id="unit", display_name="Unit Square", polygon=square(0, 0, 1))


@pytest.fixture
def single_zone_map() -> ZoneMap:
    zone = Zone(zone_id="A", display_name="Zone A", polygon=square(0, 0))
    return ZoneMap(zones=(zone,), rfid_tags={"T-17": "A"}).validate_geometry()


@pytest.fixture
def three_zone_map() -> ZoneMap:
    zones = (
        Zone(zone_id="downtown", display_name="Downtown", polygon=square(10, 0)),
        Zone(zone_id="riverside", display_name="Riverside", polygon=square(0, 0)),
        Zone(zone_id="uptown", display_name="Uptown", polygon=square(20, 0)),
    )
    tags = {"T-RS": "riverside", "T-DT": "downtown", "T-UP": "uptown"}
    return ZoneMap(zones=zones, rfid_tags=tags).validate_geometry()
