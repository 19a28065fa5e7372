"""Shared vocabulary types: phone identities, service categories, restaurant
records, accounts, and session tokens.

Everything here is an immutable value; stores that mutate state live in the
tier modules (lsp, cloudunit, csp).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from pydantic import BaseModel, ConfigDict, field_validator

from .errors import InvalidField, InvalidPhone, ZoneMismatch
from .geolocation import GeoPoint, Zone, ZoneMap, point_in_polygon

_PHONE_RE = re.compile(r"^[0-9]{7,15}$")
_CATEGORY_RE = re.compile(r"^[a-z0-9_-]{1,32}$")


def canonicalize_phone(raw: str) -> str:
    """Canonical digit string for a phone number.

    Strips "+", spaces, and hyphens; the remainder must be 7-15 decimal
    digits. Two numbers are the same identity iff their canonical forms are
    equal.
    """
    stripped = raw.replace("+", "").replace(" ", "").replace("-", "")
    if not _PHONE_RE.match(stripped):
        raise InvalidPhone(f"not a 7-15 digit phone number: {raw!r}")
    return stripped


def canonicalize_category(raw: str) -> str:
    """Lowercase service-category token (food style doubles as category)."""
    token = raw.strip().lower()
    if not _CATEGORY_RE.match(token):
        raise InvalidField(f"not a valid service category: {raw!r}")
    return token


class Restaurant(BaseModel):
    """One record stored at a Cloud Unit.

    ``contact`` is kept canonical and ``food_style`` lowercase; ``position``
    must lie inside the zone named by ``zone_id`` (enforced by
    :func:`validate_restaurant`, which needs the zone geometry).
    """

    model_config = ConfigDict(frozen=True)

    restaurant_id: str
    name: str
    address: str
    contact: str
    food_style: str
    position: tuple[float, float]
    zone_id: str

    @field_validator("contact")
    @classmethod
    def _canonical_contact(cls, v: str) -> str:
        return canonicalize_phone(v)

    @field_validator("food_style")
    @classmethod
    def _canonical_style(cls, v: str) -> str:
        return canonicalize_category(v)

    def wire_dict(self) -> dict:
        """Flat wire/seed-file representation ({... x, y ...})."""
        return {
            "restaurant_id": self.restaurant_id,
            "name": self.name,
            "address": self.address,
            "contact": self.contact,
            "food_style": self.food_style,
            "x": self.position[0],
            "y": self.position[1],
            "zone_id": self.zone_id,
        }

    @classmethod
    def from_wire(cls, obj: dict) -> "Restaurant":
        return cls(
            restaurant_id=obj["restaurant_id"],
            name=obj["name"],
            address=obj["address"],
            contact=obj["contact"],
            food_style=obj["food_style"],
            position=(float(obj["x"]), float(obj["y"])),
            zone_id=obj["zone_id"],
        )


@dataclass(frozen=True)
class UserAccount:
    """Identity keyed by canonical phone number."""

    user_id: str
    credential_hash: bytes
    subscriptions: frozenset[str]
    created_at: float  # UTC seconds


@dataclass(frozen=True)
class AuthToken:
    """Opaque session credential binding a user to a current zone."""

    token: str  # 32 bytes as 64 lowercase hex chars
    user_id: str
    issued_at: float
    current_zone: str | None = None


def validate_restaurant(record: Restaurant, zones: ZoneMap) -> Restaurant:
    """Return ``record`` unchanged iff all its invariants hold.

    Raises ZoneMismatch when the position is outside the record's zone and
    InvalidField for an empty name, address, or id.
    """
    if not record.restaurant_id.strip():
        raise InvalidField("empty restaurant_id")
    if not record.name.strip():
        raise InvalidField("empty name")
    if not record.address.strip():
        raise InvalidField("empty address")
    zone = zones.zone(record.zone_id)
    if not point_in_polygon(GeoPoint(*record.position), zone.polygon):
        raise ZoneMismatch(
            f"{record.restaurant_id} at {record.position} is outside zone {zone.zone_id}"
        )
    return record
