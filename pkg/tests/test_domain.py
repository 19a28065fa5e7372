import random
import string

import pytest

from restocloud.domain import (
    Restaurant,
    canonicalize_category,
    canonicalize_phone,
    validate_restaurant,
)
from restocloud.errors import InvalidField, InvalidPhone, ZoneMismatch
from restocloud.geolocation import GeoPoint, ZoneMap, point_in_polygon


def make_restaurant(**overrides) -> Restaurant:
    base = dict(
        restaurant_id="r1",
        name="Spice Route",
        address="12 River Road",
        contact="+91 98450 12345",
        food_style="Indian",
        position=(0.5, 0.5),
        zone_id="unit",
    )
    base.update(overrides)
    return Restaurant(**base)


class TestCanonicalizePhone:
    def test_strips_separators(self):
        assert canonicalize_phone("+91 98450-12345") == "919845012345"

    def test_minimum_length_already_canonical(self):
        assert canonicalize_phone("1234567") == "1234567"

    def test_rejects_non_digits(self):
        with pytest.raises(InvalidPhone):
            canonicalize_phone("12ab34")

    @pytest.mark.parametrize("raw", ["123456", "1234567890123456", "", "+"])
    def test_rejects_out_of_range_lengths(self, raw):
        with pytest.raises(InvalidPhone):
            canonicalize_phone(raw)

    def test_idempotent_on_accepted_inputs(self):
        rng = random.Random(1)
        for _ in range(300):
            digits = "".join(rng.choices(string.digits, k=rng.randint(7, 15)))
            decorated = "+" + "-".join([digits[:3], digits[3:6], digits[6:]])
            once = canonicalize_phone(decorated)
            assert canonicalize_phone(once) == once == digits

    def test_equality_is_canonical_form_equality(self):
        assert canonicalize_phone("+1-234-5678") == canonicalize_phone("12345678")


class TestServiceCategory:
    def test_lowercased(self):
        assert canonicalize_category("Indian") == "indian"

    def test_token_charset_enforced(self):
        with pytest.raises(InvalidField):
            canonicalize_category("thai food!")

    def test_length_cap(self):
        with pytest.raises(InvalidField):
            canonicalize_category("x" * 33)


class TestValidateRestaurant:
    def test_interior_point_passes(self, unit_square_zone):
        zones = ZoneMap(zones=(unit_square_zone,))
        record = make_restaurant()
        assert validate_restaurant(record, zones) is record

    def test_exterior_point_is_zone_mismatch(self, unit_square_zone):
        zones = ZoneMap(zones=(unit_square_zone,))
        with pytest.raises(ZoneMismatch):
            validate_restaurant(make_restaurant(position=(5.0, 5.0)), zones)

    def test_empty_name_rejected(self, unit_square_zone):
        zones = ZoneMap(zones=(unit_square_zone,))
        with pytest.raises(InvalidField):
            validate_restaurant(make_restaurant(name=""), zones)

    def test_empty_address_rejected(self, unit_square_zone):
        zones = ZoneMap(zones=(unit_square_zone,))
        with pytest.raises(InvalidField):
            validate_restaurant(make_restaurant(address="  "), zones)

    def test_accepts_iff_inside_and_fields_non_empty(self, unit_square_zone):
        # cross-check against the geometry predicate on random positions
        zones = ZoneMap(zones=(unit_square_zone,))
        rng = random.Random(7)
        for _ in range(200):
            pos = (rng.uniform(-1, 2), rng.uniform(-1, 2))
            record = make_restaurant(position=pos)
            should_pass = point_in_polygon(GeoPoint(*pos), unit_square_zone.polygon)
            if should_pass:
                assert validate_restaurant(record, zones) is record
            else:
                with pytest.raises(ZoneMismatch):
                    validate_restaurant(record, zones)

    def test_contact_canonicalized_on_construction(self):
        assert make_restaurant().contact == "919845012345"

    def test_wire_round_trip(self):
        record = make_restaurant()
        assert Restaurant.from_wire(record.wire_dict()) == record
