import json
import random

import pytest

from restocloud.cloudunit import (
    CloudUnit,
    EscalationOutcome,
    EscalationRequest,
    RestaurantStore,
    TokenInfo,
    ingest_restaurants,
)
from restocloud.domain import Restaurant
from restocloud.errors import (
    CspUnreachable,
    InvalidToken,
    NotAuthorized,
    NotFound,
    ParseError,
    WrongZone,
)
from restocloud.geolocation import Zone

from conftest import square

RIVERSIDE = Zone(zone_id="riverside", display_name="Riverside", polygon=square(0, 0))


def record(rid, style="indian", pos=(5.0, 5.0), zone="riverside", name=None):
    return {
        "restaurant_id": rid,
        "name": name if name is not None else f"Place {rid}",
        "address": "1 Main St",
        "contact": "5550001111",
        "food_style": style,
        "x": pos[0],
        "y": pos[1],
        "zone_id": zone,
    }


def write_seed(tmp_path, rows, name="seed.jsonl"):
    path = tmp_path / name
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8")
    return path


def make_unit(store=None, subscriptions=("indian",), zone="riverside", escalate=None,
              current_zone="riverside", cache_seconds=2.0):
    """CloudUnit with a stub LSP: one user, fixed subscriptions."""
    info = {"value": TokenInfo("919845012345", frozenset(subscriptions), current_zone)}
    calls = {"n": 0}

    def checker(token):
        calls["n"] += 1
        if token != "good-token":
            raise InvalidToken()
        return info["value"]

    unit = CloudUnit(RIVERSIDE, store or RestaurantStore(), checker, escalate,
                     cache_seconds=cache_seconds)
    return unit, info, calls


class TestIngest:
    def test_counts_valid_records(self, tmp_path):
        path = write_seed(tmp_path, [record("r1"), record("r2", "chinese"), record("r3")])
        store = RestaurantStore()
        report = ingest_restaurants(path, RIVERSIDE, store)
        assert report.loaded == 3
        assert report.rejected == []
        assert len(store) == 3

    def test_out_of_zone_record_rejected(self, tmp_path):
        rows = [record("r1"), record("r2"), record("r3", pos=(55.0, 55.0))]
        path = write_seed(tmp_path, rows)
        store = RestaurantStore()
        report = ingest_restaurants(path, RIVERSIDE, store)
        assert report.loaded == 2
        assert [r.code for r in report.rejected] == ["ZoneMismatch"]
        assert report.rejected[0].line == 3

    def test_foreign_zone_id_rejected(self, tmp_path):
        path = write_seed(tmp_path, [record("r1", zone="uptown")])
        report = ingest_restaurants(path, RIVERSIDE, RestaurantStore())
        assert report.loaded == 0
        assert report.rejected[0].code == "ZoneMismatch"

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("", encoding="utf-8")
        assert ingest_restaurants(path, RIVERSIDE, RestaurantStore()).loaded == 0

    def test_malformed_json_aborts_with_line_number(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text(json.dumps(record("r1")) + "\n{not json\n", encoding="utf-8")
        with pytest.raises(ParseError) as err:
            ingest_restaurants(path, RIVERSIDE, RestaurantStore())
        assert "line 2" in err.value.detail

    def test_missing_key_is_parse_error(self, tmp_path):
        row = record("r1")
        del row["address"]
        path = write_seed(tmp_path, [row])
        with pytest.raises(ParseError):
            ingest_restaurants(path, RIVERSIDE, RestaurantStore())

    def test_empty_name_rejected_not_fatal(self, tmp_path):
        path = write_seed(tmp_path, [record("r1", name=""), record("r2")])
        report = ingest_restaurants(path, RIVERSIDE, RestaurantStore())
        assert report.loaded == 1
        assert report.rejected[0].code == "InvalidField"

    def test_store_equals_file_valid_records(self, tmp_path):
        rows = [record(f"r{i}", style=s) for i, s in enumerate(["indian", "thai", "indian"])]
        path = write_seed(tmp_path, rows)
        store = RestaurantStore()
        ingest_restaurants(path, RIVERSIDE, store)
        by_parse = sorted(
            (Restaurant.from_wire(json.loads(l)) for l in path.read_text().splitlines() if l),
            key=lambda r: r.restaurant_id,
        )
        assert store.all_sorted() == by_parse


class TestRestaurantStore:
    def test_inverted_index_matches_rebuild(self, tmp_path):
        rng = random.Random(9)
        store = RestaurantStore()
        styles = ["indian", "chinese", "thai", "mexican"]
        for batch in range(4):
            rows = [
                record(f"r{rng.randint(0, 30)}", style=rng.choice(styles))
                for _ in range(rng.randint(1, 15))
            ]
            ingest_restaurants(write_seed(tmp_path, rows, f"b{batch}.jsonl"), RIVERSIDE, store)
            rebuilt = {}
            for r in store.all_sorted():
                rebuilt.setdefault(r.food_style, set()).add(r.restaurant_id)
            assert store.index_snapshot() == rebuilt

    def test_upsert_replaces_category(self):
        store = RestaurantStore()
        store.upsert(Restaurant.from_wire(record("r1", style="indian")))
        store.upsert(Restaurant.from_wire(record("r1", style="thai")))
        assert store.by_category("indian") == []
        assert [r.restaurant_id for r in store.by_category("thai")] == ["r1"]


class TestListRestaurants:
    def test_sorted_enumeration(self):
        store = RestaurantStore()
        for rid in ("r2", "r1"):
            store.upsert(Restaurant.from_wire(record(rid)))
        unit, _, _ = make_unit(store)
        assert [r.restaurant_id for r in unit.list_restaurants("riverside")] == ["r1", "r2"]

    def test_empty_store(self):
        unit, _, _ = make_unit()
        assert unit.list_restaurants("riverside") == []

    def test_wrong_zone_flags_routing_bug(self):
        unit, _, _ = make_unit()
        with pytest.raises(WrongZone):
            unit.list_restaurants("uptown")


class TestHandleQuery:
    def fill(self, store):
        for rid, style in (("r1", "indian"), ("r2", "thai"), ("r3", "indian")):
            store.upsert(Restaurant.from_wire(record(rid, style=style)))

    def test_subscribed_category_served_locally(self):
        store = RestaurantStore()
        self.fill(store)
        unit, _, _ = make_unit(store)
        result = unit.handle_query("good-token", "indian")
        assert result.served_by == "local"
        assert result.source_zone == "riverside"
        assert [r.restaurant_id for r in result.restaurants] == ["r1", "r3"]
        assert all(r.zone_id == "riverside" for r in result.restaurants)

    def test_unsubscribed_category_escalates(self):
        store = RestaurantStore()
        self.fill(store)
        seen = []

        def escalate(req: EscalationRequest) -> EscalationOutcome:
            seen.append(req)
            rec = Restaurant.from_wire(record("u9", style="thai", zone="uptown", pos=(5, 5)))
            return EscalationOutcome(grouped={"uptown": [rec]}, granted_subscription=True)

        unit, _, _ = make_unit(store, escalate=escalate)
        result = unit.handle_query("good-token", "thai")
        assert result.served_by == "escalated"
        assert [r.restaurant_id for r in result.restaurants] == ["u9"]
        assert len(seen) == 1
        assert seen[0].category == "thai"
        assert seen[0].origin_zone == "riverside"

    def test_escalation_failure_reported(self):
        def escalate(req):
            raise CspUnreachable("connection refused")

        unit, _, _ = make_unit(escalate=escalate)
        with pytest.raises(CspUnreachable):
            unit.handle_query("good-token", "thai")

    def test_no_escalation_route_configured(self):
        unit, _, _ = make_unit(escalate=None)
        with pytest.raises(CspUnreachable):
            unit.handle_query("good-token", "thai")

    def test_invalid_token(self):
        unit, _, _ = make_unit()
        with pytest.raises(InvalidToken):
            unit.handle_query("bad-token", "indian")

    def test_token_in_other_zone_rejected(self):
        unit, _, _ = make_unit(current_zone="uptown")
        with pytest.raises(WrongZone):
            unit.handle_query("good-token", "indian")

    def test_local_iff_subscribed_randomized(self):
        rng = random.Random(31)
        styles = [f"s{i}" for i in range(8)]
        store = RestaurantStore()
        for i, style in enumerate(styles):
            store.upsert(Restaurant.from_wire(record(f"r{i}", style=style)))
        escalations = []

        def escalate(req):
            escalations.append(req.request_id)
            return EscalationOutcome(grouped={}, granted_subscription=False)

        for trial in range(30):
            subs = frozenset(rng.sample(styles, rng.randint(0, len(styles))))
            unit, info, _ = make_unit(store, subscriptions=subs, escalate=escalate,
                                      cache_seconds=0.0)
            before = len(escalations)
            category = rng.choice(styles)
            result = unit.handle_query("good-token", category)
            if category in subs:
                assert result.served_by == "local"
                expected = sorted(
                    (r for r in store.all_sorted() if r.food_style == category),
                    key=lambda r: r.restaurant_id,
                )
                assert result.restaurants == expected
                assert len(escalations) == before
            else:
                assert result.served_by == "escalated"
                assert len(escalations) == before + 1
        assert len(set(escalations)) == len(escalations)  # request ids unique

    def test_grant_invalidates_introspection_cache(self):
        store = RestaurantStore()
        self.fill(store)

        def escalate(req):
            # emulate the CSP's LSP-side grant
            info["value"] = TokenInfo(
                info["value"].user_id,
                info["value"].subscriptions | {req.category},
                info["value"].current_zone,
            )
            return EscalationOutcome(grouped={}, granted_subscription=True)

        unit, info, calls = make_unit(store, subscriptions=("indian",), escalate=escalate,
                                      cache_seconds=60.0)
        assert unit.handle_query("good-token", "thai").served_by == "escalated"
        # immediate repeat must see the fresh subscriptions despite the cache
        assert unit.handle_query("good-token", "thai").served_by == "local"

    def test_cache_bounds_lsp_calls(self):
        unit, _, calls = make_unit(cache_seconds=60.0)
        for _ in range(5):
            unit.handle_query("good-token", "indian")
        assert calls["n"] == 1


class TestGetRestaurantInfo:
    def test_authorized_read(self):
        store = RestaurantStore()
        store.upsert(Restaurant.from_wire(record("r1", style="indian")))
        unit, _, _ = make_unit(store)
        assert unit.get_restaurant_info("good-token", "r1").restaurant_id == "r1"

    def test_unknown_id(self):
        unit, _, _ = make_unit()
        with pytest.raises(NotFound):
            unit.get_restaurant_info("good-token", "ghost")

    def test_unsubscribed_category_not_authorized(self):
        store = RestaurantStore()
        store.upsert(Restaurant.from_wire(record("r1", style="thai")))
        unit, _, _ = make_unit(store, subscriptions=("indian",))
        with pytest.raises(NotAuthorized):
            unit.get_restaurant_info("good-token", "r1")
