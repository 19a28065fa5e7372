import random
import time
from collections import Counter

import pytest

from restocloud.cloudunit import EscalationRequest, RestaurantStore
from restocloud.csp import CspNode, CuDirectory
from restocloud.domain import Restaurant
from restocloud.errors import NoCuForZone, UnknownUser, UnknownZone
from restocloud.geolocation import Zone, ZoneMap

from conftest import square
from oracles import brute_force_category_union


def seed_row(rid, style, zone, pos):
    return {
        "restaurant_id": rid,
        "name": f"Place {rid}",
        "address": "2 High St",
        "contact": "5550002222",
        "food_style": style,
        "x": pos[0],
        "y": pos[1],
        "zone_id": zone,
    }


def build_fixture(rng, n_zones, max_restaurants=50):
    """Random zones side by side, each with a store and raw seed rows."""
    zones = tuple(
        Zone(zone_id=f"z{i:02d}", display_name=f"Zone {i}", polygon=square(10 * i, 0))
        for i in range(n_zones)
    )
    zone_map = ZoneMap(zones=zones)
    styles = ["indian", "chinese", "thai", "mexican", "italian"]
    stores: dict[str, RestaurantStore] = {}
    rows: dict[str, list[dict]] = {}
    for i, zone in enumerate(zones):
        store = RestaurantStore()
        zone_rows = []
        for j in range(rng.randint(0, max_restaurants)):
            pos = (10 * i + rng.uniform(0.1, 9.9), rng.uniform(0.1, 9.9))
            row = seed_row(f"{zone.zone_id}-r{j:03d}", rng.choice(styles), zone.zone_id, pos)
            store.upsert(Restaurant.from_wire(row))
            zone_rows.append(row)
        stores[zone.zone_id] = store
        rows[zone.zone_id] = zone_rows
    return zone_map, stores, rows


def make_csp(tmp_path, zone_map, stores, users=None, grant=True, **kwargs):
    """CspNode with in-process seams: endpoints are 'local://<zone>'."""
    users = users if users is not None else {"919845012345": set()}

    def cu_search(endpoint, category):
        zone_id = endpoint.removeprefix("local://")
        return stores[zone_id].by_category(category)

    def lsp_grant(user_id, category):
        if user_id not in users:
            raise UnknownUser(user_id)
        users[user_id].add(category)
        return sorted(users[user_id])

    node = CspNode(
        zone_map,
        cu_search=cu_search,
        lsp_grant=lsp_grant,
        audit_path=tmp_path / "audit.jsonl",
        grant_on_escalation=grant,
        **kwargs,
    )
    for zone_id in stores:
        node.register_cu(zone_id, f"local://{zone_id}")
    return node, users


class TestDirectory:
    def test_register_and_route(self):
        directory = CuDirectory()
        directory.register("downtown", "127.0.0.1:7101")
        assert directory.route("downtown") == "127.0.0.1:7101"

    def test_reregister_is_idempotent_heartbeat(self):
        directory = CuDirectory(heartbeat_interval=0.05)
        directory.register("downtown", "127.0.0.1:7101", now=0.0)
        directory.register("downtown", "127.0.0.1:7101", now=1.0)
        assert directory.live_endpoints("downtown", now=1.1) == ["127.0.0.1:7101"]

    def test_unregistered_zone(self):
        with pytest.raises(NoCuForZone):
            CuDirectory().route("nowhere")

    def test_round_robin_two_endpoints(self):
        directory = CuDirectory()
        directory.register("z", "cu-a")
        directory.register("z", "cu-b")
        picks = Counter(directory.route("z") for _ in range(4))
        assert picks == Counter({"cu-a": 2, "cu-b": 2})

    def test_round_robin_fairness_k_times_m(self):
        directory = CuDirectory()
        endpoints = [f"cu-{i}" for i in range(5)]
        for ep in endpoints:
            directory.register("z", ep)
        k = 7
        picks = Counter(directory.route("z") for _ in range(k * len(endpoints)))
        assert picks == Counter({ep: k for ep in endpoints})

    def test_dead_after_missed_beats(self):
        directory = CuDirectory(heartbeat_interval=1.0, missed_beats=3)
        directory.register("z", "cu-a", now=0.0)
        assert directory.live_endpoints("z", now=3.0) == ["cu-a"]
        assert directory.live_endpoints("z", now=3.1) == []
        with pytest.raises(NoCuForZone):
            directory.route("z", now=3.1)


class TestRegisterCu:
    def test_unknown_zone_rejected(self, tmp_path):
        zone_map = ZoneMap(zones=(Zone(zone_id="a", display_name="A", polygon=square(0, 0)),))
        node, _ = make_csp(tmp_path, zone_map, {"a": RestaurantStore()})
        with pytest.raises(UnknownZone):
            node.register_cu("nozone", "127.0.0.1:1")


class TestCrossLocationSearch:
    def test_category_in_one_zone_only(self, tmp_path):
        rng = random.Random(2)
        zone_map, stores, rows = build_fixture(rng, 3, max_restaurants=0)
        row = seed_row("z01-r000", "thai", "z01", (15, 5))
        stores["z01"].upsert(Restaurant.from_wire(row))
        rows["z01"].append(row)
        node, _ = make_csp(tmp_path, zone_map, stores)
        grouped, failed = node.cross_location_search("thai")
        assert failed == []
        assert {z: [r.restaurant_id for r in rs] for z, rs in grouped.items()} == {
            "z01": ["z01-r000"]
        }

    def test_no_matches_anywhere(self, tmp_path):
        rng = random.Random(3)
        zone_map, stores, _ = build_fixture(rng, 4)
        node, _ = make_csp(tmp_path, zone_map, stores)
        grouped, failed = node.cross_location_search("nosuchstyle")
        assert grouped == {} and failed == []

    def test_empty_directory(self, tmp_path):
        zone_map = ZoneMap(zones=(Zone(zone_id="a", display_name="A", polygon=square(0, 0)),))
        node, _ = make_csp(tmp_path, zone_map, {})
        assert node.cross_location_search("thai") == ({}, [])

    def test_matches_brute_force_union_on_random_fixtures(self, tmp_path):
        rng = random.Random(101)
        for trial in range(10):
            zone_map, stores, rows = build_fixture(rng, rng.randint(3, 10))
            node, _ = make_csp(tmp_path / f"t{trial}", zone_map, stores)
            for category in ("indian", "thai", "italian", "nosuch"):
                grouped, failed = node.cross_location_search(category)
                assert failed == []
                got = {z: [r.restaurant_id for r in rs] for z, rs in grouped.items()}
                assert got == brute_force_category_union(rows, category)

    def test_unreachable_zone_reported_not_fatal(self, tmp_path):
        rng = random.Random(4)
        zone_map, stores, rows = build_fixture(rng, 3, max_restaurants=10)

        def cu_search(endpoint, category):
            zone_id = endpoint.removeprefix("local://")
            if zone_id == "z01":
                raise ConnectionError("down")
            return stores[zone_id].by_category(category)

        node = CspNode(
            zone_map,
            cu_search=cu_search,
            lsp_grant=lambda u, c: [],
            audit_path=tmp_path / "audit.jsonl",
        )
        for zone_id in stores:
            node.register_cu(zone_id, f"local://{zone_id}")
        grouped, failed = node.cross_location_search("indian")
        assert failed == ["z01"]
        assert "z01" not in grouped

    def test_fanout_bounded_by_timeout_not_sum(self, tmp_path):
        zones = tuple(
            Zone(zone_id=f"z{i}", display_name=str(i), polygon=square(10 * i, 0))
            for i in range(6)
        )
        zone_map = ZoneMap(zones=zones)

        def slow_search(endpoint, category):
            time.sleep(0.4)
            return []

        node = CspNode(
            zone_map,
            cu_search=slow_search,
            lsp_grant=lambda u, c: [],
            audit_path=tmp_path / "audit.jsonl",
            fanout_timeout=1.0,
        )
        for z in zones:
            node.register_cu(z.zone_id, f"local://{z.zone_id}")
        start = time.perf_counter()
        grouped, failed = node.cross_location_search("x")
        elapsed = time.perf_counter() - start
        assert failed == []
        assert elapsed < 1.0  # six sequential 0.4 s calls would take 2.4 s


class TestHandleEscalation:
    def request(self, category, rid="req-1", user="919845012345"):
        return EscalationRequest(
            request_id=rid, user_id=user, origin_zone="z00", category=category
        )

    def test_grants_and_groups(self, tmp_path):
        rng = random.Random(5)
        zone_map, stores, rows = build_fixture(rng, 3)
        node, users = make_csp(tmp_path, zone_map, stores)
        outcome = node.handle_escalation(self.request("thai"))
        assert outcome.granted_subscription is True
        assert "thai" in users["919845012345"]
        got = {z: [r.restaurant_id for r in rs] for z, rs in outcome.grouped.items()}
        assert got == brute_force_category_union(rows, "thai")

    def test_unknown_user(self, tmp_path):
        rng = random.Random(6)
        zone_map, stores, _ = build_fixture(rng, 2)
        node, _ = make_csp(tmp_path, zone_map, stores)
        with pytest.raises(UnknownUser):
            node.handle_escalation(self.request("thai", user="000000000"))

    def test_no_grant_when_disabled(self, tmp_path):
        rng = random.Random(7)
        zone_map, stores, _ = build_fixture(rng, 2)
        node, users = make_csp(tmp_path, zone_map, stores, grant=False)
        outcome = node.handle_escalation(self.request("thai"))
        assert outcome.granted_subscription is False
        assert users["919845012345"] == set()

    def test_audit_exactly_once_per_request(self, tmp_path):
        rng = random.Random(8)
        zone_map, stores, _ = build_fixture(rng, 2)
        node, _ = make_csp(tmp_path, zone_map, stores)
        n = 25
        for i in range(n):
            node.handle_escalation(self.request("thai", rid=f"req-{i:03d}"))
        entries = node.audit.entries()
        assert len(entries) == n
        ids = [e["request_id"] for e in entries]
        assert len(set(ids)) == n
        assert all(e["origin_zone"] == "z00" and e["category"] == "thai" for e in entries)
