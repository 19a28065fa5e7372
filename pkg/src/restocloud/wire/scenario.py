"""Scripted user journeys against a running topology.

Each step is one actor action (register/login/locate/list/query/detail);
the runner keeps per-actor session state (credentials, token, zone), so a
step like {"actor": "alice", "action": "login"} reuses alice's registered
credentials. Steps may carry an ``expect`` object that is subset-matched
against the response envelope; the first mismatch fails the run.
"""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..errors import ConfigError, StepFailed
from .client import UserClient
from .files import Scenario, ScenarioStep

_TOKEN_RE = re.compile(r"[0-9a-f]{64}")


@dataclass
class Topology:
    """Where the runner finds the nodes."""

    lsp_url: str
    csp_url: str | None = None
    cu_urls: dict[str, str] = field(default_factory=dict)

    def cu_for_zone(self, zone_id: str | None) -> str:
        if zone_id is None or zone_id not in self.cu_urls:
            raise ConfigError(f"no CU endpoint known for zone {zone_id!r}")
        return self.cu_urls[zone_id]


@dataclass
class ActorState:
    phone: str | None = None
    password: str | None = None
    user_id: str | None = None
    token: str | None = None
    zone_id: str | None = None


@dataclass
class StepRecord:
    index: int
    actor: str
    action: str
    request: dict[str, Any]
    response: dict[str, Any]
    latency_ms: float
    served_by: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "index": self.index,
            "actor": self.actor,
            "action": self.action,
            "request": self.request,
            "response": self.response,
            "latency_ms": round(self.latency_ms, 3),
            "served_by": self.served_by,
        }


@dataclass
class Transcript:
    records: list[StepRecord] = field(default_factory=list)
    failed_step: int | None = None

    @property
    def ok(self) -> bool:
        return self.failed_step is None

    def write(self, path: str | Path) -> None:
        lines = [json.dumps(r.to_dict(), sort_keys=True) for r in self.records]
        Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")

    def normalized(self) -> list[dict[str, Any]]:
        """Records with latency dropped and token values masked, for
        run-to-run determinism comparison."""
        out = []
        for record in self.records:
            obj = record.to_dict()
            obj.pop("latency_ms")
            out.append(json.loads(_TOKEN_RE.sub("<token>", json.dumps(obj, sort_keys=True))))
        return out


def _subset_match(expected: Any, actual: Any) -> bool:
    if isinstance(expected, dict):
        if not isinstance(actual, dict):
            return False
        return all(k in actual and _subset_match(v, actual[k]) for k, v in expected.items())
    if isinstance(expected, list):
        return isinstance(actual, list) and expected == actual
    return expected == actual


class ScenarioRunner:
    def __init__(self, topology: Topology, client: UserClient | None = None):
        self.topology = topology
        self.client = client or UserClient(topology.lsp_url)
        self.actors: dict[str, ActorState] = {}

    def _actor(self, name: str) -> ActorState:
        return self.actors.setdefault(name, ActorState())

    def _execute(self, step: ScenarioStep) -> tuple[dict, dict]:
        actor = self._actor(step.actor)
        args = step.args
        if step.action == "register":
            request = {
                "phone": args["phone"],
                "password": args["password"],
                "preferences": args.get("preferences", []),
            }
            response = self.client.register(**request)
            if response.get("status") == "ok":
                actor.phone = args["phone"]
                actor.password = args["password"]
                actor.user_id = response["data"]["user_id"]
            return request, response
        if step.action == "login":
            user_id = args.get("user_id", actor.user_id or actor.phone)
            password = args.get("password", actor.password)
            if user_id is None or password is None:
                raise ConfigError(
                    f"step for {step.actor!r}: login before register and no explicit credentials"
                )
            response = self.client.login(user_id, password)
            if response.get("status") == "ok":
                actor.token = response["data"]["token"]
            return {"user_id": user_id, "password": "***"}, response
        if step.action == "locate":
            method = args.get("method", "rfid" if "tag" in args else "gps")
            if method == "rfid":
                response = self.client.locate_rfid(args["tag"])
            else:
                observations = [tuple(o) for o in args["observations"]]
                response = self.client.locate_gps(observations)
            if response.get("status") == "ok" and actor.token:
                zone_id = response["data"]["zone_id"]
                presence = self.client.record_presence(actor.token, zone_id)
                if presence.get("status") == "ok":
                    actor.zone_id = zone_id
                else:
                    response = presence  # surface the presence failure
            return {"method": method, "args": args}, response
        # remaining actions hit the actor's current-zone CU with their token;
        # the transcript records the logical zone, not the physical endpoint
        cu = self.topology.cu_for_zone(actor.zone_id)
        token = actor.token or ""
        if step.action == "list":
            return {"zone": actor.zone_id}, self.client.restaurants(cu, token)
        if step.action == "query":
            request = {"zone": actor.zone_id, "category": args["category"]}
            return request, self.client.query(cu, token, args["category"])
        if step.action == "detail":
            request = {"zone": actor.zone_id, "restaurant_id": args["restaurant_id"]}
            return request, self.client.restaurant_info(cu, token, args["restaurant_id"])
        raise ConfigError(f"unknown action {step.action!r}")

    def run(self, scenario: Scenario, transcript_path: str | Path | None = None) -> Transcript:
        transcript = Transcript()
        try:
            for index, step in enumerate(scenario.steps):
                start = time.perf_counter()
                request, response = self._execute(step)
                latency_ms = (time.perf_counter() - start) * 1000
                transcript.records.append(
                    StepRecord(
                        index=index,
                        actor=step.actor,
                        action=step.action,
                        request=request,
                        response=response,
                        latency_ms=latency_ms,
                        served_by=(response.get("data") or {}).get("served_by"),
                    )
                )
                if step.expect is not None and not _subset_match(step.expect, response):
                    transcript.failed_step = index
                    break
                if step.expect is None and response.get("status") != "ok":
                    # undeclared failures stop the run too
                    transcript.failed_step = index
                    break
        finally:
            if transcript_path is not None:
                transcript.write(transcript_path)
        if transcript.failed_step is not None:
            exc = StepFailed(
                transcript.failed_step,
                f"step {transcript.failed_step} "
                f"({scenario.steps[transcript.failed_step].action}) mismatched",
            )
            exc.transcript = transcript
            raise exc
        return transcript


def run_scenario(
    scenario: Scenario,
    topology: Topology,
    transcript_path: str | Path | None = None,
) -> Transcript:
    runner = ScenarioRunner(topology)
    try:
        return runner.run(scenario, transcript_path)
    finally:
        runner.client.close()
