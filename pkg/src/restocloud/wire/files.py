"""File formats: zones map, restaurant seed files, node configs, scenarios.

Syntax problems raise ParseError; semantic problems (bad geometry,
inconsistent fields) raise ConfigError. Config and scenario files carry a
top-level ``"v": 1``.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, ValidationError

from ..errors import ConfigError, ParseError
from ..geolocation import Zone, ZoneMap

FORMAT_VERSION = 1


def _load_json(path: str | Path) -> Any:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}") from None


def load_zone_map(path: str | Path) -> ZoneMap:
    """Zones file: {"zones": [{zone_id, display_name, polygon}], "rfid_tags": {...}}."""
    obj = _load_json(path)
    if not isinstance(obj, dict) or "zones" not in obj:
        raise ParseError(f"{path}: expected an object with a 'zones' list")
    try:
        zones = tuple(
            Zone(
                zone_id=z["zone_id"],
                display_name=z.get("display_name", z["zone_id"]),
                polygon=tuple((float(x), float(y)) for x, y in z["polygon"]),
            )
            for z in obj["zones"]
        )
        tags = {str(k): str(v) for k, v in obj.get("rfid_tags", {}).items()}
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: malformed zone entry: {exc}") from None
    return ZoneMap(zones=zones, rfid_tags=tags).validate_geometry()


def dump_zone_map(zone_map: ZoneMap) -> dict:
    """Writer counterpart; coordinates are capped at 6 decimal places."""
    return {
        "zones": [
            {
                "zone_id": z.zone_id,
                "display_name": z.display_name,
                "polygon": [[round(x, 6), round(y, 6)] for x, y in z.polygon],
            }
            for z in zone_map.zones
        ],
        "rfid_tags": dict(sorted(zone_map.rfid_tags.items())),
    }


def read_seed_records(path: str | Path) -> list[dict]:
    """Raw seed-file lines as dicts; validation happens at the CU."""
    records = []
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: line {line_no}: {exc.msg}") from None
        if not isinstance(obj, dict):
            raise ParseError(f"{path}: line {line_no}: expected an object")
        records.append(obj)
    return records


class NodeConfig(BaseModel):
    """One node's config file."""

    model_config = ConfigDict(extra="forbid")

    v: int = FORMAT_VERSION
    role: Literal["lsp", "cu", "csp"]
    listen: str  # host:port, port 0 for ephemeral
    zones_file: str
    lsp_endpoint: str | None = None
    csp_endpoint: str | None = None
    zone_id: str | None = None
    seed_file: str | None = None
    grant_on_escalation: bool = True
    audit_file: str | None = None
    accounts_file: str | None = None
    heartbeat_interval: float = 5.0

    def require(self, *fields: str) -> None:
        missing = [f for f in fields if getattr(self, f) is None]
        if missing:
            raise ConfigError(f"{self.role} config missing {', '.join(missing)}")

    def listen_parts(self) -> tuple[str, int]:
        host, sep, port = self.listen.rpartition(":")
        if not sep or not port.isdigit():
            raise ConfigError(f"listen must be host:port, got {self.listen!r}")
        return host or "127.0.0.1", int(port)


def load_node_config(path: str | Path) -> NodeConfig:
    obj = _load_json(path)
    try:
        config = NodeConfig.model_validate(obj)
    except ValidationError as exc:
        raise ConfigError(f"{path}: {exc.errors()[0]['msg']} "
                          f"({'.'.join(str(p) for p in exc.errors()[0]['loc'])})") from None
    if config.v != FORMAT_VERSION:
        raise ConfigError(f"{path}: unsupported config version {config.v}")
    # relative paths resolve against the config file's directory
    base = Path(path).parent
    for attr in ("zones_file", "seed_file", "audit_file", "accounts_file"):
        value = getattr(config, attr)
        if value is not None and not Path(value).is_absolute():
            setattr(config, attr, str(base / value))
    return config


class ScenarioStep(BaseModel):
    model_config = ConfigDict(extra="forbid")

    actor: str
    action: Literal["register", "login", "locate", "list", "query", "detail"]
    args: dict[str, Any] = {}
    expect: dict[str, Any] | None = None


class Scenario(BaseModel):
    model_config = ConfigDict(extra="forbid")

    v: int = FORMAT_VERSION
    steps: list[ScenarioStep] = []


def load_scenario(path: str | Path) -> Scenario:
    obj = _load_json(path)
    try:
        scenario = Scenario.model_validate(obj)
    except ValidationError as exc:
        raise ConfigError(f"{path}: {exc.errors()[0]['msg']}") from None
    if scenario.v != FORMAT_VERSION:
        raise ConfigError(f"{path}: unsupported scenario version {scenario.v}")
    return scenario
