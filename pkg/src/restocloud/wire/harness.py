"""Boot a whole topology (1 LSP + 1 CSP + one CU per zone) on localhost.

Seed files are picked up from a directory by zone id (``<zone_id>.jsonl``).
Ports default to ephemeral so parallel harnesses never collide; pass
``base_port`` for predictable ports (lsp=base, csp=base+1, cus=base+100+i).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

import httpx

from ..errors import ConfigError
from .files import NodeConfig, load_zone_map
from .scenario import Topology
from .server import NodeHandle, serve

HEALTH_TIMEOUT_SECONDS = 15.0


@dataclass
class DemoTopology:
    lsp: NodeHandle
    csp: NodeHandle
    cus: dict[str, NodeHandle] = field(default_factory=dict)

    def topology(self) -> Topology:
        return Topology(
            lsp_url=self.lsp.url,
            csp_url=self.csp.url,
            cu_urls={zone_id: handle.url for zone_id, handle in self.cus.items()},
        )

    def all_handles(self) -> list[NodeHandle]:
        return [self.lsp, self.csp, *self.cus.values()]

    def stop(self) -> None:
        for handle in self.all_handles():
            handle.stop()


def wait_healthy(urls: list[str], want: str = "ok",
                 timeout: float = HEALTH_TIMEOUT_SECONDS) -> None:
    deadline = time.monotonic() + timeout
    with httpx.Client(timeout=2.0) as client:
        pending = list(urls)
        while pending:
            url = pending[0]
            status = None
            try:
                envelope = client.get(url + "/healthz").json()
                status = (envelope.get("data") or {}).get("status")
            except httpx.HTTPError:
                pass
            if status == want:
                pending.pop(0)
                continue
            if time.monotonic() > deadline:
                raise ConfigError(f"{url} never became {want!r} (last: {status!r})")
            time.sleep(0.05)


def boot_demo(
    zones_file: str | Path,
    seed_dir: str | Path | None = None,
    host: str = "127.0.0.1",
    base_port: int | None = None,
    grant_on_escalation: bool = True,
    heartbeat_interval: float = 1.0,
    audit_file: str | Path | None = None,
) -> DemoTopology:
    zones_file = str(Path(zones_file).resolve())
    zone_map = load_zone_map(zones_file)
    seed_dir = Path(seed_dir) if seed_dir is not None else Path(zones_file).parent

    def port(offset: int) -> int:
        return 0 if base_port is None else base_port + offset

    lsp = serve("lsp", NodeConfig(
        role="lsp", listen=f"{host}:{port(0)}", zones_file=zones_file,
    ))
    csp = serve("csp", NodeConfig(
        role="csp", listen=f"{host}:{port(1)}", zones_file=zones_file,
        lsp_endpoint=lsp.endpoint,
        grant_on_escalation=grant_on_escalation,
        heartbeat_interval=heartbeat_interval,
        audit_file=str(audit_file) if audit_file else None,
    ))
    demo = DemoTopology(lsp=lsp, csp=csp)
    try:
        for i, zone in enumerate(sorted(zone_map.zones, key=lambda z: z.zone_id)):
            seed_file = seed_dir / f"{zone.zone_id}.jsonl"
            demo.cus[zone.zone_id] = serve("cu", NodeConfig(
                role="cu", listen=f"{host}:{port(100 + i)}", zones_file=zones_file,
                zone_id=zone.zone_id,
                lsp_endpoint=lsp.endpoint,
                csp_endpoint=csp.endpoint,
                seed_file=str(seed_file) if seed_file.exists() else None,
                heartbeat_interval=heartbeat_interval,
            ))
        wait_healthy([h.url for h in demo.all_handles()])
    except Exception:
        demo.stop()
        raise
    return demo
