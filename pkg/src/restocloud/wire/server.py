"""Boot a node from its config: build the role's app, bind the socket,
run uvicorn in a background thread, and (for CUs) keep registering with
the CSP on a heartbeat.
"""

from __future__ import annotations

import logging
import socket
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import uvicorn
from fastapi import FastAPI

from ..cloudunit import CloudUnit, RestaurantStore, ingest_restaurants
from ..csp import CspNode
from ..errors import BindError, ConfigError
from ..lsp import LspNode
from .client import CspHttpClient, LspHttpClient, cu_search_http
from .cu_api import CuState, create_cu_app
from .csp_api import create_csp_app
from .files import NodeConfig, load_node_config, load_zone_map
from .lsp_api import create_lsp_app

log = logging.getLogger("restocloud")

STARTUP_TIMEOUT_SECONDS = 10.0


@dataclass
class NodeHandle:
    """A running node and everything needed to stop it."""

    role: str
    host: str
    port: int
    server: uvicorn.Server
    thread: threading.Thread
    stop_event: threading.Event = field(default_factory=threading.Event)
    background: list[threading.Thread] = field(default_factory=list)
    state: CuState | None = None

    @property
    def endpoint(self) -> str:
        return f"{self.host}:{self.port}"

    @property
    def url(self) -> str:
        return f"http://{self.host}:{self.port}"

    def stop(self, timeout: float = 5.0) -> None:
        self.stop_event.set()
        self.server.should_exit = True
        self.thread.join(timeout=timeout)
        for t in self.background:
            t.join(timeout=timeout)

    def join(self) -> None:
        self.thread.join()


def _bind(host: str, port: int) -> socket.socket:
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        sock.bind((host, port))
    except OSError as exc:
        sock.close()
        raise BindError(f"cannot bind {host}:{port}: {exc}") from None
    return sock


def _advertise_host(listen_host: str) -> str:
    return "127.0.0.1" if listen_host in ("0.0.0.0", "") else listen_host


def build_app(config: NodeConfig) -> tuple[FastAPI, CuState | None]:
    """Construct the role's FastAPI app from a validated config."""
    zone_map = load_zone_map(config.zones_file)

    if config.role == "lsp":
        node = LspNode(zone_map, accounts_file=config.accounts_file)
        return create_lsp_app(node), None

    if config.role == "csp":
        config.require("lsp_endpoint")
        lsp = LspHttpClient(config.lsp_endpoint)
        audit_path = config.audit_file or str(Path.cwd() / "csp-audit.jsonl")
        node = CspNode(
            zone_map,
            cu_search=cu_search_http,
            lsp_grant=lsp.subscribe,
            audit_path=audit_path,
            grant_on_escalation=config.grant_on_escalation,
            heartbeat_interval=config.heartbeat_interval,
        )
        return create_csp_app(node), None

    # cloud unit
    config.require("zone_id", "lsp_endpoint", "csp_endpoint")
    zone = zone_map.zone(config.zone_id)
    store = RestaurantStore()
    if config.seed_file:
        report = ingest_restaurants(config.seed_file, zone, store)
        if report.rejected:
            log.warning(
                "seed %s: %d loaded, %d rejected", config.seed_file,
                report.loaded, len(report.rejected),
            )
    lsp = LspHttpClient(config.lsp_endpoint)
    csp = CspHttpClient(config.csp_endpoint)
    unit = CloudUnit(zone, store, token_checker=lsp.introspect, escalate=csp.escalate)
    state = CuState()
    return create_cu_app(unit, state), state


def _heartbeat_loop(config: NodeConfig, state: CuState, advertised: str,
                    stop_event: threading.Event) -> None:
    csp = CspHttpClient(config.csp_endpoint)
    while not stop_event.is_set():
        try:
            csp.register_cu(config.zone_id, advertised)
            state.registered = True
        except Exception:
            state.registered = False
        stop_event.wait(config.heartbeat_interval)
    csp.close()


def serve(role: str, config: str | Path | NodeConfig, wait: bool = True) -> NodeHandle:
    """Start one node; returns once it answers (unless ``wait=False``)."""
    node_config = config if isinstance(config, NodeConfig) else load_node_config(config)
    if node_config.role != role:
        raise ConfigError(f"config is for role {node_config.role!r}, asked to serve {role!r}")

    host, port = node_config.listen_parts()
    sock = _bind(host, port)
    port = sock.getsockname()[1]

    app, state = build_app(node_config)

    uv_config = uvicorn.Config(app, log_level="warning", access_log=False)
    server = uvicorn.Server(uv_config)
    thread = threading.Thread(
        target=server.run, kwargs={"sockets": [sock]},
        name=f"{role}:{port}", daemon=True,
    )
    thread.start()

    handle = NodeHandle(
        role=role, host=_advertise_host(host), port=port, server=server,
        thread=thread, state=state,
    )

    if node_config.role == "cu":
        beat = threading.Thread(
            target=_heartbeat_loop,
            args=(node_config, state, handle.endpoint, handle.stop_event),
            name=f"heartbeat:{port}", daemon=True,
        )
        beat.start()
        handle.background.append(beat)

    if wait:
        deadline = time.monotonic() + STARTUP_TIMEOUT_SECONDS
        while not server.started:
            if time.monotonic() > deadline or not thread.is_alive():
                handle.stop()
                raise BindError(f"{role} failed to start on {host}:{port}")
            time.sleep(0.01)
    return handle
