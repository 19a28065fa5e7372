"""Command-line entry points: run nodes, seed a live CU, drive the thin
client, replay scenarios, and boot the demo topology."""

from __future__ import annotations

import json
import sys

import click

from .errors import ServiceError, StepFailed
from .wire.client import UserClient
from .wire.files import load_scenario, read_seed_records
from .wire.harness import boot_demo
from .wire.scenario import Topology, run_scenario
from .wire.server import serve as serve_node


def echo_json(obj) -> None:
    click.echo(json.dumps(obj, indent=2, sort_keys=True))


def fail(exc: ServiceError) -> None:
    click.echo(f"{exc.code}: {exc.detail}" if exc.detail else exc.code, err=True)
    sys.exit(1)


@click.group()
def main() -> None:
    """Location-based restaurant platform (LSP / CU / CSP)."""


@main.command()
@click.argument("role", type=click.Choice(["lsp", "cu", "csp"]))
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
def serve(role: str, config_path: str) -> None:
    """Run one node until interrupted."""
    try:
        handle = serve_node(role, config_path)
    except ServiceError as exc:
        fail(exc)
    click.echo(f"{role} listening on {handle.url}")
    try:
        handle.join()
    except KeyboardInterrupt:
        handle.stop()


@main.command()
@click.option("--cu", "cu_endpoint", required=True, help="CU endpoint (host:port)")
@click.option("--file", "seed_path", required=True, type=click.Path(exists=True))
def seed(cu_endpoint: str, seed_path: str) -> None:
    """Bulk-load a restaurants seed file into a running CU."""
    try:
        records = read_seed_records(seed_path)
    except ServiceError as exc:
        fail(exc)
    client = UserClient()
    try:
        envelope = client.seed(cu_endpoint, records)
    finally:
        client.close()
    echo_json(envelope)
    sys.exit(0 if envelope.get("status") == "ok" else 1)


@main.group()
def client() -> None:
    """Thin client for the documented endpoints."""


def _client_call(fn) -> None:
    envelope = fn()
    echo_json(envelope)
    sys.exit(0 if envelope.get("status") == "ok" else 1)


@client.command()
@click.option("--lsp", required=True, help="LSP endpoint")
@click.option("--phone", required=True)
@click.option("--password", required=True)
@click.option("--prefer", default="", help="comma-separated categories")
def register(lsp: str, phone: str, password: str, prefer: str) -> None:
    preferences = [c.strip() for c in prefer.split(",") if c.strip()]
    with_client = UserClient(lsp)
    _client_call(lambda: with_client.register(phone, password, preferences))


@client.command()
@click.option("--lsp", required=True)
@click.option("--user-id", required=True)
@click.option("--password", required=True)
def login(lsp: str, user_id: str, password: str) -> None:
    with_client = UserClient(lsp)
    _client_call(lambda: with_client.login(user_id, password))


@client.command()
@click.option("--lsp", required=True)
@click.option("--token", required=True)
@click.option("--tag", default=None, help="RFID tag id")
@click.option("--obs", default=None,
              help='GPS observations "bx,by,d;bx,by,d;..."')
def locate(lsp: str, token: str, tag: str | None, obs: str | None) -> None:
    """Resolve the zone (RFID or GPS) and record presence there."""
    with_client = UserClient(lsp)
    if (tag is None) == (obs is None):
        click.echo("exactly one of --tag / --obs is required", err=True)
        sys.exit(2)

    def call():
        if tag is not None:
            envelope = with_client.locate_rfid(tag)
        else:
            triples = [tuple(float(v) for v in part.split(",")) for part in obs.split(";")]
            envelope = with_client.locate_gps(triples)
        if envelope.get("status") == "ok":
            presence = with_client.record_presence(token, envelope["data"]["zone_id"])
            if presence.get("status") != "ok":
                return presence
        return envelope

    _client_call(call)


@client.command()
@click.option("--cu", required=True)
@click.option("--token", required=True)
def restaurants(cu: str, token: str) -> None:
    with_client = UserClient()
    _client_call(lambda: with_client.restaurants(cu, token))


@client.command()
@click.option("--cu", required=True)
@click.option("--token", required=True)
@click.option("--category", required=True)
def query(cu: str, token: str, category: str) -> None:
    with_client = UserClient()
    _client_call(lambda: with_client.query(cu, token, category))


@client.command()
@click.option("--cu", required=True)
@click.option("--token", required=True)
@click.option("--id", "restaurant_id", required=True)
def info(cu: str, token: str, restaurant_id: str) -> None:
    with_client = UserClient()
    _client_call(lambda: with_client.restaurant_info(cu, token, restaurant_id))


@main.group()
def scenario() -> None:
    """Scripted journeys."""


@scenario.command("run")
@click.argument("path", type=click.Path(exists=True))
@click.option("--lsp", required=True)
@click.option("--csp", default=None)
@click.option("--cu", "cus", multiple=True, help="zone=endpoint, repeatable")
@click.option("--out", default=None, type=click.Path(), help="transcript JSONL path")
def scenario_run(path: str, lsp: str, csp: str | None, cus: tuple[str, ...],
                 out: str | None) -> None:
    from .wire.client import http_url

    cu_urls = {}
    for pair in cus:
        zone_id, sep, endpoint = pair.partition("=")
        if not sep:
            click.echo(f"--cu wants zone=endpoint, got {pair!r}", err=True)
            sys.exit(2)
        cu_urls[zone_id] = http_url(endpoint)
    topology = Topology(
        lsp_url=http_url(lsp),
        csp_url=http_url(csp) if csp else None,
        cu_urls=cu_urls,
    )
    try:
        transcript = run_scenario(load_scenario(path), topology, transcript_path=out)
    except StepFailed as exc:
        click.echo(f"StepFailed: step {exc.step_index} mismatched", err=True)
        sys.exit(1)
    except ServiceError as exc:
        fail(exc)
    click.echo(f"{len(transcript.records)} steps ok")
    sys.exit(0)


@main.group()
def demo() -> None:
    """Desk-scale demo topology."""


@demo.command("up")
@click.option("--zones", "zones_file", required=True, type=click.Path(exists=True))
@click.option("--seed-dir", default=None, type=click.Path(exists=True),
              help="directory of <zone_id>.jsonl seed files (default: beside zones file)")
@click.option("--base-port", default=7001, show_default=True, type=int)
@click.option("--grant/--no-grant", "grant_on_escalation", default=True,
              help="grant subscriptions on escalation")
@click.option("--audit-file", default=None, type=click.Path(),
              help="CSP escalation log path (default: ./csp-audit.jsonl)")
def demo_up(zones_file: str, seed_dir: str | None, base_port: int,
            grant_on_escalation: bool, audit_file: str | None) -> None:
    """Boot 1 LSP + 1 CSP + one CU per zone and block until Ctrl-C."""
    try:
        topology = boot_demo(
            zones_file, seed_dir=seed_dir, base_port=base_port,
            grant_on_escalation=grant_on_escalation, audit_file=audit_file,
        )
    except ServiceError as exc:
        fail(exc)
    click.echo(f"lsp  {topology.lsp.url}")
    click.echo(f"csp  {topology.csp.url}")
    for zone_id, handle in sorted(topology.cus.items()):
        click.echo(f"cu   {handle.url}  zone={zone_id}")
    click.echo("Ctrl-C to stop")
    try:
        topology.lsp.join()
    except KeyboardInterrupt:
        topology.stop()


if __name__ == "__main__":
    main()
