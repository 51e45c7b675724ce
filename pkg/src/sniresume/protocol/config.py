"""Server-set configuration files and scripted client runs."""

from __future__ import annotations

import json
import random
from pathlib import Path
from typing import Any, Mapping

from ..domain import CertificateDescriptor, DomainError
from .handshake import Client, ConfigurationError, ServerIdentity, Transcript, run_handshake
from .sealing import KeyedSealer
from .session import SharingGroup, SharingMode, TlsVersion, VirtualClock


def build_server_set(
    config: Mapping[str, Any],
    rng: random.Random,
    mode_override: SharingMode | None = None,
) -> dict[str, ServerIdentity]:
    """Instantiate every server of a configuration document.

    Each group gets its own sealing key or store. Members may set
    ``tls_version`` ("1.2" or "1.3") and ``lifetime_s``.
    """
    try:
        groups = config["sharing_groups"]
    except (KeyError, TypeError):
        raise ConfigurationError("configuration needs a 'sharing_groups' list") from None
    servers: dict[str, ServerIdentity] = {}
    for gi, gdoc in enumerate(groups):
        try:
            mode = mode_override or SharingMode(gdoc["mode"])
            members = gdoc["members"]
            snis = [m["sni"] for m in members]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"sharing group {gi}: {exc}") from exc
        try:
            if mode is SharingMode.SEALING_KEY:
                group = SharingGroup(mode, frozenset(snis), sealer=KeyedSealer(rng.randbytes(32), rng.randbytes))
            else:
                group = SharingGroup(mode, frozenset(snis), identity_source=rng.randbytes)
            for m in members:
                cert = CertificateDescriptor(m["sni"], tuple(m.get("san") or [m["sni"]]), key_id=f"group{gi}")
                server = ServerIdentity(
                    m["sni"], cert, group, m.get("advertise", ()),
                    tls_version=TlsVersion(m.get("tls_version", "1.3")),
                    lifetime_s=float(m.get("lifetime_s", 7200.0)),
                    rng=rng,
                )
                if server.sni in servers:
                    raise ConfigurationError(f"{server.sni} configured twice")
                servers[server.sni] = server
        except (DomainError, KeyError, TypeError) as exc:
            raise ConfigurationError(f"sharing group {gi}: {exc}") from exc
    return servers


def load_config(path: str | Path) -> dict:
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}") from exc


def parse_script(text: str) -> list[tuple[str, Any]]:
    """Script lines are hostnames to connect to, or ``advance <seconds>``.

    ``#`` starts a comment. A JSON list of hostnames is accepted too.
    """
    stripped = text.strip()
    if stripped.startswith("["):
        return [("connect", h) for h in json.loads(stripped)]
    steps: list[tuple[str, Any]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "advance":
            if len(parts) != 2:
                raise ConfigurationError(f"script line {lineno}: 'advance' takes one argument")
            try:
                steps.append(("advance", float(parts[1])))
            except ValueError:
                raise ConfigurationError(f"script line {lineno}: bad duration {parts[1]!r}") from None
        elif len(parts) == 1:
            steps.append(("connect", parts[0]))
        else:
            raise ConfigurationError(f"script line {lineno}: cannot parse {line!r}")
    return steps


def run_script(
    servers: Mapping[str, ServerIdentity],
    steps: list[tuple[str, Any]],
    rng: random.Random,
    support_extension: bool = True,
    strict: bool = True,
) -> list[Transcript]:
    clock = VirtualClock()
    client = Client(support_extension=support_extension, strict=strict, clock=clock, rng=rng)
    out = []
    for kind, arg in steps:
        if kind == "advance":
            clock.advance(arg)
        else:
            out.append(run_handshake(client, servers, arg))
    return out
