"""Client and server behaviour for cross-hostname resumption.

Messages are plain dataclasses passed in-process. A full handshake
carries the server certificate; a resumed one carries only a finished
value the server can compute if it recovered the session secret.
"""

from __future__ import annotations

import enum
import hashlib
import hmac
import os
import random
from dataclasses import dataclass, field
from typing import Callable, Mapping

from ..domain import CertificateDescriptor, canonical_hostname
from ..trust import cert_covers
from .codec import (
    ClientIndication,
    CodecError,
    ServerSniList,
    decode_extension,
    encode_extension,
)
from .session import SessionCache, SessionState, SharingGroup, TlsVersion, VirtualClock


class HandshakeError(Exception):
    """The connection failed (the equivalent of a fatal alert)."""


class ConfigurationError(ValueError):
    pass


class Mode(enum.Enum):
    FULL = "full"
    RESUMED = "resumed"


@dataclass(frozen=True)
class ClientHello:
    sni: str
    client_random: bytes
    extensions: tuple[bytes, ...] = ()
    psk_identity: bytes | None = None


@dataclass(frozen=True)
class NewSessionTicket:
    psk_identity: bytes
    secret: bytes
    lifetime_s: float
    issued_at: float
    tls_version: TlsVersion


@dataclass(frozen=True)
class ServerResponse:
    """Server flight.

    ``extensions_encrypted`` records where the extension travelled:
    EncryptedExtensions for TLS 1.3, the clear ServerHello for TLS 1.2.
    """

    sni: str
    mode: Mode
    certificate: CertificateDescriptor | None
    extensions: tuple[bytes, ...] = ()
    extensions_encrypted: bool = False
    ticket: NewSessionTicket | None = None
    finished: bytes = b""


def _finished(secret: bytes, client_random: bytes, sni: str) -> bytes:
    return hmac.new(secret, client_random + sni.encode(), hashlib.sha256).digest()


def _byte_source(rng: random.Random | None) -> Callable[[int], bytes]:
    return rng.randbytes if rng is not None else os.urandom


class ServerIdentity:
    """One TLS endpoint: an SNI, its certificate and its sharing group.

    Advertised names must belong to the sharing group and be covered by
    the certificate; anything else is rejected here rather than sent.
    """

    def __init__(
        self,
        sni: str,
        certificate: CertificateDescriptor,
        group: SharingGroup,
        advertise: tuple[str, ...] | list[str] = (),
        tls_version: TlsVersion = TlsVersion.V1_3,
        lifetime_s: float = 7200.0,
        rng: random.Random | None = None,
    ) -> None:
        self.sni = canonical_hostname(sni)
        self.certificate = certificate
        self.group = group
        self.tls_version = tls_version
        self.lifetime_s = lifetime_s
        self._bytes = _byte_source(rng)
        if not cert_covers(certificate, self.sni):
            raise ConfigurationError(f"certificate does not cover the server's own name {self.sni}")
        if self.sni not in group.members:
            raise ConfigurationError(f"{self.sni} is not a member of its sharing group")
        names = []
        for name in advertise:
            name = canonical_hostname(name)
            if name not in group.members:
                raise ConfigurationError(f"{self.sni} advertises {name}, which is outside its sharing group")
            if not cert_covers(certificate, name):
                raise ConfigurationError(f"{self.sni} advertises {name}, which its certificate does not cover")
            if name not in names:
                names.append(name)
        self.advertise = tuple(names)

    def __repr__(self) -> str:
        return f"ServerIdentity({self.sni!r}, advertise={list(self.advertise)})"


def client_hello(
    cache: SessionCache,
    target_sni: str,
    support_extension: bool,
    now: float,
    client_random: bytes,
) -> ClientHello:
    """Build the offer: extension indication plus any usable PSK identity."""
    target_sni = canonical_hostname(target_sni)
    exts = (encode_extension(ClientIndication()),) if support_extension else ()
    state = cache.lookup(target_sni, now)
    return ClientHello(
        sni=target_sni,
        client_random=client_random,
        extensions=exts,
        psk_identity=state.psk_identity if state else None,
    )


def _indicated(hello: ClientHello) -> bool:
    found = False
    for raw in hello.extensions:
        try:
            rec = decode_extension(raw)
        except CodecError as exc:
            raise HandshakeError(f"decode_error in ClientHello: {exc}") from exc
        if isinstance(rec, ServerSniList):
            raise HandshakeError("illegal_parameter: client sent a server SNI list")
        found = found or isinstance(rec, ClientIndication)
    return found


def server_respond(server: ServerIdentity, hello: ClientHello, now: float) -> ServerResponse:
    """Answer *hello*, resuming when the PSK can be recovered and is valid here."""
    if hello.sni != server.sni:
        raise HandshakeError(f"unrecognized_name: {hello.sni} sent to {server.sni}")
    indicated = _indicated(hello)

    if hello.psk_identity is not None:
        state = server.group.recover(hello.psk_identity)
        if state is not None and not state.expired(now) and state.covers(server.sni):
            return ServerResponse(
                sni=server.sni,
                mode=Mode.RESUMED,
                certificate=None,
                finished=_finished(state.secret, hello.client_random, server.sni),
            )
        # unknown, foreign or stale identity: fall back to a full handshake

    advertised = server.advertise if indicated else ()
    state = server.group.issue(SessionState(
        psk_identity=b"",
        secret=server._bytes(32),
        issuing_sni=server.sni,
        resumable_snis=advertised,
        issued_at=now,
        lifetime_s=server.lifetime_s,
        tls_version=server.tls_version,
    ))
    exts = (encode_extension(ServerSniList(advertised)),) if advertised else ()
    return ServerResponse(
        sni=server.sni,
        mode=Mode.FULL,
        certificate=server.certificate,
        extensions=exts,
        extensions_encrypted=bool(exts) and server.tls_version is TlsVersion.V1_3,
        ticket=NewSessionTicket(state.psk_identity, state.secret, state.lifetime_s,
                                state.issued_at, state.tls_version),
    )


@dataclass(frozen=True)
class ValidationOutcome:
    advertised: tuple[str, ...]
    accepted: tuple[str, ...]

    @property
    def rejected(self) -> tuple[str, ...]:
        return tuple(n for n in self.advertised if n not in self.accepted)

    @property
    def status(self) -> str:
        if not self.advertised:
            return "none"
        if not self.accepted:
            return "rejected"
        return "accepted" if not self.rejected else "filtered"


def client_validate(
    response: ServerResponse,
    original_cert: CertificateDescriptor,
    strict: bool = True,
) -> ValidationOutcome:
    """Keep only advertised names the original certificate authenticates.

    In strict mode one uncovered name voids the whole list; the session
    then stays resumable at its issuing SNI only.
    """
    names: tuple[str, ...] = ()
    for raw in response.extensions:
        try:
            rec = decode_extension(raw)
        except CodecError as exc:
            raise HandshakeError(f"decode_error in server extensions: {exc}") from exc
        if isinstance(rec, ServerSniList):
            names = rec.names
    covered = tuple(n for n in names if cert_covers(original_cert, n))
    if strict and len(covered) != len(names):
        covered = ()
    return ValidationOutcome(names, covered)


@dataclass
class Client:
    support_extension: bool = True
    strict: bool = True
    clock: Callable[[], float] = field(default_factory=VirtualClock)
    rng: random.Random | None = None
    cache: SessionCache = field(default_factory=SessionCache)

    def random_bytes(self, n: int) -> bytes:
        return _byte_source(self.rng)(n)


@dataclass(frozen=True)
class Transcript:
    target: str
    mode: Mode
    offered_psk: bool
    client_extensions: tuple[bytes, ...]
    server_extensions: tuple[bytes, ...]
    extensions_encrypted: bool
    certificate_sent: bool
    validation: ValidationOutcome | None
    cached: SessionState | None

    def log_line(self) -> str:
        names = ",".join(self.validation.advertised) if self.validation else ""
        status = self.validation.status if self.validation else "n/a"
        return f"{self.target} {self.mode.value} ext=[{names}] validation={status}"


def run_handshake(
    client: Client,
    servers: Mapping[str, ServerIdentity],
    target_sni: str,
    tamper: Callable[[ServerResponse], ServerResponse] | None = None,
) -> Transcript:
    """Drive one connection from *client* to the server registered for *target_sni*.

    *tamper* rewrites the server flight before the client sees it, to
    model a malicious server or an on-path attacker.
    """
    target = canonical_hostname(target_sni)
    server = servers.get(target)
    if server is None:
        raise HandshakeError(f"no server registered for {target}")
    now = client.clock()
    hello = client_hello(client.cache, target, client.support_extension, now, client.random_bytes(32))
    response = server_respond(server, hello, now)
    if tamper is not None:
        response = tamper(response)

    if response.extensions and not client.support_extension:
        raise HandshakeError("unsupported_extension: server sent an unsolicited extension")

    if response.mode is Mode.RESUMED:
        state = client.cache.lookup(target, now) if hello.psk_identity else None
        if state is None or state.psk_identity != hello.psk_identity:
            raise HandshakeError("server resumed a session the client did not offer")
        if not hmac.compare_digest(response.finished, _finished(state.secret, hello.client_random, target)):
            raise HandshakeError("decrypt_error: server could not prove knowledge of the session secret")
        return Transcript(target, Mode.RESUMED, True, hello.extensions, response.extensions,
                          response.extensions_encrypted, False, None, None)

    cert = response.certificate
    if cert is None or not cert_covers(cert, target):
        raise HandshakeError(f"bad_certificate: presented certificate does not cover {target}")
    outcome = client_validate(response, cert, client.strict)
    cached = None
    if response.ticket is not None:
        t = response.ticket
        cached = SessionState(t.psk_identity, t.secret, target, outcome.accepted,
                              t.issued_at, t.lifetime_s, t.tls_version)
        client.cache.add(cached)
    return Transcript(target, Mode.FULL, hello.psk_identity is not None, hello.extensions,
                      response.extensions, response.extensions_encrypted, True, outcome, cached)
