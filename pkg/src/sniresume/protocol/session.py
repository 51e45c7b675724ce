"""Session state, client-side caches and server-side state sharing."""

from __future__ import annotations

import enum
import json
import threading
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable

from ..domain import canonical_hostname
from .sealing import Sealer, UnsealError


class TlsVersion(enum.Enum):
    V1_2 = "1.2"
    V1_3 = "1.3"


class SharingMode(enum.Enum):
    SEALING_KEY = "sealing_key"
    DATABASE = "database"


class VirtualClock:
    """Manually advanced clock so lifetime checks are reproducible."""

    def __init__(self, start: float = 0.0) -> None:
        self._now = float(start)

    def __call__(self) -> float:
        return self._now

    def advance(self, seconds: float) -> None:
        if seconds < 0:
            raise ValueError("time only moves forward")
        self._now += seconds


@dataclass(frozen=True)
class SessionState:
    """Resumable state of one session.

    The issuing SNI is always resumable even when the advertised list
    leaves it out.
    """

    psk_identity: bytes
    secret: bytes
    issuing_sni: str
    resumable_snis: tuple[str, ...]
    issued_at: float
    lifetime_s: float
    tls_version: TlsVersion = TlsVersion.V1_3

    def expired(self, now: float) -> bool:
        return now > self.issued_at + self.lifetime_s

    def covers(self, sni: str) -> bool:
        return sni == self.issuing_sni or sni in self.resumable_snis

    def to_bytes(self) -> bytes:
        """Serialize everything but the identity (the identity wraps this)."""
        return json.dumps({
            "secret": self.secret.hex(),
            "issuing_sni": self.issuing_sni,
            "resumable_snis": list(self.resumable_snis),
            "issued_at": self.issued_at,
            "lifetime_s": self.lifetime_s,
            "tls_version": self.tls_version.value,
        }, sort_keys=True).encode()

    @classmethod
    def from_bytes(cls, identity: bytes, raw: bytes) -> "SessionState":
        d = json.loads(raw)
        return cls(identity, bytes.fromhex(d["secret"]), d["issuing_sni"], tuple(d["resumable_snis"]),
                   d["issued_at"], d["lifetime_s"], TlsVersion(d["tls_version"]))


class SessionCache:
    """Client-side cache of resumable sessions, newest first."""

    def __init__(self) -> None:
        self._entries: list[SessionState] = []

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self):
        return iter(list(self._entries))

    def add(self, state: SessionState) -> None:
        self._entries.insert(0, state)

    def lookup(self, sni: str, now: float) -> SessionState | None:
        self._entries = [s for s in self._entries if not s.expired(now)]
        for s in self._entries:
            if s.covers(sni):
                return s
        return None


@dataclass
class SharingGroup:
    """Servers that can recover each other's session state.

    In ``SEALING_KEY`` mode the PSK identity is the sealed state itself.
    In ``DATABASE`` mode it is a random lookup key into a store shared
    by the group; inserts and lookups are serialized by a lock.
    """

    mode: SharingMode
    members: frozenset[str]
    sealer: Sealer | None = None
    identity_source: Callable[[int], bytes] | None = None
    _store: dict[bytes, SessionState] = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self) -> None:
        self.members = frozenset(canonical_hostname(m) for m in self.members)
        if self.mode is SharingMode.SEALING_KEY and self.sealer is None:
            raise ValueError("sealing-key sharing needs a sealer")
        if self.mode is SharingMode.DATABASE and self.identity_source is None:
            raise ValueError("database sharing needs an identity source")

    def issue(self, state: SessionState) -> SessionState:
        """Store or seal *state* and return it with its PSK identity set."""
        if self.mode is SharingMode.SEALING_KEY:
            return replace(state, psk_identity=self.sealer.seal(state.to_bytes()))
        with self._lock:
            while True:
                identity = self.identity_source(16)
                if identity not in self._store:
                    break
            issued = replace(state, psk_identity=identity)
            self._store[identity] = issued
        return issued

    def recover(self, identity: bytes) -> SessionState | None:
        if self.mode is SharingMode.SEALING_KEY:
            try:
                return SessionState.from_bytes(identity, self.sealer.unseal(identity))
            except (UnsealError, ValueError, KeyError):
                return None
        with self._lock:
            return self._store.get(identity)

    def stored(self) -> Iterable[SessionState]:
        with self._lock:
            return list(self._store.values())
