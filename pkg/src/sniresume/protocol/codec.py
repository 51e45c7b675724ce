"""Wire format of the ``resumption_across_sni`` extension.

Layout (all integers big-endian)::

    uint16 extension_type = 0xFF5C
    uint16 length of body
    body:
      client: empty
      server: uint16 length of list
              repeated: uint8 name_type (0 = host_name)
                        uint16 length of name
                        name (ASCII)

This mirrors the server_name extension so existing TLS parsers can
reuse their vector-handling code.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Union

from ..domain import DomainError, canonical_hostname

EXTENSION_TYPE = 0xFF5C  # private-use range
HOST_NAME = 0
MAX_NAME_LEN = 253
MAX_BODY_LEN = 2**14 - 1


class CodecError(ValueError):
    """Malformed extension; fatal for the connection carrying it."""


@dataclass(frozen=True)
class ClientIndication:
    """Empty-bodied extension a client sends to signal support."""


@dataclass(frozen=True)
class ServerSniList:
    """Hostnames at which the session being established may be resumed."""

    names: tuple[str, ...]

    def __post_init__(self) -> None:
        try:
            names = tuple(canonical_hostname(n) for n in self.names)
        except DomainError as exc:
            raise CodecError(str(exc)) from exc
        object.__setattr__(self, "names", names)


ExtensionRecord = Union[ClientIndication, ServerSniList]


def encode_extension(record: ExtensionRecord) -> bytes:
    if isinstance(record, ClientIndication):
        return struct.pack("!HH", EXTENSION_TYPE, 0)
    if not isinstance(record, ServerSniList):
        raise TypeError(f"cannot encode {type(record).__name__}")
    if not record.names:
        raise CodecError("server SNI list must not be empty")
    entries = bytearray()
    for name in record.names:
        raw = name.encode("ascii")
        if len(raw) > MAX_NAME_LEN:
            raise CodecError(f"name longer than {MAX_NAME_LEN} bytes: {name}")
        entries += struct.pack("!BH", HOST_NAME, len(raw)) + raw
    body = struct.pack("!H", len(entries)) + entries
    if len(body) > MAX_BODY_LEN:
        raise CodecError(f"extension body of {len(body)} bytes overflows {MAX_BODY_LEN}")
    return struct.pack("!HH", EXTENSION_TYPE, len(body)) + bytes(body)


def decode_extension(data: bytes) -> ExtensionRecord | None:
    """Decode one complete extension.

    Returns ``None`` for a well-framed extension of another type so
    callers can skip it. Raises :class:`CodecError` on anything else.
    """
    data = bytes(data)
    if len(data) < 4:
        raise CodecError("truncated extension header")
    ext_type, length = struct.unpack_from("!HH", data)
    if len(data) < 4 + length:
        raise CodecError("truncated extension body")
    if len(data) > 4 + length:
        raise CodecError("trailing bytes after extension")
    if ext_type != EXTENSION_TYPE:
        return None
    body = data[4:]
    if not body:
        return ClientIndication()
    if len(body) < 2:
        raise CodecError("truncated server name list length")
    (list_len,) = struct.unpack_from("!H", body)
    if list_len != len(body) - 2:
        raise CodecError("server name list length does not match extension length")
    if list_len == 0:
        raise CodecError("empty server name list")
    names = []
    pos = 2
    while pos < len(body):
        if len(body) - pos < 3:
            raise CodecError("truncated name entry")
        name_type, name_len = struct.unpack_from("!BH", body, pos)
        pos += 3
        if name_type != HOST_NAME:
            raise CodecError(f"unknown name type {name_type}")
        if name_len == 0 or name_len > MAX_NAME_LEN:
            raise CodecError(f"bad name length {name_len}")
        if pos + name_len > len(body):
            raise CodecError("name runs past end of list")
        raw = body[pos:pos + name_len]
        pos += name_len
        try:
            names.append(canonical_hostname(raw.decode("ascii")))
        except (UnicodeDecodeError, DomainError) as exc:
            raise CodecError(f"invalid host name in list: {raw!r}") from exc
    return ServerSniList(tuple(names))
