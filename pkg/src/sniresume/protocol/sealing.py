"""Authenticated sealing of session state into opaque tickets.

The servers of a sharing group hold the same sealing key, so any of
them can open a ticket minted by a sibling. :class:`KeyedSealer` is an
encrypt-then-MAC construction over SHA-256 from the standard library;
it gives the structural guarantees the simulator relies on (tickets are
opaque and forgery is detected) and is not meant to protect real
traffic.
"""

from __future__ import annotations

import hashlib
import hmac
import os
from typing import Callable, Protocol

NONCE_LEN = 16
TAG_LEN = 32


class UnsealError(ValueError):
    pass


class Sealer(Protocol):
    def seal(self, plaintext: bytes) -> bytes: ...

    def unseal(self, token: bytes) -> bytes: ...


def _keystream(key: bytes, nonce: bytes, n: int) -> bytes:
    out = bytearray()
    counter = 0
    while len(out) < n:
        out += hashlib.sha256(key + nonce + counter.to_bytes(8, "big")).digest()
        counter += 1
    return bytes(out[:n])


class KeyedSealer:
    def __init__(self, key: bytes, nonce_source: Callable[[int], bytes] = os.urandom) -> None:
        if len(key) < 16:
            raise ValueError("sealing key must be at least 16 bytes")
        self._enc_key = hashlib.sha256(b"enc" + key).digest()
        self._mac_key = hashlib.sha256(b"mac" + key).digest()
        self._nonce = nonce_source

    def seal(self, plaintext: bytes) -> bytes:
        nonce = self._nonce(NONCE_LEN)
        ct = bytes(a ^ b for a, b in zip(plaintext, _keystream(self._enc_key, nonce, len(plaintext))))
        tag = hmac.new(self._mac_key, nonce + ct, hashlib.sha256).digest()
        return nonce + ct + tag

    def unseal(self, token: bytes) -> bytes:
        if len(token) < NONCE_LEN + TAG_LEN:
            raise UnsealError("ticket too short")
        nonce, ct, tag = token[:NONCE_LEN], token[NONCE_LEN:-TAG_LEN], token[-TAG_LEN:]
        expected = hmac.new(self._mac_key, nonce + ct, hashlib.sha256).digest()
        if not hmac.compare_digest(tag, expected):
            raise UnsealError("ticket authentication failed")
        return bytes(a ^ b for a, b in zip(ct, _keystream(self._enc_key, nonce, len(ct))))
