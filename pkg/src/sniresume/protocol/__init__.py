"""Prototype of the ``resumption_across_sni`` TLS extension."""

from .codec import (
    EXTENSION_TYPE,
    ClientIndication,
    CodecError,
    ExtensionRecord,
    ServerSniList,
    decode_extension,
    encode_extension,
)
from .config import build_server_set, load_config, parse_script, run_script
from .handshake import (
    Client,
    ClientHello,
    ConfigurationError,
    HandshakeError,
    Mode,
    ServerIdentity,
    ServerResponse,
    Transcript,
    ValidationOutcome,
    client_hello,
    client_validate,
    run_handshake,
    server_respond,
)
from .sealing import KeyedSealer, Sealer, UnsealError
from .session import SessionCache, SessionState, SharingGroup, SharingMode, TlsVersion, VirtualClock

__all__ = [
    "EXTENSION_TYPE", "ClientIndication", "CodecError", "ExtensionRecord", "ServerSniList",
    "decode_extension", "encode_extension", "build_server_set", "load_config", "parse_script",
    "run_script", "Client", "ClientHello", "ConfigurationError", "HandshakeError", "Mode",
    "ServerIdentity", "ServerResponse", "Transcript", "ValidationOutcome", "client_hello",
    "client_validate", "run_handshake", "server_respond", "KeyedSealer", "Sealer", "UnsealError",
    "SessionCache", "SessionState", "SharingGroup", "SharingMode", "TlsVersion", "VirtualClock",
]
