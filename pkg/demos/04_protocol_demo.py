"""
The extension on the wire
=========================
"""

# %%
import dataclasses
import random

from sniresume.fixtures import data_path
from sniresume.protocol import (
    Client,
    ServerSniList,
    SharingMode,
    build_server_set,
    decode_extension,
    encode_extension,
    load_config,
    parse_script,
    run_handshake,
    run_script,
)

raw = encode_extension(ServerSniList(("www.example.com", "static.example.com")))
print(raw.hex(" "))
print(decode_extension(raw))

# %%
config = load_config(data_path("demo_servers.json"))
steps = parse_script(data_path("demo_script.txt").read_text())
for mode in SharingMode:
    servers = build_server_set(config, random.Random(0), mode)
    print(mode.value)
    for t in run_script(servers, steps, random.Random(0)):
        print("  ", t.log_line())

# %%
# A client without the extension gets a full handshake everywhere.
servers = build_server_set(config, random.Random(0))
for t in run_script(servers, steps, random.Random(0), support_extension=False):
    print(t.log_line())

# %%
# A server that slips an unrelated name into its list. The strict client
# drops the whole list, so nothing beyond the issuing host is unlocked.
forged = encode_extension(ServerSniList(("www.example.com", "bank.test")))
client = Client(rng=random.Random(1))
t = run_handshake(client, servers, "example.com", tamper=lambda r: dataclasses.replace(r, extensions=(forged,)))
print(t.log_line(), "-> cached for", (t.cached.issuing_sni, *t.cached.resumable_snis))
print(run_handshake(client, servers, "www.example.com").log_line())
