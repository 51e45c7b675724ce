"""
Handshake costs and what resumption saves
=========================================

Walks through the bundled cost table and the latency algebra built on it.
"""

# %%
import numpy as np

from sniresume.cost import (
    HandshakeMode,
    cpu_savings,
    delta_connect,
    delta_per_row,
    derive_delta,
    latency_overhead_bounds,
    load_default_table,
    overlap_gap,
)

table = load_default_table()
lat = np.array(table.latencies)
full = np.array([table.duration(HandshakeMode.TLS13_FULL, x) for x in lat])
res1 = np.array([table.duration(HandshakeMode.TLS13_RESUMED_1RTT, x) for x in lat])
print("latency rows (ms):", lat)
print("TLS 1.3 full     :", full)
print("TLS 1.3 1-RTT res:", res1)

# %%
# The saving per row, then the interval spanned by all rows.
for mode in (HandshakeMode.TLS13_RESUMED_1RTT, HandshakeMode.TLS13_RESUMED_0RTT):
    rows = delta_per_row(table, mode)
    d = derive_delta(table, mode)
    print(mode.value, {k: round(v, 2) for k, v in rows.items()},
          "->", (round(d.low_ms, 2), round(d.high_ms, 2)), "+", d.rtt_coefficient, "RTT")

# %%
# A full handshake plus request takes three round trips of payload, so
# whatever is left over once the baseline row is subtracted is time the
# two peers spent computing in parallel.
for x in table.latencies:
    print(f"gap @ {x:g} ms = {overlap_gap(table, x):.2f} ms")

# %%
# Nineteen connections at 60 ms: fully parallel vs fully sequential.
print(latency_overhead_bounds([60.0] * 19))

# %%
# Resuming 1.58 of the hops on the deepest chain.
one = derive_delta(table, HandshakeMode.TLS13_RESUMED_1RTT)
print("connect-time saving (1-RTT):", np.round(delta_connect(1.58, one), 2))
print("CPU saved converting 11.89 of 20.24 handshakes:", np.round(cpu_savings(20.24 - 8.35, 20.24), 2))
