"""
Page-load simulation under three resumption policies
====================================================
"""

# %%
from sniresume import fixtures
from sniresume.simulator import (
    PathUnlockRule,
    ResumptionPolicy,
    pairwise_mean,
    simulate_corpus,
)
from sniresume.trust import (
    cert_trust_relations,
    read_resumption_csv,
    resumption_trust_relations,
    union_relations,
)

corpus = fixtures.corpus10()
cert = cert_trust_relations(corpus)
res = resumption_trust_relations(read_resumption_csv(fixtures.data_path("corpus10_resumption.csv")))
rel = union_relations(cert, res)

# %%
for policy in ResumptionPolicy:
    rep = simulate_corpus(corpus, rel, policy, cutoff=12)
    print(f"{policy.value:7s} full {rep.mean_full:5.2f}  resumed {rep.mean_resumed:5.2f}"
          f"  full path {rep.mean_longest_full_path:4.2f} / {rep.mean_longest_total_path:4.2f}")

# %%
# Only the across-hostnames policy converts anything on a first visit.
across = simulate_corpus(corpus, rel, ResumptionPolicy.ACROSS_HOSTNAMES, rtt_ms=60)
s = across.savings
print(f"converted {s.conversion_percent:.1f}%  CPU saved {s.cpu_saved_ms:.1f} ms ({s.cpu_saved_percent:.1f}%)")
print("connect-time saving, 1-RTT:", [round(x, 2) for x in s.delta_connect_1rtt])
print("full-handshake histogram:", across.full_histogram.counts)

# %%
# Letting any shallower member unlock a group can only shorten chains.
shallow = simulate_corpus(corpus, rel, ResumptionPolicy.ACROSS_HOSTNAMES, PathUnlockRule.ANY_SHALLOWER)
print("along path:", across.mean_longest_full_path, " any shallower:", shallow.mean_longest_full_path)

# %%
# Two sites visited back to back; cross-site certificate coverage counts here.
pairs = union_relations(cert_trust_relations(corpus, scope="corpus"), res)
for policy in ResumptionPolicy:
    print(policy.value, round(pairwise_mean(corpus, pairs, policy), 2))
