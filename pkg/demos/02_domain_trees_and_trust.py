"""
Domain trees and trust groups
=============================
"""

# %%
from collections import Counter

import numpy as np

from sniresume import fixtures
from sniresume.domain import depths, longest_path
from sniresume.trust import (
    cert_trust_relations,
    group_stats,
    read_resumption_csv,
    resumption_trust_relations,
    trust_groups,
    union_relations,
)

google = fixtures.google_tree()
for host, d in sorted(depths(google).items(), key=lambda kv: kv[1]):
    print("  " * (d - 1) + host)
print("longest path:", longest_path(google))

# %%
# Wildcard certificates already tie the google.com hosts together and the
# gstatic.com hosts together, but not across the two operators' domains.
cert = cert_trust_relations([google])
print(len(trust_groups(google, cert)), "groups from certificates")
chain = fixtures.google_chain_relations()
print([sorted(g) for g in trust_groups(google, chain).groups])

# %%
# The ten-site synthetic corpus, with both kinds of evidence.
corpus = fixtures.corpus10()
cert = cert_trust_relations(corpus)
res = resumption_trust_relations(read_resumption_csv(fixtures.data_path("corpus10_resumption.csv")))
for name, rel in [("certificate", cert), ("resumption", res), ("union", union_relations(cert, res))]:
    s = group_stats(corpus, rel)
    print(f"{name:12s} groups/site {s.mean_group_count:5.2f}  mean size {s.mean_group_size:4.2f}"
          f"  root group sizes {dict(sorted(s.root_group_sizes.items()))}")

# %%
sizes = Counter(len(g) for t in corpus for g in trust_groups(t, union_relations(cert, res)).groups)
print("group size histogram:", dict(sorted(sizes.items())))
print("hosts per site:", np.array([len(t.tls_hosts) for t in corpus]))
