"""Cross-hostname TLS session resumption: protocol prototype and evaluation pipeline."""

from .cost import (
    DeltaInterval,
    HandshakeCostTable,
    HandshakeMode,
    cpu_savings,
    delta_connect,
    derive_delta,
    latency_overhead_bounds,
    load_default_table,
    overlap_gap,
    savings_summary,
)
from .domain import (
    CertificateDescriptor,
    DomainError,
    DomainTree,
    build_tree,
    distinct_tls_hostnames,
    load_corpus,
    longest_path,
    node_depth,
    parse_domain_tree,
    serialize_domain_tree,
)
from .simulator import (
    PathUnlockRule,
    ResumptionPolicy,
    SimulationReport,
    SiteLoadResult,
    pairwise_mean,
    resumption_ratio,
    simulate_corpus,
    simulate_site,
    simulate_site_pair,
)
from .trust import (
    TrustGroups,
    TrustRelationSet,
    cert_trust_relations,
    group_stats,
    resumption_trust_relations,
    san_matches,
    trust_groups,
    union_relations,
)

__version__ = "0.1.0"

__all__ = [
    "DeltaInterval",
    "HandshakeCostTable",
    "HandshakeMode",
    "cpu_savings",
    "delta_connect",
    "derive_delta",
    "latency_overhead_bounds",
    "load_default_table",
    "overlap_gap",
    "savings_summary",
    "CertificateDescriptor",
    "DomainError",
    "DomainTree",
    "build_tree",
    "distinct_tls_hostnames",
    "load_corpus",
    "longest_path",
    "node_depth",
    "parse_domain_tree",
    "serialize_domain_tree",
    "PathUnlockRule",
    "ResumptionPolicy",
    "SimulationReport",
    "SiteLoadResult",
    "pairwise_mean",
    "resumption_ratio",
    "simulate_corpus",
    "simulate_site",
    "simulate_site_pair",
    "TrustGroups",
    "TrustRelationSet",
    "cert_trust_relations",
    "group_stats",
    "resumption_trust_relations",
    "san_matches",
    "trust_groups",
    "union_relations",
]
