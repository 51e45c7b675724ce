"""First-visit and two-site page-load simulations under resumption policies.

Each site visit opens one TLS connection per distinct hostname. A
connection is a full handshake unless the client already holds state
it may resume there:

* ``NO_RESUMPTION`` and ``SAME_HOSTNAME`` never resume on a first visit,
  because every hostname is new.
* ``ACROSS_HOSTNAMES`` resumes any host whose trust group was already
  unlocked by a full handshake to another member.

Path metrics follow the request dependency chain. A non-TLS hop on a
chain is counted as a sequential hop that can never be resumed.
"""

from __future__ import annotations

import csv
import enum
import io
import itertools
import statistics
from dataclasses import asdict, dataclass, field
from typing import Sequence

from .cost import HandshakeCostTable, SavingsSummary, load_default_table, savings_summary
from .domain import DomainTree, depths, distinct_tls_hostnames, longest_path
from .trust import TrustGroups, TrustRelationSet, components, trust_groups


class SimulationError(ValueError):
    pass


class InvariantViolation(SimulationError):
    """A simulation produced an internally inconsistent result."""


class ResumptionPolicy(enum.Enum):
    NO_RESUMPTION = "none"
    SAME_HOSTNAME = "same"
    ACROSS_HOSTNAMES = "across"


class PathUnlockRule(enum.Enum):
    ALONG_PATH = "path"
    ANY_SHALLOWER = "shallow"


@dataclass(frozen=True)
class SiteLoadResult:
    """Outcome of one first visit.

    ``longest_full_path`` counts full handshakes along the deepest
    dependency chain (ties resolved towards more full handshakes), so
    ``longest_total_path - longest_full_path`` is the number of hops on
    that chain that resumption shortens. ``max_full_chain`` is the
    largest full-handshake count along any chain, deep or not.
    """

    site_root: str
    full_handshakes: int
    resumed_handshakes: int
    longest_full_path: int
    longest_total_path: int
    max_full_chain: int

    def __post_init__(self) -> None:
        if self.longest_full_path > self.longest_total_path:
            raise InvariantViolation(f"{self.site_root}: full path exceeds total path")


def _check_partition(tree: DomainTree, groups: TrustGroups) -> None:
    seen: set[str] = set()
    for g in groups.groups:
        if not g or seen & g:
            raise InvariantViolation(f"{tree.root}: trust groups are not a partition")
        seen |= g
    if seen != tree.tls_hosts:
        raise InvariantViolation(f"{tree.root}: trust groups do not cover exactly the TLS hostnames")


def simulate_site(
    tree: DomainTree,
    groups: TrustGroups,
    policy: ResumptionPolicy = ResumptionPolicy.ACROSS_HOSTNAMES,
    rule: PathUnlockRule = PathUnlockRule.ALONG_PATH,
) -> SiteLoadResult:
    _check_partition(tree, groups)
    n_tls = distinct_tls_hostnames(tree)
    across = policy is ResumptionPolicy.ACROSS_HOSTNAMES
    full = len(groups) if across else n_tls

    depth = depths(tree)
    label = groups.label_map()
    shallowest: dict[int, int] = {}
    for host, g in label.items():
        shallowest[g] = min(shallowest.get(g, depth[host]), depth[host])

    # full-handshake count along the root path of every node, top-down
    kids = tree.children()
    full_on_path: dict[str, int] = {}
    stack: list[tuple[str, int, frozenset[int]]] = [(tree.root, 0, frozenset())]
    while stack:
        host, count, unlocked = stack.pop()
        if not tree.tls_supported[host]:
            count += 1
        elif not across:
            count += 1
        else:
            g = label[host]
            if rule is PathUnlockRule.ALONG_PATH:
                resumed = g in unlocked
            else:
                resumed = shallowest[g] < depth[host]
            if not resumed:
                count += 1
            unlocked = unlocked | {g}
        full_on_path[host] = count
        for k in kids[host]:
            stack.append((k, count, unlocked))

    total_path = longest_path(tree)
    tls_nodes = tree.tls_hosts or {tree.root}
    deepest = [h for h in tls_nodes if depth[h] == total_path]
    return SiteLoadResult(
        site_root=tree.root,
        full_handshakes=full,
        resumed_handshakes=n_tls - full,
        longest_full_path=max(full_on_path[h] for h in deepest),
        longest_total_path=total_path,
        max_full_chain=max(full_on_path[h] for h in tls_nodes),
    )


@dataclass(frozen=True)
class Histogram:
    """Integer-binned counts; values above ``cutoff`` go to ``overflow``."""

    counts: dict[int, int]
    cutoff: int
    overflow: int = 0

    @classmethod
    def of(cls, values: Sequence[int], cutoff: int = 25) -> "Histogram":
        if cutoff < 1:
            raise SimulationError("histogram cutoff must be at least 1")
        counts = {b: 0 for b in range(1, cutoff + 1)}
        overflow = 0
        for v in values:
            if v > cutoff:
                overflow += 1
            else:
                counts[v] = counts.get(v, 0) + 1
        return cls(dict(sorted(counts.items())), cutoff, overflow)

    def shares(self) -> dict[int, float]:
        n = sum(self.counts.values()) + self.overflow
        return {b: c / n for b, c in self.counts.items()} if n else {}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin", "count"])
        for b, c in self.counts.items():
            w.writerow([b, c])
        return buf.getvalue()

    @staticmethod
    def read_csv(text: str) -> dict[int, int]:
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["bin", "count"]:
            raise SimulationError("histogram CSV must start with a 'bin,count' header")
        return {int(b): int(c) for b, c in rows[1:]}

    def to_json(self) -> dict:
        return {"cutoff": self.cutoff, "overflow": self.overflow,
                "counts": {str(b): c for b, c in self.counts.items()}}


@dataclass(frozen=True)
class SimulationReport:
    policy: ResumptionPolicy
    rule: PathUnlockRule
    per_site: tuple[SiteLoadResult, ...]
    mean_tls_hosts: float
    mean_full: float
    mean_resumed: float
    mean_longest_full_path: float
    mean_longest_total_path: float
    mean_max_full_chain: float
    full_histogram: Histogram
    path_histogram: Histogram
    savings: SavingsSummary | None = field(default=None)

    def to_json(self) -> dict:
        return {
            "policy": self.policy.value,
            "rule": self.rule.value,
            "sites": len(self.per_site),
            "per_site": [asdict(r) for r in self.per_site],
            "means": {
                "tls_hosts": self.mean_tls_hosts,
                "full_handshakes": self.mean_full,
                "resumed_handshakes": self.mean_resumed,
                "longest_full_path": self.mean_longest_full_path,
                "longest_total_path": self.mean_longest_total_path,
                "max_full_chain": self.mean_max_full_chain,
            },
            "histograms": {
                "full_handshakes": self.full_histogram.to_json(),
                "sequential_full": self.path_histogram.to_json(),
            },
            "savings": self.savings.to_json() if self.savings else None,
        }


def simulate_corpus(
    corpus: Sequence[DomainTree],
    relations: TrustRelationSet,
    policy: ResumptionPolicy = ResumptionPolicy.ACROSS_HOSTNAMES,
    rule: PathUnlockRule = PathUnlockRule.ALONG_PATH,
    table: HandshakeCostTable | None = None,
    cutoff: int = 25,
    rtt_ms: float = 0.0,
) -> SimulationReport:
    """Simulate every site; per-site results are ordered by root name."""
    if not corpus:
        raise SimulationError("cannot simulate an empty corpus")
    table = table or load_default_table()
    results = tuple(sorted(
        (simulate_site(t, trust_groups(t, relations), policy, rule) for t in corpus),
        key=lambda r: r.site_root,
    ))
    mean = statistics.fmean
    hosts = mean(r.full_handshakes + r.resumed_handshakes for r in results)
    m_full = mean(r.full_handshakes for r in results)
    m_total = mean(r.longest_total_path for r in results)
    m_fpath = mean(r.longest_full_path for r in results)
    savings = savings_summary(table, hosts, m_full, m_total, m_fpath, rtt_ms) if hosts > 0 else None
    return SimulationReport(
        policy=policy,
        rule=rule,
        per_site=results,
        mean_tls_hosts=hosts,
        mean_full=m_full,
        mean_resumed=mean(r.resumed_handshakes for r in results),
        mean_longest_full_path=m_fpath,
        mean_longest_total_path=m_total,
        mean_max_full_chain=mean(r.max_full_chain for r in results),
        full_histogram=Histogram.of([r.full_handshakes for r in results], cutoff),
        path_histogram=Histogram.of([r.longest_full_path for r in results], cutoff),
        savings=savings,
    )


def simulate_site_pair(
    tree_a: DomainTree,
    tree_b: DomainTree,
    relations: TrustRelationSet,
    policy: ResumptionPolicy,
) -> int:
    """Full handshakes needed to visit site A and then site B.

    Across hostnames, trust groups are formed over the hosts of both
    sites together, so every group touching either site costs exactly
    one full handshake.
    """
    a, b = tree_a.tls_hosts, tree_b.tls_hosts
    if policy is ResumptionPolicy.NO_RESUMPTION:
        return len(a) + len(b)
    if policy is ResumptionPolicy.SAME_HOSTNAME:
        return len(a | b)
    groups = components(a | b, relations)
    from_a = [g for g in groups if g & a]
    from_b = [g for g in groups if g & b and not g & a]
    return len(from_a) + len(from_b)


def pairwise_mean(
    corpus: Sequence[DomainTree],
    relations: TrustRelationSet,
    policy: ResumptionPolicy,
) -> float:
    if len(corpus) < 2:
        raise SimulationError("pairwise simulation needs at least two sites")
    return statistics.fmean(
        simulate_site_pair(x, y, relations, policy)
        for x, y in itertools.combinations(corpus, 2)
    )


def resumption_ratio(
    corpus: Sequence[DomainTree],
    relations: TrustRelationSet,
    policy: ResumptionPolicy = ResumptionPolicy.ACROSS_HOSTNAMES,
) -> float:
    """Resumed handshakes per full handshake over a first visit of every site."""
    if not corpus:
        raise SimulationError("cannot compute a ratio over an empty corpus")
    full = resumed = 0
    for t in corpus:
        r = simulate_site(t, trust_groups(t, relations), policy)
        full += r.full_handshakes
        resumed += r.resumed_handshakes
    if full == 0:
        raise SimulationError("corpus has no full handshakes")
    return resumed / full
