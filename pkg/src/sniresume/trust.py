"""Trust relations between hostnames and the trust groups they induce.

Two hostnames are trusted peers when they evidently share secret TLS
state: either one presented certificate authenticates the other name,
or a session opened with one was resumed at the other. Trust groups are
the connected components of that relation inside one analysis scope
(usually a single domain tree).
"""

from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Literal, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .domain import (
    CertificateDescriptor,
    DomainError,
    DomainTree,
    canonical_hostname,
    canonical_san_pattern,
)

Source = Literal["certificate", "resumption", "union"]


class TrustError(ValueError):
    pass


def san_matches(pattern: str, host: str) -> bool:
    """True if SAN *pattern* authenticates *host*.

    A wildcard covers exactly one extra leftmost label, so
    ``*.example.com`` matches ``static.example.com`` but neither
    ``example.com`` nor ``a.b.example.com``.
    """
    try:
        pattern = canonical_san_pattern(pattern)
    except DomainError as exc:
        raise TrustError(str(exc)) from exc
    host = canonical_hostname(host)
    if not pattern.startswith("*."):
        return pattern == host
    label, _, rest = host.partition(".")
    return bool(label) and rest == pattern[2:]


def cert_covers(cert: CertificateDescriptor, host: str) -> bool:
    return any(san_matches(p, host) for p in cert.san_list)


@dataclass(frozen=True)
class TrustRelationSet:
    """Undirected, irreflexive set of hostname pairs."""

    source: Source
    relations: frozenset[frozenset[str]]

    def __post_init__(self) -> None:
        for pair in self.relations:
            if len(pair) != 2:
                raise TrustError(f"relation pairs must hold two distinct hosts: {set(pair)}")

    @classmethod
    def from_pairs(cls, source: Source, pairs: Iterable[tuple[str, str]]) -> "TrustRelationSet":
        rel = set()
        for a, b in pairs:
            a, b = canonical_hostname(a), canonical_hostname(b)
            if a != b:
                rel.add(frozenset((a, b)))
        return cls(source, frozenset(rel))

    def __len__(self) -> int:
        return len(self.relations)

    def __contains__(self, pair: object) -> bool:
        return frozenset(pair) in self.relations  # type: ignore[arg-type]

    def hosts(self) -> set[str]:
        return {h for p in self.relations for h in p}

    def sorted_pairs(self) -> list[list[str]]:
        return sorted(sorted(p) for p in self.relations)

    def to_json(self) -> dict:
        return {"source": self.source, "pairs": self.sorted_pairs()}

    @classmethod
    def from_json(cls, doc: dict) -> "TrustRelationSet":
        try:
            return cls.from_pairs(doc["source"], [tuple(p) for p in doc["pairs"]])
        except (KeyError, TypeError, ValueError) as exc:
            raise TrustError(f"malformed relation document: {exc}") from exc


def cert_trust_relations(
    trees: Sequence[DomainTree],
    scope: Literal["tree", "corpus"] = "tree",
) -> TrustRelationSet:
    """Pairs of TLS hosts where either presented certificate covers the other.

    With ``scope="tree"`` pairs are only formed between hosts of the same
    tree. ``scope="corpus"`` pools every TLS host of the corpus, which is
    what cross-site simulations need; a host seen with several
    certificates is related through any of them.
    """
    if scope not in ("tree", "corpus"):
        raise TrustError(f"unknown scope {scope!r}")
    if scope == "tree":
        groups = [{h: [t.cert[h]] if h in t.cert else [] for h in t.tls_hosts} for t in trees]
    else:
        pooled: dict[str, list[CertificateDescriptor]] = {}
        for t in trees:
            for h in t.tls_hosts:
                bucket = pooled.setdefault(h, [])
                c = t.cert.get(h)
                if c is not None and c not in bucket:
                    bucket.append(c)
        groups = [pooled]

    pairs = set()
    for hosts in groups:
        names = sorted(hosts)
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                if any(cert_covers(c, b) for c in hosts[a]) or any(cert_covers(c, a) for c in hosts[b]):
                    pairs.add(frozenset((a, b)))
    return TrustRelationSet("certificate", frozenset(pairs))


@dataclass(frozen=True)
class ResumptionRecord:
    origin_host: str
    target_host: str
    resumed: bool


def resumption_trust_relations(
    results: Iterable[ResumptionRecord],
    known_hosts: Iterable[str] | None = None,
    symmetrize: Literal["any", "both"] = "any",
) -> TrustRelationSet:
    """Relate hosts between which a resumption attempt succeeded.

    ``symmetrize="any"`` relates a pair if either direction resumed;
    ``"both"`` requires both directions (stricter, for sensitivity runs).
    """
    if symmetrize not in ("any", "both"):
        raise TrustError(f"unknown symmetrization {symmetrize!r}")
    known = {canonical_hostname(h) for h in known_hosts} if known_hosts is not None else None
    directed: set[tuple[str, str]] = set()
    for rec in results:
        a, b = canonical_hostname(rec.origin_host), canonical_hostname(rec.target_host)
        if known is not None:
            for h in (a, b):
                if h not in known:
                    raise TrustError(f"resumption record references unknown host {h}")
        if rec.resumed and a != b:
            directed.add((a, b))
    if symmetrize == "any":
        pairs = {frozenset(d) for d in directed}
    else:
        pairs = {frozenset((a, b)) for a, b in directed if (b, a) in directed}
    return TrustRelationSet("resumption", frozenset(pairs))


def union_relations(r1: TrustRelationSet, r2: TrustRelationSet) -> TrustRelationSet:
    return TrustRelationSet("union", r1.relations | r2.relations)


def components(hosts: Iterable[str], relations: TrustRelationSet) -> list[frozenset[str]]:
    """Connected components of *relations* restricted to *hosts*.

    Components are returned sorted by their smallest member.
    """
    names = sorted(set(hosts))
    if not names:
        return []
    index = {h: i for i, h in enumerate(names)}
    rows, cols = [], []
    for pair in relations.relations:
        a, b = tuple(pair)
        if a in index and b in index:
            rows.append(index[a])
            cols.append(index[b])
    n = len(names)
    graph = coo_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    buckets: dict[int, list[str]] = {}
    for name, lab in zip(names, labels):
        buckets.setdefault(int(lab), []).append(name)
    return sorted((frozenset(v) for v in buckets.values()), key=min)


@dataclass(frozen=True)
class TrustGroups:
    groups: tuple[frozenset[str], ...]

    def __len__(self) -> int:
        return len(self.groups)

    def group_of(self, host: str) -> frozenset[str]:
        for g in self.groups:
            if host in g:
                return g
        raise KeyError(host)

    def label_map(self) -> dict[str, int]:
        return {h: i for i, g in enumerate(self.groups) for h in g}

    def hosts(self) -> frozenset[str]:
        return frozenset().union(*self.groups)


def trust_groups(tree: DomainTree, relations: TrustRelationSet) -> TrustGroups:
    """Partition the tree's TLS hostnames into trust groups."""
    return TrustGroups(tuple(components(tree.tls_hosts, relations)))


@dataclass(frozen=True)
class GroupStats:
    sites: int
    mean_group_count: float
    mean_group_size: float
    mean_tls_hosts: float
    root_group_sizes: dict[int, int]

    def to_json(self) -> dict:
        return {
            "sites": self.sites,
            "mean_group_count": self.mean_group_count,
            "mean_group_size": self.mean_group_size,
            "mean_tls_hosts": self.mean_tls_hosts,
            "root_group_sizes": {str(k): v for k, v in sorted(self.root_group_sizes.items())},
        }


def group_stats(corpus: Sequence[DomainTree], relations: TrustRelationSet) -> GroupStats:
    """Aggregate trust-group figures over a corpus.

    The mean group size is pooled (all TLS hosts over all groups), so
    ``mean_group_size * mean_group_count == mean_tls_hosts`` holds exactly.
    Sites whose root lacks TLS have no root group and are left out of
    ``root_group_sizes``.
    """
    if not corpus:
        raise TrustError("group statistics need a non-empty corpus")
    total_groups = total_hosts = 0
    root_sizes: Counter[int] = Counter()
    for tree in corpus:
        groups = trust_groups(tree, relations)
        total_groups += len(groups)
        total_hosts += sum(len(g) for g in groups.groups)
        if tree.tls_supported[tree.root]:
            root_sizes[len(groups.group_of(tree.root))] += 1
    n = len(corpus)
    return GroupStats(
        sites=n,
        mean_group_count=total_groups / n,
        mean_group_size=total_hosts / total_groups if total_groups else 0.0,
        mean_tls_hosts=total_hosts / n,
        root_group_sizes=dict(root_sizes),
    )


def read_resumption_csv(path: str | Path) -> list[ResumptionRecord]:
    """Read ``origin_host,target_host,resumed`` records (header required)."""
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["origin_host", "target_host", "resumed"]:
            raise TrustError(f"{path}: expected header origin_host,target_host,resumed")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise TrustError(f"{path}:{lineno}: expected 3 columns, got {len(row)}")
            flag = row[2].strip().lower()
            if flag not in ("true", "false"):
                raise TrustError(f"{path}:{lineno}: resumed must be true or false, got {row[2]!r}")
            try:
                out.append(ResumptionRecord(canonical_hostname(row[0].strip()),
                                            canonical_hostname(row[1].strip()), flag == "true"))
            except DomainError as exc:
                raise TrustError(f"{path}:{lineno}: {exc}") from exc
    return out


def write_resumption_csv(path: str | Path, records: Iterable[ResumptionRecord]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["origin_host", "target_host", "resumed"])
        for r in records:
            w.writerow([r.origin_host, r.target_host, "true" if r.resumed else "false"])


def load_relations(path: str | Path, known_hosts: Iterable[str] | None = None) -> TrustRelationSet:
    """Load a relation set from JSON (sorted pair list) or resumption CSV."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return resumption_trust_relations(read_resumption_csv(path), known_hosts)
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise TrustError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}") from exc
    return TrustRelationSet.from_json(doc)


def save_relations(path: str | Path, relations: TrustRelationSet) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(relations.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")
