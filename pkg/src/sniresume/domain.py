"""Hostnames, certificate descriptors and page-load domain trees.

A domain tree records which hostname caused a request to which other
hostname while a single page was loading. The root is the site's
root-domain and counts as the first sequential TLS connection, so the
root has depth 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping


class DomainError(ValueError):
    """Raised for malformed hostnames, certificates or tree documents."""


def canonical_hostname(name: str) -> str:
    """Return the lowercase form of *name* after validating DNS syntax."""
    if not isinstance(name, str):
        raise DomainError(f"hostname must be a string, got {type(name).__name__}")
    host = name.lower()
    if not host:
        raise DomainError("empty hostname")
    if not host.isascii():
        raise DomainError(f"non-ASCII hostname: {name!r}")
    if host.startswith(".") or host.endswith("."):
        raise DomainError(f"leading or trailing dot in {name!r}")
    if len(host) > 253:
        raise DomainError(f"hostname longer than 253 characters: {name!r}")
    for label in host.split("."):
        if not 1 <= len(label) <= 63:
            raise DomainError(f"bad label length in {name!r}")
        if any(c.isspace() or c in "/\\@:" for c in label):
            raise DomainError(f"illegal character in {name!r}")
    return host


def canonical_san_pattern(pattern: str) -> str:
    """Validate a SAN pattern: an exact name or ``*.<suffix>``."""
    if not isinstance(pattern, str):
        raise DomainError("SAN pattern must be a string")
    if pattern.startswith("*."):
        suffix = canonical_hostname(pattern[2:])
        if "*" in suffix:
            raise DomainError(f"wildcard only allowed as leftmost label: {pattern!r}")
        if "." not in suffix:
            # `*.com` would span a whole public suffix
            raise DomainError(f"wildcard needs at least two suffix labels: {pattern!r}")
        return "*." + suffix
    if "*" in pattern:
        raise DomainError(f"wildcard only allowed as the entire leftmost label: {pattern!r}")
    return canonical_hostname(pattern)


@dataclass(frozen=True)
class CertificateDescriptor:
    """Structural stand-in for an X.509 leaf certificate."""

    subject_sni: str
    san_list: tuple[str, ...]
    key_id: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "subject_sni", canonical_hostname(self.subject_sni))
        sans = tuple(canonical_san_pattern(p) for p in self.san_list)
        if not sans:
            raise DomainError(f"certificate for {self.subject_sni} has an empty SAN list")
        object.__setattr__(self, "san_list", sans)

    def to_json(self) -> dict[str, Any]:
        return {"subject": self.subject_sni, "san": list(self.san_list), "key_id": self.key_id}

    @classmethod
    def from_json(cls, doc: Mapping[str, Any]) -> "CertificateDescriptor":
        try:
            return cls(doc["subject"], tuple(doc["san"]), str(doc.get("key_id", "")))
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed certificate record: {doc!r}") from exc


@dataclass(frozen=True)
class DomainTree:
    """Causal request tree of one site visit.

    ``parent`` maps every non-root node to the node whose response
    triggered the request. Use :func:`build_tree` or
    :func:`parse_domain_tree` rather than constructing directly; both
    validate the tree shape.
    """

    root: str
    parent: Mapping[str, str]
    tls_supported: Mapping[str, bool]
    cert: Mapping[str, CertificateDescriptor] = field(default_factory=dict)

    @property
    def nodes(self) -> frozenset[str]:
        return frozenset(self.tls_supported)

    @property
    def tls_hosts(self) -> frozenset[str]:
        return frozenset(h for h, ok in self.tls_supported.items() if ok)

    def children(self) -> dict[str, list[str]]:
        kids: dict[str, list[str]] = {h: [] for h in self.tls_supported}
        for child, par in self.parent.items():
            kids[par].append(child)
        for v in kids.values():
            v.sort()
        return kids

    def path_to(self, node: str) -> list[str]:
        """Hostnames from the root down to *node*, both included."""
        node = canonical_hostname(node)
        if node not in self.tls_supported:
            raise DomainError(f"unknown node {node!r}")
        path = [node]
        while path[-1] != self.root:
            path.append(self.parent[path[-1]])
        path.reverse()
        return path


def build_tree(
    root: str,
    edges: Mapping[str, str] | Iterable[tuple[str, str]] = (),
    tls: Mapping[str, bool] | None = None,
    certs: Mapping[str, CertificateDescriptor] | None = None,
) -> DomainTree:
    """Build and validate a tree from ``child -> parent`` edges.

    Nodes missing from *tls* default to TLS-capable.
    """
    root = canonical_hostname(root)
    pairs = edges.items() if isinstance(edges, Mapping) else edges
    parent: dict[str, str] = {}
    for child, par in pairs:
        child, par = canonical_hostname(child), canonical_hostname(par)
        if child == root:
            raise DomainError(f"root {root} cannot have a parent")
        if child in parent and parent[child] != par:
            raise DomainError(f"{child} has conflicting parents {parent[child]} and {par}")
        parent[child] = par

    nodes = {root, *parent}
    for par in parent.values():
        if par not in nodes:
            raise DomainError(f"parent {par} is not a node of the tree")

    # every node must reach the root without revisiting anything
    for start in parent:
        seen = {start}
        cur = start
        while cur != root:
            cur = parent[cur]
            if cur in seen:
                raise DomainError(f"cycle detected through {cur}")
            seen.add(cur)

    tls_map = {h: True for h in nodes}
    for host, ok in (tls or {}).items():
        host = canonical_hostname(host)
        if host not in nodes:
            raise DomainError(f"TLS flag for unknown node {host}")
        tls_map[host] = bool(ok)
    cert_map = {}
    for host, c in (certs or {}).items():
        host = canonical_hostname(host)
        if host not in nodes:
            raise DomainError(f"certificate for unknown node {host}")
        cert_map[host] = c
    return DomainTree(root=root, parent=parent, tls_supported=tls_map, cert=cert_map)


def parse_domain_tree(document: Mapping[str, Any]) -> DomainTree:
    """Validate an ingestion document and return the tree it describes.

    The document shape is::

        {"root": str,
         "nodes": [{"host": str, "parent": str | null, "tls": bool,
                    "cert": {"subject": str, "san": [str], "key_id": str} | null}]}

    The root may be listed in ``nodes`` with a null parent or left out.
    A hostname listed twice with different parents is an error.
    """
    if not isinstance(document, Mapping) or "root" not in document:
        raise DomainError("document must be an object with a 'root' field")
    root = canonical_hostname(document["root"])
    entries = document.get("nodes", [])
    if not isinstance(entries, list):
        raise DomainError("'nodes' must be a list")

    parent: dict[str, str] = {}
    tls: dict[str, bool] = {root: True}
    certs: dict[str, CertificateDescriptor] = {}
    seen: set[str] = set()
    for entry in entries:
        if not isinstance(entry, Mapping) or "host" not in entry:
            raise DomainError(f"node entry without 'host': {entry!r}")
        host = canonical_hostname(entry["host"])
        par = entry.get("parent")
        par = canonical_hostname(par) if par is not None else None
        if host in seen:
            if parent.get(host) != par:
                raise DomainError(f"duplicate hostname {host} with conflicting parents")
            raise DomainError(f"duplicate hostname {host}")
        seen.add(host)
        if host == root:
            if par is not None:
                raise DomainError(f"root {root} cannot have a parent")
        elif par is None:
            raise DomainError(f"non-root node {host} has no parent")
        else:
            parent[host] = par
        flag = entry.get("tls", True)
        if not isinstance(flag, bool):
            raise DomainError(f"'tls' of {host} must be a boolean")
        tls[host] = flag
        if entry.get("cert") is not None:
            certs[host] = CertificateDescriptor.from_json(entry["cert"])
    for par in parent.values():
        if par not in tls:
            raise DomainError(f"unreachable node: parent {par} is not listed")
    return build_tree(root, parent, tls, certs)


def serialize_domain_tree(tree: DomainTree) -> dict[str, Any]:
    """Canonical ingestion document for *tree* (nodes sorted by depth, name)."""
    order = sorted(tree.nodes, key=lambda h: (node_depth(tree, h), h))
    nodes = []
    for host in order:
        c = tree.cert.get(host)
        nodes.append({
            "host": host,
            "parent": tree.parent.get(host),
            "tls": tree.tls_supported[host],
            "cert": c.to_json() if c else None,
        })
    return {"root": tree.root, "nodes": nodes}


def load_tree(path: str | Path) -> DomainTree:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DomainError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}") from exc
    try:
        return parse_domain_tree(doc)
    except DomainError as exc:
        raise DomainError(f"{path}: {exc}") from exc


def load_corpus(directory: str | Path) -> list[DomainTree]:
    """Load every ``*.json`` tree in *directory*, ordered by root name."""
    directory = Path(directory)
    if not directory.is_dir():
        raise DomainError(f"corpus directory {directory} does not exist")
    trees = [load_tree(p) for p in sorted(directory.glob("*.json"))]
    roots = [t.root for t in trees]
    if len(set(roots)) != len(roots):
        raise DomainError(f"corpus {directory} contains duplicate root domains")
    return sorted(trees, key=lambda t: t.root)


def node_depth(tree: DomainTree, node: str) -> int:
    """Number of sequential connections needed to reach *node* (root = 1)."""
    node = canonical_hostname(node)
    if node not in tree.tls_supported:
        raise DomainError(f"unknown node {node!r}")
    depth = 1
    while node != tree.root:
        node = tree.parent[node]
        depth += 1
    return depth


def depths(tree: DomainTree) -> dict[str, int]:
    """Depth of every node, computed top-down in one pass."""
    out = {tree.root: 1}
    kids = tree.children()
    stack = [tree.root]
    while stack:
        cur = stack.pop()
        for k in kids[cur]:
            out[k] = out[cur] + 1
            stack.append(k)
    return out


def longest_path(tree: DomainTree) -> int:
    """Deepest TLS-capable node; non-TLS ancestors still add their hop."""
    d = depths(tree)
    return max((d[h] for h in tree.tls_hosts), default=1)


def distinct_tls_hostnames(tree: DomainTree) -> int:
    return len(tree.tls_hosts)
