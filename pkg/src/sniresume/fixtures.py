"""Synthetic sites and bundled fixtures.

The synthetic generator mimics how third-party hosts hang off a page:
a handful of operators each run several hostnames, present certificates
covering some of them, and share ticket keys across a (different)
subset. Everything is driven by an explicit ``random.Random``.
"""

from __future__ import annotations

import json
import random
from importlib import resources
from pathlib import Path

from .domain import CertificateDescriptor, DomainTree, build_tree, load_corpus, parse_domain_tree
from .trust import ResumptionRecord, TrustRelationSet

_WORDS = ["cdn", "static", "img", "api", "www", "media", "ads", "track", "fonts", "js", "m", "login"]
_THIRD_PARTIES = ["adnet.com", "cdnhub.net", "fontsvc.io", "metrics.org", "socialwidget.com", "jsdelivery.net"]


def data_path(name: str) -> Path:
    return Path(str(resources.files("sniresume.data").joinpath(name)))


def google_tree() -> DomainTree:
    with open(data_path("google.json"), encoding="utf-8") as fh:
        return parse_domain_tree(json.load(fh))


def google_chain_relations() -> TrustRelationSet:
    with open(data_path("google_chain_relations.json"), encoding="utf-8") as fh:
        return TrustRelationSet.from_json(json.load(fh))


def corpus10() -> list[DomainTree]:
    return load_corpus(data_path("corpus10"))


def random_tree(rng: random.Random, n_nodes: int, p_non_tls: float = 0.0) -> DomainTree:
    """Uniform random recursive tree over ``h0.test`` ... with no certificates."""
    names = [f"h{i}.test" for i in range(n_nodes)]
    parent = {names[i]: names[rng.randrange(i)] for i in range(1, n_nodes)}
    tls = {n: rng.random() >= p_non_tls for n in names}
    return build_tree(names[0], parent, tls)


def random_relations(rng: random.Random, hosts: list[str], p_edge: float) -> TrustRelationSet:
    pairs = [(a, b) for i, a in enumerate(hosts) for b in hosts[i + 1:] if rng.random() < p_edge]
    return TrustRelationSet.from_pairs("union", pairs)


def synthetic_site(
    rng: random.Random,
    root: str,
    n_hosts: int,
    n_operators: int = 4,
    p_non_tls: float = 0.05,
) -> tuple[DomainTree, list[ResumptionRecord]]:
    """One synthetic site plus the outcome of all-pairs resumption probes.

    Hosts of operator 0 live under the root's registrable domain. Every
    operator presents a wildcard certificate for its own domain to most
    of its hosts, and groups its hosts into one or two ticket-key
    domains; probes resume only inside a ticket-key domain.
    """
    if n_hosts > 100 or not 2 <= n_operators <= len(_THIRD_PARTIES) + 1:
        raise ValueError("synthetic sites are limited to 100 hosts and 2-7 operators")
    base = root.split(".", 1)[1] if root.startswith("www.") else root
    op_domains = [base] + rng.sample(_THIRD_PARTIES, n_operators - 1)
    hosts = [root]
    operator = {root: 0}
    used = {root}
    while len(hosts) < n_hosts:
        op = rng.randrange(n_operators)
        label = rng.choice(_WORDS) if op else f"{rng.choice(_WORDS)}{rng.randrange(10)}"
        name = f"{label}.{op_domains[op]}"
        if name in used:
            continue
        used.add(name)
        hosts.append(name)
        operator[name] = op

    parent = {}
    for i, h in enumerate(hosts[1:], start=1):
        # bias towards shallow attachment, like real pages
        j = min(rng.randrange(i), rng.randrange(i))
        parent[h] = hosts[j]

    tls = {h: (h == root or rng.random() >= p_non_tls) for h in hosts}
    certs: dict[str, CertificateDescriptor] = {}
    stek: dict[str, tuple[int, int]] = {}
    for h in hosts:
        op = operator[h]
        dom = op_domains[op]
        if rng.random() < 0.8:
            san = (dom, f"*.{dom}")
        else:
            san = (h,)
        if tls[h]:
            certs[h] = CertificateDescriptor(h, san, key_id=f"k-{dom}-{len(san)}")
        stek[h] = (op, rng.randrange(2))

    tree = build_tree(root, parent, tls, certs)
    records = []
    tls_hosts = sorted(tree.tls_hosts)
    for a in tls_hosts:
        for b in tls_hosts:
            if a != b:
                records.append(ResumptionRecord(a, b, stek[a] == stek[b] and rng.random() < 0.9))
    return tree, records


def write_corpus10(directory: Path, seed: int = 2019) -> None:
    """Regenerate the bundled ten-site corpus and its resumption probes."""
    from .domain import serialize_domain_tree
    from .trust import write_resumption_csv

    rng = random.Random(seed)
    directory.mkdir(parents=True, exist_ok=True)
    all_records = []
    for i in range(10):
        root = f"www.site{i}.example"
        tree, records = synthetic_site(rng, root, n_hosts=rng.randint(3, 24))
        with open(directory / f"site{i}.json", "w", encoding="utf-8") as fh:
            json.dump(serialize_domain_tree(tree), fh, indent=1, sort_keys=True)
            fh.write("\n")
        all_records.extend(records)
    write_resumption_csv(directory.parent / "corpus10_resumption.csv", all_records)
