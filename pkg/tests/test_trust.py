import itertools
import random
from statistics import fmean

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sniresume.domain import CertificateDescriptor, build_tree
from sniresume.fixtures import random_relations, random_tree
from sniresume.trust import (
    ResumptionRecord,
    TrustError,
    TrustRelationSet,
    cert_trust_relations,
    group_stats,
    load_relations,
    read_resumption_csv,
    resumption_trust_relations,
    san_matches,
    save_relations,
    trust_groups,
    union_relations,
    write_resumption_csv,
)

from oracles import uf_groups


def label_match(pattern, host):
    """Independent matcher: equal label count, '*' only as a whole first label."""
    p, h = pattern.split("."), host.split(".")
    return len(p) == len(h) and all(a == b or (i == 0 and a == "*") for i, (a, b) in enumerate(zip(p, h)))


def cert(host, *san):
    return CertificateDescriptor(host, san or (host,))


class TestSanMatches:
    @pytest.mark.parametrize("pattern,host,expected", [
        ("*.example.com", "static.example.com", True),
        ("*.example.com", "a.b.example.com", False),
        ("*.example.com", "example.com", False),
        ("www.google.com", "www.google.com", True),
        ("WWW.Google.com", "www.GOOGLE.com", True),
        ("www.google.com", "google.com", False),
    ])
    def test_examples(self, pattern, host, expected):
        assert san_matches(pattern, host) is expected

    @pytest.mark.parametrize("bad", ["*", "a.*.com", "*.com", "**.a.com", ""])
    def test_malformed(self, bad):
        with pytest.raises(TrustError):
            san_matches(bad, "a.com")

    @settings(max_examples=300)
    @given(st.lists(st.sampled_from(["a", "b", "c"]), min_size=1, max_size=4),
           st.lists(st.sampled_from(["a", "b", "c"]), min_size=2, max_size=4),
           st.booleans())
    def test_agrees_with_label_matcher(self, host_labels, pat_labels, wild):
        host = ".".join(host_labels)
        pattern = ".".join((["*"] + pat_labels[1:]) if wild and len(pat_labels) > 2 else pat_labels)
        assert san_matches(pattern, host) == label_match(pattern, host)


class TestCertRelations:
    def test_one_sided_coverage_is_enough(self):
        t = build_tree("a.com", {"b.com": "a.com"},
                       certs={"a.com": cert("a.com", "a.com", "b.com"), "b.com": cert("b.com")})
        assert cert_trust_relations([t]).relations == {frozenset({"a.com", "b.com"})}

    def test_unrelated(self):
        t = build_tree("a.com", {"b.com": "a.com"}, certs={"a.com": cert("a.com"), "b.com": cert("b.com")})
        assert len(cert_trust_relations([t])) == 0

    def test_six_node_fixture(self):
        hosts = ["r.one.com", "x.one.com", "p.two.net", "q.two.net", "solo.org", "alone.io"]
        certs = {
            "r.one.com": cert("r.one.com", "r.one.com", "x.one.com"),
            "x.one.com": cert("x.one.com"),
            "p.two.net": cert("p.two.net", "*.two.net"),
            "q.two.net": cert("q.two.net"),
            "solo.org": cert("solo.org"),
            "alone.io": cert("alone.io"),
        }
        t = build_tree("r.one.com", {h: "r.one.com" for h in hosts[1:]}, certs=certs)
        brute = {frozenset((a, b)) for a, b in itertools.combinations(hosts, 2)
                 if any(label_match(p, b) for p in certs[a].san_list)
                 or any(label_match(p, a) for p in certs[b].san_list)}
        assert len(brute) == 2
        assert cert_trust_relations([t]).relations == brute

    def test_scope(self):
        t1 = build_tree("a.shared.com", certs={"a.shared.com": cert("a.shared.com", "*.shared.com")})
        t2 = build_tree("b.shared.com", certs={"b.shared.com": cert("b.shared.com")})
        assert len(cert_trust_relations([t1, t2])) == 0
        assert cert_trust_relations([t1, t2], scope="corpus").relations == {
            frozenset({"a.shared.com", "b.shared.com"})}
        with pytest.raises(TrustError):
            cert_trust_relations([t1], scope="galaxy")

    def test_hosts_without_certs(self):
        t = build_tree("a.com", {"b.com": "a.com"})
        assert len(cert_trust_relations([t])) == 0


class TestResumptionRelations:
    def test_one_direction_suffices(self):
        r = resumption_trust_relations([ResumptionRecord("a.com", "b.com", True),
                                        ResumptionRecord("b.com", "a.com", False)])
        assert frozenset({"a.com", "b.com"}) in r.relations

    def test_mutual_switch(self):
        recs = [ResumptionRecord("a.com", "b.com", True), ResumptionRecord("b.com", "a.com", False)]
        assert len(resumption_trust_relations(recs, symmetrize="both")) == 0
        recs[1] = ResumptionRecord("b.com", "a.com", True)
        assert len(resumption_trust_relations(recs, symmetrize="both")) == 1

    def test_empty_and_failed(self):
        assert len(resumption_trust_relations([])) == 0
        assert len(resumption_trust_relations([ResumptionRecord("a.com", "b.com", False),
                                               ResumptionRecord("b.com", "a.com", False)])) == 0

    def test_unknown_host(self):
        with pytest.raises(TrustError, match="unknown host"):
            resumption_trust_relations([ResumptionRecord("a.com", "z.com", True)], known_hosts=["a.com"])

    def test_csv_round_trip(self, tmp_path):
        recs = [ResumptionRecord("a.com", "b.com", True), ResumptionRecord("b.com", "a.com", False)]
        path = tmp_path / "r.csv"
        write_resumption_csv(path, recs)
        assert read_resumption_csv(path) == recs
        assert load_relations(path).relations == {frozenset({"a.com", "b.com"})}

    @pytest.mark.parametrize("text", ["a,b,c\n", "origin_host,target_host,resumed\na.com,b.com,maybe\n",
                                      "origin_host,target_host,resumed\na.com,b.com\n", ""])
    def test_csv_errors(self, tmp_path, text):
        path = tmp_path / "r.csv"
        path.write_text(text)
        with pytest.raises(TrustError):
            read_resumption_csv(path)


class TestUnion:
    def test_examples(self):
        r1 = TrustRelationSet.from_pairs("certificate", [("a.com", "b.com")])
        r2 = TrustRelationSet.from_pairs("resumption", [("b.com", "c.com")])
        u = union_relations(r1, r2)
        assert u.source == "union"
        assert u.sorted_pairs() == [["a.com", "b.com"], ["b.com", "c.com"]]
        assert union_relations(r1, TrustRelationSet("resumption", frozenset())).relations == r1.relations

    def test_irreflexive(self):
        assert len(TrustRelationSet.from_pairs("union", [("a.com", "A.com")])) == 0
        with pytest.raises(TrustError):
            TrustRelationSet("union", frozenset({frozenset({"a.com"})}))

    def test_json_round_trip(self, tmp_path, corpus_relations):
        path = tmp_path / "rel.json"
        save_relations(path, corpus_relations["union"])
        assert load_relations(path) == corpus_relations["union"]


class TestGroups:
    def test_chain_of_relations(self):
        t = build_tree("a.com", {"b.com": "a.com", "c.com": "a.com", "d.com": "a.com"})
        rel = TrustRelationSet.from_pairs("union", [("a.com", "b.com"), ("b.com", "c.com")])
        groups = trust_groups(t, rel)
        assert set(groups.groups) == set(uf_groups(t.tls_hosts, rel.relations))
        assert set(groups.groups) == {frozenset({"a.com", "b.com", "c.com"}), frozenset({"d.com"})}

    def test_no_and_complete_relations(self, google):
        assert len(trust_groups(google, TrustRelationSet("union", frozenset()))) == 8
        complete = TrustRelationSet.from_pairs("union", itertools.combinations(sorted(google.tls_hosts), 2))
        assert len(trust_groups(google, complete)) == 1

    def test_non_tls_hosts_excluded(self):
        t = build_tree("a.com", {"b.com": "a.com"}, tls={"b.com": False})
        rel = TrustRelationSet.from_pairs("union", [("a.com", "b.com")])
        assert trust_groups(t, rel).groups == (frozenset({"a.com"}),)


class TestGroupStats:
    def test_single_site(self):
        t = build_tree("a.com", {"b.com": "a.com", "c.com": "a.com", "d.com": "c.com"})
        rel = TrustRelationSet.from_pairs("union", [("a.com", "b.com"), ("c.com", "d.com")])
        s = group_stats([t], rel)
        assert (s.mean_group_count, s.mean_group_size, s.root_group_sizes) == (2, 2.0, {2: 1})

    def test_singletons(self, google):
        s = group_stats([google], TrustRelationSet("union", frozenset()))
        assert s.mean_group_size == 1.0

    def test_empty(self):
        with pytest.raises(TrustError):
            group_stats([], TrustRelationSet("union", frozenset()))

    @pytest.mark.parametrize("source", ["certificate", "resumption", "union"])
    def test_corpus_recount(self, corpus, corpus_relations, source):
        rel = corpus_relations[source]
        counts, hosts, roots = [], [], {}
        for t in corpus:
            tls = {h for h, ok in t.tls_supported.items() if ok}
            gs = uf_groups(tls, rel.relations)
            counts.append(len(gs))
            hosts.append(len(tls))
            size = next(len(g) for g in gs if t.root in g)
            roots[size] = roots.get(size, 0) + 1
        s = group_stats(corpus, rel)
        assert s.mean_group_count == pytest.approx(fmean(counts))
        assert s.mean_group_size == pytest.approx(sum(hosts) / sum(counts))
        assert s.root_group_sizes == roots
        # size x count reproduces mean host count
        assert s.mean_group_size * s.mean_group_count == pytest.approx(fmean(hosts))

    def test_union_ordering(self, corpus, corpus_relations):
        stats = {k: group_stats(corpus, v) for k, v in corpus_relations.items()}
        assert stats["union"].mean_group_size >= stats["certificate"].mean_group_size
        assert stats["union"].mean_group_size >= stats["resumption"].mean_group_size
        assert stats["union"].mean_group_size > stats["resumption"].mean_group_size
        for t in corpus:
            u = {h: len(g) for g in trust_groups(t, corpus_relations["union"]).groups for h in g}
            for src in ("certificate", "resumption"):
                for g in trust_groups(t, corpus_relations[src]).groups:
                    for h in g:
                        assert u[h] >= len(g)


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**32), st.floats(0, 0.6))
def test_partition_and_monotonicity(n, seed, p):
    rng = random.Random(seed)
    t = random_tree(rng, n, 0.2)
    rel = random_relations(rng, sorted(t.nodes), p)
    groups = trust_groups(t, rel)
    members = [h for g in groups.groups for h in g]
    assert len(members) == len(set(members))
    assert set(members) == t.tls_hosts
    assert set(groups.groups) == set(uf_groups(t.tls_hosts, rel.relations))
    hosts = sorted(t.tls_hosts)
    if len(hosts) >= 2:
        a, b = rng.sample(hosts, 2)
        more = TrustRelationSet("union", rel.relations | {frozenset((a, b))})
        assert len(trust_groups(t, more)) <= len(groups)
