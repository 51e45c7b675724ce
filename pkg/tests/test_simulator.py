import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sniresume.domain import build_tree
from sniresume.fixtures import random_relations, random_tree
from sniresume.simulator import (
    Histogram,
    InvariantViolation,
    PathUnlockRule as R,
    ResumptionPolicy as P,
    SimulationError,
    pairwise_mean,
    resumption_ratio,
    simulate_corpus,
    simulate_site,
    simulate_site_pair,
)
from sniresume.trust import TrustGroups, TrustRelationSet, trust_groups

from oracles import brute_pair, brute_site

EMPTY = TrustRelationSet("union", frozenset())


def result_tuple(r):
    return (r.full_handshakes, r.resumed_handshakes, r.longest_full_path,
            r.longest_total_path, r.max_full_chain)


def chain(n):
    names = [f"n{i}.test" for i in range(1, n + 1)]
    return build_tree(names[0], dict(zip(names[1:], names))), names


class TestGoogle:
    def test_singletons(self, google):
        r = simulate_site(google, trust_groups(google, EMPTY), P.SAME_HOSTNAME)
        assert result_tuple(r)[:4] == (8, 0, 4, 4)

    def test_chain_group(self, google, google_chain):
        r = simulate_site(google, trust_groups(google, google_chain), P.ACROSS_HOSTNAMES)
        assert (r.full_handshakes, r.resumed_handshakes, r.longest_full_path) == (5, 3, 1)
        # a leaf off www.google.com still needs two full handshakes
        assert r.max_full_chain == 2
        assert result_tuple(r) == brute_site(google, google_chain.relations, "across")

    def test_complete_group(self, google):
        rel = TrustRelationSet.from_pairs("union", itertools.combinations(sorted(google.nodes), 2))
        r = simulate_site(google, trust_groups(google, rel))
        assert (r.full_handshakes, r.longest_full_path, r.max_full_chain) == (1, 1, 1)


class TestChain:
    def test_interleaved_groups(self):
        t, n = chain(5)
        rel = TrustRelationSet.from_pairs("union", [(n[0], n[2]), (n[1], n[4])])
        for rule in R:
            r = simulate_site(t, trust_groups(t, rel), P.ACROSS_HOSTNAMES, rule)
            assert (r.full_handshakes, r.longest_full_path, r.longest_total_path) == (3, 3, 5)

    def test_rules_differ_on_sibling_unlock(self):
        # b and c share a group but sit on different branches at different depths
        t = build_tree("a.test", {"b.test": "a.test", "x.test": "a.test", "c.test": "x.test"})
        rel = TrustRelationSet.from_pairs("union", [("b.test", "c.test")])
        g = trust_groups(t, rel)
        along = simulate_site(t, g, P.ACROSS_HOSTNAMES, R.ALONG_PATH)
        shallow = simulate_site(t, g, P.ACROSS_HOSTNAMES, R.ANY_SHALLOWER)
        assert along.longest_full_path == 3
        assert shallow.longest_full_path == 2

    def test_non_tls_hop_counts(self):
        t = build_tree("a.test", {"b.test": "a.test", "c.test": "b.test"}, tls={"b.test": False})
        rel = TrustRelationSet.from_pairs("union", [("a.test", "c.test")])
        r = simulate_site(t, trust_groups(t, rel))
        assert (r.full_handshakes, r.resumed_handshakes, r.longest_full_path, r.longest_total_path) == (1, 1, 2, 3)

    def test_single_node(self):
        t = build_tree("a.test")
        r = simulate_site(t, trust_groups(t, EMPTY))
        assert result_tuple(r) == (1, 0, 1, 1, 1)


class TestInvariants:
    def test_bad_partition(self):
        t, n = chain(3)
        with pytest.raises(InvariantViolation):
            simulate_site(t, TrustGroups((frozenset(n[:2]),)))
        with pytest.raises(InvariantViolation):
            simulate_site(t, TrustGroups((frozenset(n[:2]), frozenset(n[1:]))))


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 10), st.integers(0, 2**32), st.floats(0, 0.5), st.floats(0, 0.3))
def test_matches_brute_force(n, seed, p_edge, p_non_tls):
    rng = random.Random(seed)
    t = random_tree(rng, n, p_non_tls)
    rel = random_relations(rng, sorted(t.nodes), p_edge)
    groups = trust_groups(t, rel)
    for policy in P:
        for rule in R:
            got = result_tuple(simulate_site(t, groups, policy, rule))
            assert got == brute_site(t, rel.relations, policy.value, rule.value)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 10), st.integers(0, 2**32), st.floats(0, 0.5))
def test_dominance(n, seed, p_edge):
    rng = random.Random(seed)
    t = random_tree(rng, n, 0.1)
    rel = random_relations(rng, sorted(t.nodes), p_edge)
    g = trust_groups(t, rel)
    none, same, across = (simulate_site(t, g, p) for p in P)
    assert none.full_handshakes == same.full_handshakes >= across.full_handshakes == len(g)
    assert across.longest_full_path <= same.longest_full_path == same.longest_total_path


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 10), st.integers(0, 2**32))
def test_relabeling_invariance(n, seed):
    rng = random.Random(seed)
    t = random_tree(rng, n)
    rel = random_relations(rng, sorted(t.nodes), 0.3)
    perm = sorted(t.nodes)
    shuffled = perm[:]
    rng.shuffle(shuffled)
    m = dict(zip(perm, (s.replace("h", "z") for s in shuffled)))
    t2 = build_tree(m[t.root], {m[c]: m[p] for c, p in t.parent.items()})
    rel2 = TrustRelationSet.from_pairs("union", [tuple(m[h] for h in pair) for pair in rel.relations])
    r1 = simulate_site(t, trust_groups(t, rel))
    r2 = simulate_site(t2, trust_groups(t2, rel2))
    assert result_tuple(r1) == result_tuple(r2)


class TestPairs:
    def test_shared_host(self):
        a = build_tree("a.test", {"cdn.test": "a.test"})
        b = build_tree("b.test", {"cdn.test": "b.test"})
        assert simulate_site_pair(a, b, EMPTY, P.NO_RESUMPTION) == 4
        assert simulate_site_pair(a, b, EMPTY, P.SAME_HOSTNAME) == 3
        rel = TrustRelationSet.from_pairs("union", [("b.test", "cdn.test")])
        assert simulate_site_pair(a, b, rel, P.ACROSS_HOSTNAMES) == 2

    @settings(max_examples=150, deadline=None)
    @given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 2**32))
    def test_matches_brute_force(self, na, nb, seed):
        rng = random.Random(seed)
        a = random_tree(rng, na)
        b = random_tree(rng, nb)
        # rename b's hosts so the sites only partly overlap
        ren = {h: h if rng.random() < 0.4 else h.replace("h", "k") for h in b.nodes}
        b = build_tree(ren[b.root], {ren[c]: ren[p] for c, p in b.parent.items()})
        rel = random_relations(rng, sorted(a.nodes | b.nodes), 0.2)
        counts = [simulate_site_pair(a, b, rel, p) for p in P]
        assert counts == [brute_pair(a, b, rel.relations, p.value) for p in P]
        assert counts[0] >= counts[1] >= counts[2]

    def test_pairwise_mean(self):
        sites = [build_tree(f"s{i}.test", {"cdn.test": f"s{i}.test"}) for i in range(4)]
        assert pairwise_mean(sites[:2], EMPTY, P.SAME_HOSTNAME) == 3
        assert pairwise_mean(sites, EMPTY, P.NO_RESUMPTION) == 4
        with pytest.raises(SimulationError):
            pairwise_mean(sites[:1], EMPTY, P.SAME_HOSTNAME)


class TestRatio:
    def test_extremes(self):
        t, n = chain(2)
        rel = TrustRelationSet.from_pairs("union", [tuple(n)])
        assert resumption_ratio([t], rel) == 1.0
        assert resumption_ratio([t], EMPTY) == 0.0

    def test_empty(self):
        with pytest.raises(SimulationError):
            resumption_ratio([], EMPTY)


class TestHistogram:
    def test_overflow(self):
        h = Histogram.of([1, 2, 2, 30], cutoff=3)
        assert (h.counts, h.overflow) == ({1: 1, 2: 2, 3: 0}, 1)
        assert h.shares()[2] == 0.5

    def test_csv_round_trip(self):
        h = Histogram.of([1, 4, 4, 2], cutoff=5)
        assert Histogram.read_csv(h.to_csv()) == h.counts

    def test_errors(self):
        with pytest.raises(SimulationError):
            Histogram.of([1], cutoff=0)
        with pytest.raises(SimulationError):
            Histogram.read_csv("x,y\n1,2\n")


class TestCorpus:
    def test_means_match_per_site(self, corpus, corpus_relations):
        rep = simulate_corpus(corpus, corpus_relations["union"])
        assert len(rep.per_site) == 10
        assert rep.mean_full == pytest.approx(sum(r.full_handshakes for r in rep.per_site) / 10)
        assert sum(rep.full_histogram.counts.values()) + rep.full_histogram.overflow == 10
        assert rep.savings.converted == pytest.approx(rep.mean_tls_hosts - rep.mean_full)
        for t, r in zip(sorted(corpus, key=lambda t: t.root), rep.per_site):
            assert result_tuple(r) == brute_site(t, corpus_relations["union"].relations, "across")

    def test_empty(self):
        with pytest.raises(SimulationError):
            simulate_corpus([], EMPTY)
