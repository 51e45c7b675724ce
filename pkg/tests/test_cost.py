import io

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sniresume.cost import (
    CostModelError,
    DeltaInterval,
    HandshakeCostTable,
    HandshakeMode as M,
    cpu_savings,
    delta_connect,
    delta_per_row,
    derive_delta,
    latency_overhead_bounds,
    load_default_table,
    overlap_gap,
    read_cost_table,
    savings_summary,
    write_cost_table,
)


@pytest.fixture(scope="module")
def table():
    return load_default_table()


def test_bundled_values(table):
    assert table.duration(M.TLS13_FULL, 50) == 190.06
    assert table.duration(M.TLS13_RESUMED_0RTT, 150) == 309.44
    assert table.duration(M.TLS12_RESUMED, 150) == 454.621
    assert table.cpu(M.TLS12_RESUMED, "client") == 0.76
    assert len(table.duration_ms) == 20
    assert len(table.cpu_ms) == 10
    assert table.latencies == [0.3, 50.0, 100.0, 150.0]


def test_missing_entries(table):
    with pytest.raises(CostModelError):
        table.duration(M.TLS13_FULL, 75)
    with pytest.raises(CostModelError):
        table.cpu(M.TLS13_FULL, "proxy")


class TestDelta:
    def test_one_rtt(self, table):
        d = derive_delta(table, M.TLS13_RESUMED_1RTT)
        assert (d.low_ms, d.high_ms, d.rtt_coefficient) == (pytest.approx(22.83, abs=1e-9),
                                                            pytest.approx(30.61, abs=1e-9), 0)

    def test_zero_rtt(self, table):
        d = derive_delta(table, M.TLS13_RESUMED_0RTT)
        assert d.low_ms == pytest.approx(22.30, abs=1e-9)
        assert d.high_ms == pytest.approx(31.43, abs=1e-9)
        assert d.at_rtt(60) == pytest.approx((82.30, 91.43))

    def test_rows_recomputed(self, table):
        rows = delta_per_row(table, M.TLS13_RESUMED_0RTT)
        assert rows[0.3] == pytest.approx(29.17 - 6.57 - 0.3)
        assert rows[150.0] == pytest.approx(490.87 - 309.44 - 150)

    def test_full_mode_rejected(self, table):
        with pytest.raises(CostModelError):
            derive_delta(table, M.TLS12_RESUMED)

    def test_degenerate_table(self):
        dur = {(m, lat): 10.0 for m in (M.TLS13_FULL, M.TLS13_RESUMED_1RTT) for lat in (1.0, 2.0)}
        t = HandshakeCostTable(dur, {}, check_ordering=False)
        d = derive_delta(t, M.TLS13_RESUMED_1RTT)
        assert (d.low_ms, d.high_ms) == (0.0, 0.0)
        with pytest.raises(CostModelError, match="not faster"):
            HandshakeCostTable(dur, {})

    def test_interval_ordering(self):
        with pytest.raises(CostModelError):
            DeltaInterval(2.0, 1.0, 0)


class TestOverlapGap:
    def test_fifty(self, table):
        assert overlap_gap(table, 50) == pytest.approx(9.99, abs=0.01)
        assert overlap_gap(table, 50) == pytest.approx(190.06 - 150 - 29.17 - 0.9)

    def test_hundred(self, table):
        assert overlap_gap(table, 100) == pytest.approx(340.81 - 300 - 29.17 - 0.9)
        assert overlap_gap(table, 100) == pytest.approx(10.74, abs=1e-9)

    def test_baseline_row(self, table):
        assert overlap_gap(table, 0.3) == pytest.approx(-1.80)

    def test_unknown_latency(self, table):
        with pytest.raises(CostModelError):
            overlap_gap(table, 42)


class TestLatencyBounds:
    def test_nineteen_at_sixty(self):
        assert latency_overhead_bounds([60] * 19) == (60, 1140)

    def test_mixed(self):
        assert latency_overhead_bounds([10, 30, 20]) == (10, 60)

    def test_empty(self):
        with pytest.raises(CostModelError):
            latency_overhead_bounds([])

    @given(st.lists(st.floats(0, 1e4), min_size=1, max_size=50))
    def test_parallel_never_exceeds_sequential(self, rtts):
        lo, hi = latency_overhead_bounds(rtts)
        assert lo <= hi + 1e-9


class TestDeltaConnect:
    @pytest.mark.parametrize("hops", [0, 1, 1.58, 4])
    def test_linear(self, table, hops):
        d = derive_delta(table, M.TLS13_RESUMED_1RTT)
        assert delta_connect(hops, d) == pytest.approx((hops * 22.83, hops * 30.61))

    def test_fractional_hops(self, table):
        d = derive_delta(table, M.TLS13_RESUMED_1RTT)
        assert delta_connect(1.58, d)[0] == pytest.approx(36.07, abs=0.01)
        d0 = derive_delta(table, M.TLS13_RESUMED_0RTT)
        assert delta_connect(1.58, d0, 60)[0] == pytest.approx(1.58 * 82.30)

    def test_negative(self, table):
        with pytest.raises(CostModelError):
            delta_connect(-1, derive_delta(table, M.TLS13_RESUMED_1RTT))


class TestCpuSavings:
    def test_corpus_means(self):
        ms, pct = cpu_savings(20.24 - 8.35, 20.24)
        assert ms == pytest.approx(71.34, abs=0.005)
        assert pct == pytest.approx(44.06, abs=0.005)

    def test_small(self):
        assert cpu_savings(3, 10) == pytest.approx((18.0, 22.5))
        assert cpu_savings(0, 10) == (0.0, 0.0)

    def test_errors(self):
        with pytest.raises(CostModelError):
            cpu_savings(1, 0)
        with pytest.raises(CostModelError):
            cpu_savings(-1, 5)


def test_savings_summary(table):
    s = savings_summary(table, 20.24, 8.35, 4.04, 2.46)
    assert s.conversion_percent == pytest.approx(58.75, abs=0.005)
    assert s.resumed_hops == pytest.approx(1.58)
    assert s.delta_connect_1rtt[0] == pytest.approx(36.07, abs=0.01)
    assert s.relative_gain_percent[0.3] == pytest.approx(30.6, abs=0.05)
    assert s.relative_gain_percent[0.3] == pytest.approx(100 * 1.58 * 22.83 / (4.04 * 29.17))
    assert set(s.to_json()["relative_gain_percent"]) == {"0.3", "50.0", "100.0", "150.0"}


class TestCsv:
    def test_round_trip(self, table):
        again = read_cost_table(io.StringIO(write_cost_table(table)))
        assert again == table

    def test_override_changes_delta(self, table, tmp_path):
        text = write_cost_table(table).replace("tls13_resumed_1rtt,0.3,6.34", "tls13_resumed_1rtt,0.3,9.17")
        path = tmp_path / "costs.csv"
        path.write_text(text)
        d = derive_delta(read_cost_table(path), M.TLS13_RESUMED_1RTT)
        assert d.low_ms == pytest.approx(20.0)

    @pytest.mark.parametrize("text,msg", [
        ("tls13_full,1,2\n", "before any section"),
        ("mode,latency_ms,duration_ms\nquic,1,2\n", "unknown mode"),
        ("mode,latency_ms,duration_ms\ntls13_full,1\n", "3 columns"),
        ("mode,latency_ms,duration_ms\ntls13_full,1,x\n", "line 2"),
        ("mode,latency_ms,duration_ms\ntls13_full,1,0\n", "non-positive"),
        ("mode,latency_ms,duration_ms\ntls13_full,1,2\ntls13_full,1,3\n", "duplicate"),
        ("mode,peer,cpu_ms\ntls13_full,client,1\n", "no duration"),
        ("", "no duration"),
    ])
    def test_errors(self, text, msg):
        with pytest.raises(CostModelError, match=msg):
            read_cost_table(io.StringIO(text))
