import pytest
from scipy import stats

from lpinet.config import WorkloadConfig
from lpinet.workload import (HOTSPOT, PHASED, PHASED_HOTSPOT, WorkloadError,
                             generate, load_trace, segment)

RATE = 10_000_000_000


def wl(**kw):
    return WorkloadConfig(**kw)


def test_phased_has_silent_compute_windows():
    cfg = wl(kind=PHASED, compute_ns=100_000, jitter_pct=0.0,
             messages_per_burst=10, budget_messages=40)
    inj, msgs = generate(cfg, 4, seed=1, mtu=1500, rate_bps=RATE)
    assert msgs == 40
    by_src = {}
    for i in inj:
        by_src.setdefault(i.src, []).append(i.t_ns)
    for times in by_src.values():
        distinct = sorted(set(times))
        assert distinct[0] >= 100_000  # compute comes first
        for a, b in zip(distinct, distinct[1:]):
            assert b - a >= 100_000


def test_hot_fraction_one_targets_only_hot():
    cfg = wl(kind=HOTSPOT, hot_fraction=1.0, hot_dst=3, budget_messages=64)
    inj, _ = generate(cfg, 8, seed=1, mtu=1500, rate_bps=RATE)
    assert all(i.dst == 3 or i.src == 3 for i in inj)
    assert all(i.flow == ("hot" if i.dst == 3 else "cold") for i in inj)


def test_hot_fraction_zero_is_uniform_chi_square():
    n = 16
    cfg = wl(kind=HOTSPOT, hot_fraction=0.0, budget_messages=100_000)
    inj, _ = generate(cfg, n, seed=7, mtu=1500, rate_bps=RATE)
    sent = [i for i in inj if i.src == 5]
    counts = [0] * n
    for i in sent:
        counts[i.dst] += 1
    assert counts[5] == 0  # never to self
    peers = [c for d, c in enumerate(counts) if d != 5]
    _, p = stats.chisquare(peers)
    assert p > 1e-3


def test_budget_accounting_exact():
    cfg = wl(kind=PHASED_HOTSPOT, budget_messages=101, messages_per_burst=7)
    _, msgs = generate(cfg, 8, seed=3, mtu=1500, rate_bps=RATE)
    assert msgs == 101


def test_reproducible_streams():
    cfg = wl(kind=PHASED_HOTSPOT, budget_messages=64)
    a, _ = generate(cfg, 8, seed=11, mtu=1500, rate_bps=RATE)
    b, _ = generate(cfg, 8, seed=11, mtu=1500, rate_bps=RATE)
    c, _ = generate(cfg, 8, seed=12, mtu=1500, rate_bps=RATE)
    assert a == b
    assert a != c


def test_segmentation_respects_mtu_and_minimum():
    assert segment(1500, 1500) == [1500]
    assert segment(4000, 1500) == [1500, 1500, 1000]
    assert segment(3010, 1500) == [1500, 1500, 64]  # runt tail padded up


def test_oversize_messages_are_segmented_on_injection():
    cfg = wl(kind=PHASED, message_bytes=4000, budget_messages=8,
             messages_per_burst=1)
    inj, msgs = generate(cfg, 4, seed=1, mtu=1500, rate_bps=RATE)
    assert msgs == 8
    assert len(inj) == 24
    assert all(64 <= i.size <= 1500 for i in inj)


# -- trace files ---------------------------------------------------------------

def test_empty_trace_is_empty_stream(tmp_path):
    p = tmp_path / "empty.txt"
    p.write_text("")
    inj, msgs = load_trace(str(p), 4, 1500)
    assert inj == [] and msgs == 0


def test_trace_three_records(tmp_path):
    p = tmp_path / "t.txt"
    p.write_text("# header comment\n0 0 1 1500\n10 1 2 64\n10 2 0 200\n")
    inj, msgs = load_trace(str(p), 4, 1500)
    assert msgs == 3
    assert [(i.t_ns, i.src, i.dst, i.size) for i in inj] == [
        (0, 0, 1, 1500), (10, 1, 2, 64), (10, 2, 0, 200)]


def test_trace_unsorted_rejected_with_line(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("100 0 1 64\n50 1 0 64\n")
    with pytest.raises(WorkloadError, match=r":(2): .*not sorted"):
        load_trace(str(p), 4, 1500)


def test_trace_malformed_line_number_in_error(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("0 0 1 64\nnot a record\n")
    with pytest.raises(WorkloadError, match=r":2:"):
        load_trace(str(p), 4, 1500)


def test_trace_out_of_range_endpoint(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("0 0 9 64\n")
    with pytest.raises(WorkloadError, match="out of range"):
        load_trace(str(p), 4, 1500)
