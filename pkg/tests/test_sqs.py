import pytest

from lpinet import Scheme, SqsError, map_vc


def test_one_q_everything_on_vc0():
    for src in range(8):
        for dst in range(8):
            assert map_vc(Scheme.ONE_Q, src, dst, 8, 4) == 0


def test_dbbm_destination_modulo():
    assert map_vc(Scheme.DBBM, 0, 7, 16, 4) == 3


def test_bbq_destination_bands():
    assert map_vc(Scheme.BBQ, 0, 15, 16, 4) == 3
    assert map_vc(Scheme.BBQ, 0, 3, 16, 4) == 0


def test_flow2sl_group_distance():
    # N=16, nVC=4 -> group size 4; src 0 in group 0, dst 15 in group 3
    assert map_vc(Scheme.FLOW2SL, 0, 15, 16, 4) == 3


def test_dbbm_balances_destinations_exactly():
    per_vc = [0] * 4
    for dst in range(16):
        per_vc[map_vc(Scheme.DBBM, 0, dst, 16, 4)] += 1
    assert per_vc == [4, 4, 4, 4]


def test_bbq_balances_destinations_exactly():
    per_vc = [0] * 4
    for dst in range(16):
        per_vc[map_vc(Scheme.BBQ, 0, dst, 16, 4)] += 1
    assert per_vc == [4, 4, 4, 4]


def test_out_of_range_endpoint_is_fatal():
    with pytest.raises(SqsError):
        map_vc(Scheme.DBBM, 0, 16, 16, 4)
    with pytest.raises(SqsError):
        map_vc(Scheme.DBBM, -1, 3, 16, 4)


def test_totality_and_range_exhaustive():
    for n in (2, 3, 16, 63, 256):
        for nvc in (1, 2, 3, 4, 8):
            for scheme in Scheme:
                for src in range(0, n, max(1, n // 16)):
                    for dst in range(n):
                        vc = map_vc(scheme, src, dst, n, nvc)
                        assert 0 <= vc < nvc


def test_destination_consistency_dbbm_bbq():
    # all packets to one destination use one VC regardless of source
    for scheme in (Scheme.DBBM, Scheme.BBQ):
        for dst in range(24):
            vcs = {map_vc(scheme, src, dst, 24, 4) for src in range(24)}
            assert len(vcs) == 1


def test_flow2sl_each_source_group_spreads_over_all_vcs():
    n, nvc = 16, 4
    gs = 4
    for src_group in range(nvc):
        src = src_group * gs
        vcs = {map_vc(Scheme.FLOW2SL, src, dst_group * gs, n, nvc)
               for dst_group in range(nvc)}
        assert vcs == set(range(nvc))


def test_mapping_is_stateless_and_deterministic():
    a = [map_vc(Scheme.FLOW2SL, 5, d, 64, 4) for d in range(64)]
    b = [map_vc(Scheme.FLOW2SL, 5, d, 64, 4) for d in range(64)]
    assert a == b
