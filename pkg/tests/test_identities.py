import json

import pytest

from mockdepth.identities import (
    CLEARING,
    IdentityRecord,
    Side,
    build_sides,
    lookup,
    registry,
    stability_check,
    unclear,
    verify,
    verify_all,
    verify_record,
)
from mockdepth.series import QSeries, SeriesUsageError, TruncationPolicy, window_compare

IDS = [r.id for r in registry()]
SMALL = TruncationPolicy(zeta_cap=4, q_cap=16)


def test_registry_has_fifteen_records():
    assert len(registry()) == 15
    assert IDS == sorted(IDS)
    assert len(set(IDS)) == 15


def test_lookup():
    rec = lookup("ID-C1")
    assert rec.clearing == CLEARING
    assert "f_1" in rec.citation
    with pytest.raises(SeriesUsageError):
        lookup("ID-Z9")


def test_citations_nonempty():
    assert all(r.citation.strip() for r in registry())


def test_clearing_only_on_b_and_c():
    for r in registry():
        assert (r.clearing is not None) == (r.id[3] in "BC")


def test_verify_a1_deep_zeta_free():
    assert verify("ID-A1", TruncationPolicy(zeta_cap=0, q_cap=50)).status == "PASS"


def test_verify_b1_default_window():
    rep = verify("ID-B1", TruncationPolicy(zeta_cap=12, q_cap=40))
    assert rep.status == "PASS"
    assert rep.first_mismatch is None
    assert rep.clearing == CLEARING


@pytest.mark.parametrize("rid", IDS)
def test_fault_injection_top_corner(rid):
    pol = SMALL
    rep = verify(rid, pol, perturb=(pol.q_cap, 0, 1))
    assert rep.status == "FAIL"
    assert rep.first_mismatch[:2] == (pol.q_cap, 0)
    lhs, rhs = rep.first_mismatch[2:]
    assert rhs - lhs == 1


@pytest.mark.parametrize("rid", IDS)
def test_fault_injection_interior(rid):
    pol = SMALL
    rep = verify(rid, pol, perturb=(5, -2, 3))
    assert rep.status == "FAIL"
    assert rep.first_mismatch[:2] == (5, -2)


def test_fault_outside_window_is_ignored():
    rep = verify("ID-C1", SMALL, perturb=(3, SMALL.zeta_cap + 1, 1))
    assert rep.status == "PASS"


def test_verify_all_small_window():
    reps = verify_all(TruncationPolicy(zeta_cap=2, q_cap=4))
    assert [r.id for r in reps] == IDS
    assert all(r.status == "PASS" for r in reps)


def test_verify_all_guards():
    with pytest.raises(SeriesUsageError):
        verify_all(TruncationPolicy(q_cap=0))
    with pytest.raises(SeriesUsageError):
        verify("ID-A1", TruncationPolicy(q_cap=3))


def test_verify_all_parallel_matches_serial():
    a = [r.to_json(timing=False) for r in verify_all(SMALL)]
    b = [r.to_json(timing=False) for r in verify_all(SMALL, jobs=2)]
    assert a == b


def test_error_status_from_broken_builder():
    def broken(qmax, policy, extra, stats):
        raise ZeroDivisionError("bad factor")

    rec = IdentityRecord("ID-X", Side("one", lambda q, p, e, s: QSeries.one(q)), Side("broken", broken), "test")
    rep = verify_record(rec, SMALL)
    assert rep.status == "ERROR"
    assert "bad factor" in rep.message
    assert rep.to_json()["first_mismatch"] is None


@pytest.mark.parametrize("rid", ["ID-C1", "ID-D1"])
def test_stability_margin_five(rid):
    rep = stability_check(rid, TruncationPolicy(zeta_cap=8, q_cap=30), margin=5)
    assert rep.status == "PASS"
    assert rep.lhs_change is None and rep.rhs_change is None


def test_stability_margin_zero_trivial():
    assert stability_check("ID-C2", SMALL, margin=0).status == "PASS"


def test_stability_detects_insufficient_bounds():
    # a builder whose result depends on the margin is flagged
    def shifting(qmax, policy, extra, stats):
        return QSeries.monomial(1, 0, 2, qmax).scale(extra + 1)

    rec = IdentityRecord("ID-Y", Side("a", shifting), Side("b", shifting), "test")
    import mockdepth.identities as idm

    idm._BY_ID["ID-Y"] = rec
    try:
        rep = stability_check("ID-Y", SMALL, margin=3)
    finally:
        del idm._BY_ID["ID-Y"]
    assert rep.status == "FAIL"
    assert rep.lhs_change == (2, 0, 1, 4)


def test_clearing_soundness_b1():
    pol = TruncationPolicy(zeta_cap=8, q_cap=20)
    rec = lookup("ID-B1")
    lhs, rhs = build_sides(rec, pol)
    assert window_compare(lhs, rhs, pol).equal
    # uncleared right side: 1 + zeta R(zeta, -q; q^2) / ((1 - zeta)(1 + q)), as a zeta-window
    back = unclear(rhs, pol.zeta_cap).truncate_zeta(pol.zeta_cap - 1)
    uncleared_lhs = rec.lhs.build(20, pol, 0, None).truncate_zeta(pol.zeta_cap - 1)
    assert window_compare(back, uncleared_lhs, TruncationPolicy(zeta_cap=pol.zeta_cap - 1, q_cap=20)).equal


def test_monotone_nested_windows():
    for A, B in [(12, 40), (8, 30), (4, 16), (1, 4)]:
        reps = verify_all(TruncationPolicy(zeta_cap=A, q_cap=B))
        assert all(r.status == "PASS" for r in reps), (A, B)


def test_deterministic_reports():
    a = json.dumps([r.to_json(timing=False) for r in verify_all(SMALL)])
    b = json.dumps([r.to_json(timing=False) for r in verify_all(SMALL)])
    assert a == b


def test_report_json_shape():
    doc = verify("ID-E2", SMALL, perturb=(7, 1, -1)).to_json()
    assert doc["schema"] == "1"
    assert set(doc) >= {"id", "status", "policy", "first_mismatch", "term_counts", "citation", "wall_time"}
    assert doc["policy"] == {"A": 4, "B": 16, "G": 2}
    fm = doc["first_mismatch"]
    assert (fm["q"], fm["zeta"]) == (7, 1)
    assert all("/" in fm[k] for k in ("lhs", "rhs"))


def test_term_counts_recorded():
    rep = verify("ID-C1", SMALL)
    assert rep.term_counts["rhs"] > 0 and rep.term_counts["lhs"] > 0
