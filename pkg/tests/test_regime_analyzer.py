import math

import pytest
from hypothesis import given, settings, strategies as st

from fracwave.errors import EmptyDeltaWindow, InvalidDelta, InvalidParams
from fracwave.regime_analyzer import (
    BOUNDARY_TOL, ParamPoint, blowup_proof_exponents, bootstrap_indices, classify, delta_window,
    derive_exponents, gelt_terms, neg_blocks)


def test_validation():
    for args in [(1.0, 1.5, 2, 2, 3), (1.5, 2.0, 2, 2, 3), (1.5, 1.5, 1, 1, 3), (1.5, 1.5, 0.5, 4, 3),
                 (1.5, 1.5, 2, 2, 0), (1.5, 1.5, 2, 2, 2.5), (1.5, 1.5, math.inf, 2, 3)]:
        with pytest.raises(InvalidParams):
            ParamPoint(*args)


def test_normalization():
    pt, swapped = ParamPoint(1.8, 1.5, 3, 2, 3).normalized()
    assert swapped and (pt.gamma1, pt.gamma2, pt.p, pt.q) == (1.5, 1.8, 2, 3)
    pt, swapped = ParamPoint(1.5, 1.8, 3, 2, 3).normalized()
    assert not swapped and not pt.ordered


def test_global_example():
    rep = classify(ParamPoint(1.5, 1.5, 3, 3, 3))
    assert rep.classification == "GlobalSmallData"
    assert gelt_terms(rep.normalized) == pytest.approx((7 / 6, 7 / 6))
    assert rep.derived is not None and rep.derived.delta == pytest.approx((5 / 9 + 1) / 2)


def test_blowup_example():
    pt = ParamPoint(1.5, 1.5, 2, 2, 1)
    rep = classify(pt)
    assert rep.classification == "BlowUp"
    assert neg_blocks(pt)[0][0] == pytest.approx(5 / 3)
    for d1, d2 in blowup_proof_exponents(pt).values():
        assert d1 == pytest.approx(-1.75) and d2 == pytest.approx(-1.75)


def test_explicit_delta():
    ex = derive_exponents(ParamPoint(1.5, 1.5, 3, 3, 3), 0.9)
    assert ex.s1 == pytest.approx(10 / 3) and ex.sigma1 == pytest.approx(0.075)
    with pytest.raises(InvalidDelta):
        derive_exponents(ParamPoint(1.5, 1.5, 3, 3, 3), 0.5)


def test_empty_window():
    pt = ParamPoint(1.5, 1.5, 1.2, 1.2, 1)
    lo, hi = delta_window(pt)
    assert lo >= hi
    with pytest.raises(EmptyDeltaWindow):
        derive_exponents(pt)


def test_bootstrap_sequence():
    pt = ParamPoint(1.5, 1.5, 2, 2, 4)
    ex = derive_exponents(pt)
    b = bootstrap_indices(pt, ex)
    assert b.i0 == 4
    assert b.inv_s_prime == pytest.approx([5 / 12, 3 / 8, 7 / 24, 1 / 8])
    assert b.eta == pytest.approx((1 - ex.delta) / 4)
    with pytest.raises(InvalidParams):
        bootstrap_indices(pt, ex, eta=1.0)


def test_blowup_exponents_need_superlinear():
    with pytest.raises(InvalidParams):
        blowup_proof_exponents(ParamPoint(1.5, 1.5, 1, 3, 1))


def test_gap_and_inapplicable():
    assert classify(ParamPoint(1.2, 1.5, 3, 2, 4)).classification == "BothConditionsFail"
    rep = classify(ParamPoint(1.5, 1.5, 2, 2, 3))
    assert rep.classification == "BlowUp" and not rep.flags["inconsistent"]


def test_report_serialises():
    d = classify(ParamPoint(1.5, 1.5, 3, 3, 3)).to_dict()
    assert d["classification"] == "GlobalSmallData" and d["derived"]["s1"] > 0
    assert all(set(e) == {"name", "lhs", "rhs", "relation", "satisfied"} for e in d["ledger"])


orders = st.floats(1.01, 1.99)
powers = st.floats(1.01, 8.0)


@settings(max_examples=300, deadline=None)
@given(orders, orders, powers, powers, st.integers(1, 6))
def test_ledger_invariants(g1, g2, p, q, N):
    pt = ParamPoint(g1, g2, p, q, N)
    rep = classify(pt)
    if rep.derived is not None:
        assert all(abs(r) <= 1e-12 for r in rep.derived.identities.values())
        assert all(i.satisfied or abs(i.margin) <= BOUNDARY_TOL for i in rep.derived.inequalities)
        b = bootstrap_indices(pt, rep.derived)
        assert 1 <= b.i0 < 10_000
    if rep.classification == "BlowUp":
        assert min(min(v) for v in rep.blowup_exponents.values()) < 0
    assert rep.flags["inconsistent"] == (rep.classification == "Indeterminate" and rep.derived is not None
                                         and rep.flags["blowup_hypotheses"]
                                         and (rep.flags["blowup_block1"] or rep.flags["blowup_block2"]))


@settings(max_examples=100, deadline=None)
@given(orders, orders, powers, powers, st.integers(1, 6))
def test_swap_symmetry(g1, g2, p, q, N):
    a = classify(ParamPoint(g1, g2, p, q, N))
    b = classify(ParamPoint(g2, g1, q, p, N))
    assert a.classification == b.classification
