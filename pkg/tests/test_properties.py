"""Property-based checks of the structural invariants."""

import itertools

from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import is_sp_brute, median_outcome_position
from peakverify.domain import (Alignment, Preference, canonicalize_alignment, domain_intersection,
                               enumerate_single_peaked, is_single_peaked, shared_peaks)
from peakverify.rules import MedianRule, ProjectedSCF, eval_median_rule, order_statistic_value
from peakverify.search import sm_compatible

sizes = st.integers(min_value=3, max_value=6)


@st.composite
def alignments(draw, m=None):
    m = m or draw(sizes)
    return Alignment(tuple(draw(st.permutations(range(m)))))


@st.composite
def rule_and_peaks(draw):
    m = draw(sizes)
    n = draw(st.integers(min_value=3, max_value=7))
    a = draw(alignments(m))
    ph = draw(st.lists(st.integers(0, m - 1), min_size=n - 1, max_size=n - 1))
    peaks = draw(st.lists(st.integers(0, m - 1), min_size=n, max_size=n))
    return MedianRule(a, tuple(ph)), peaks


@given(alignments())
def test_canonicalize_idempotent_and_reverse_invariant(a):
    c = canonicalize_alignment(a)
    assert canonicalize_alignment(c) == c == canonicalize_alignment(a.reversed())


@given(alignments())
def test_domain_size_and_reversal(a):
    dom = enumerate_single_peaked(a)
    assert len(dom) == 2 ** (a.m - 1)
    assert dom == enumerate_single_peaked(a.reversed())


@given(st.data())
def test_single_peaked_agrees_with_unimodal_oracle(data):
    a = data.draw(alignments())
    p = Preference(tuple(data.draw(st.permutations(range(a.m)))))
    assert is_single_peaked(p, a) == is_sp_brute(p.ranking, a.order)


@given(st.data())
def test_shared_peaks_symmetric_and_top_swap_closed(data):
    m = data.draw(st.integers(3, 5))
    a1, a2 = data.draw(alignments(m)), data.draw(alignments(m))
    assert shared_peaks(a1, a2) == shared_peaks(a2, a1)
    inter = set(domain_intersection(a1, a2))
    for p in inter:
        r = p.ranking
        assert Preference((r[1], r[0]) + r[2:]) in inter


@given(rule_and_peaks())
def test_median_matches_statistics(rp):
    r, peaks = rp
    assert eval_median_rule(r, peaks) == median_outcome_position(peaks, r.phantoms)


@given(rule_and_peaks(), st.data())
def test_median_monotone_in_each_peak(rp, data):
    r, peaks = rp
    i = data.draw(st.integers(0, len(peaks) - 1))
    if peaks[i] == r.alignment.m - 1:
        return
    raised = list(peaks)
    raised[i] += 1
    assert eval_median_rule(r, raised) >= eval_median_rule(r, peaks)


@given(rule_and_peaks())
def test_median_anonymous(rp):
    r, peaks = rp
    assert eval_median_rule(r, peaks[::-1]) == eval_median_rule(r, peaks)


@given(st.data())
def test_order_statistic_closed_form(data):
    m = data.draw(sizes)
    n = data.draw(st.integers(3, 7))
    k = data.draw(st.integers(0, n - 1))
    a = canonicalize_alignment(data.draw(alignments(m)))
    r = MedianRule(a, (0,) * k + (m - 1,) * (n - 1 - k))
    peaks = data.draw(st.lists(st.integers(0, m - 1), min_size=n, max_size=n))
    assert order_statistic_value(ProjectedSCF(n, (r,)), a, peaks) == eval_median_rule(r, peaks)


@settings(max_examples=60)
@given(st.data())
def test_sm_compatibility_symmetric_and_matches_profiles(data):
    m = data.draw(st.integers(3, 4))
    n = 3
    a1, a2 = data.draw(alignments(m)), data.draw(alignments(m))
    ph = st.lists(st.integers(0, m - 1), min_size=n - 1, max_size=n - 1)
    r1, r2 = MedianRule(a1, tuple(data.draw(ph))), MedianRule(a2, tuple(data.draw(ph)))
    got = sm_compatible(r1, r2)
    assert got == sm_compatible(r2, r1)
    shared = domain_intersection(a1, a2)
    direct = all(r1.outcome([p.peak for p in prof]) == r2.outcome([p.peak for p in prof])
                 for prof in itertools.product(shared, repeat=n))
    assert got == direct
