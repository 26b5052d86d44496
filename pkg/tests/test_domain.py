import itertools
import warnings

import pytest

from oracles import brute_domain
from peakverify.domain import (Alignment, Preference, Profile, State, SupportSpec, all_alignments,
                               canonical_alignments, canonicalize_alignment, domain_intersection,
                               enumerate_single_peaked, full_support, has_constant_shared_peaks,
                               is_contiguous, is_single_peaked, ordered_along, parse_alignment,
                               parse_preference, shared_peaks)
from peakverify.errors import DomainMismatch, InvalidAlignment, PremiseNotMet


def labels(prefs):
    return {p.label() for p in prefs}


def test_alignment_rejects_non_permutations():
    with pytest.raises(InvalidAlignment):
        Alignment((0, 0, 1))
    with pytest.raises(InvalidAlignment):
        Alignment((1, 2, 3))
    with pytest.raises(InvalidAlignment):
        parse_alignment("abz")


def test_preference_and_profile_invariants():
    p = parse_preference("b>c>a")
    assert p.peak == 1 and p.prefers(2, 0) and not p.prefers(0, 1)
    with pytest.raises(DomainMismatch):
        Preference((0, 0, 1))
    with pytest.raises(DomainMismatch):
        Profile((p, p))
    with pytest.raises(DomainMismatch):
        Profile((p, p, parse_preference("a>b>c>d")))


def test_parse_round_trip_with_commas():
    a = parse_alignment("b,d,a,c")
    assert a.order == (1, 3, 0, 2)
    assert parse_alignment(a.label()) == a


def test_canonical_representative_is_lexicographic_minimum():
    assert canonicalize_alignment(parse_alignment("cba")).label() == "abc"
    assert canonicalize_alignment(parse_alignment("bca")).label() == "acb"
    assert canonicalize_alignment(parse_alignment("bac")).label() == "bac"
    for a in all_alignments(4):
        c = canonicalize_alignment(a)
        assert c.canonical and c.order == min(a.order, a.order[::-1])


def test_domain_of_abc():
    assert labels(enumerate_single_peaked(parse_alignment("abc"))) == {"a>b>c", "b>a>c", "b>c>a", "c>b>a"}


def test_is_single_peaked_examples():
    abc = parse_alignment("abc")
    assert is_single_peaked(parse_preference("b>c>a"), abc)
    assert not is_single_peaked(parse_preference("a>c>b"), abc)
    assert not is_single_peaked(parse_preference("c>a>b"), abc)
    with pytest.raises(DomainMismatch):
        is_single_peaked(parse_preference("a>b>c>d"), abc)


@pytest.mark.parametrize("m", [3, 4, 5])
def test_domains_match_brute_force(m):
    for a in all_alignments(m):
        got = {p.ranking for p in enumerate_single_peaked(a)}
        assert got == brute_domain(a.order)
        assert len(got) == 2 ** (m - 1)


def test_domain_order_is_lexicographic():
    for a in canonical_alignments(4):
        dom = enumerate_single_peaked(a)
        assert list(dom) == sorted(dom, key=lambda p: p.ranking)


def test_reverse_alignment_has_same_domain():
    for a in all_alignments(4):
        assert enumerate_single_peaked(a) == enumerate_single_peaked(a.reversed())


def test_intersection_examples():
    abc, bca = parse_alignment("abc"), parse_alignment("bca")
    assert labels(domain_intersection(abc, bca)) == {"b>c>a", "c>b>a"}
    assert domain_intersection(parse_alignment("abcd"), parse_alignment("bdac")) == ()
    assert shared_peaks(parse_alignment("abcd"), parse_alignment("abdc")) == frozenset({2, 3})


def test_intersection_matches_brute_force_m4():
    for a1, a2 in itertools.combinations(canonical_alignments(4), 2):
        want = brute_domain(a1.order) & brute_domain(a2.order)
        assert {p.ranking for p in domain_intersection(a1, a2)} == want


def test_shared_peaks_symmetric():
    for a1, a2 in itertools.permutations(canonical_alignments(4), 2):
        assert shared_peaks(a1, a2) == shared_peaks(a2, a1)


def test_intersecting_pairs_counts():
    # frozen from the brute-force oracle
    def count(m):
        return sum(1 for a1, a2 in itertools.combinations(canonical_alignments(m), 2)
                   if brute_domain(a1.order) & brute_domain(a2.order))
    assert count(3) == 3
    assert count(4) == 54


def test_swap_top_two_stays_in_intersection():
    for a1, a2 in itertools.combinations(canonical_alignments(4), 2):
        inter = set(domain_intersection(a1, a2))
        for p in inter:
            r = p.ranking
            swapped = Preference((r[1], r[0]) + r[2:])
            assert swapped in inter


def test_contiguity_helpers():
    a = parse_alignment("abcd")
    assert is_contiguous({1, 2}, a) and not is_contiguous({0, 2}, a)
    assert ordered_along({3, 0, 2}, parse_alignment("dcba")) == (3, 2, 0)


def test_state_consistency():
    abc = parse_alignment("abc")
    good = Profile(tuple(parse_preference(s) for s in ("a>b>c", "b>c>a", "c>b>a")))
    bad = Profile(tuple(parse_preference(s) for s in ("a>c>b", "b>c>a", "c>b>a")))
    assert State(abc, good).is_consistent() and not State(abc, bad).is_consistent()


def test_support_spec_canonicalizes_and_warns():
    with pytest.warns(UserWarning, match="collapsed"):
        s = SupportSpec.of(["abc", "cba", "acb"])
    assert s.label() == ["abc", "acb"]
    with pytest.raises(InvalidAlignment):
        SupportSpec((parse_alignment("cba"),))
    with pytest.raises(PremiseNotMet):
        SupportSpec(())


def test_full_support_sizes():
    assert [len(full_support(m)) for m in (3, 4, 5)] == [3, 12, 60]


def test_constant_shared_peaks_examples():
    v = has_constant_shared_peaks(SupportSpec.of(["abcd", "abdc"]))
    assert v.holds and v.peaks == frozenset({2, 3})
    v = has_constant_shared_peaks(SupportSpec.of(["abc", "acb", "bac"]))
    assert not v.holds
    (p1, p2) = v.witness
    assert (p1[0].label(), p1[1].label(), p1[2]) == ("abc", "acb", frozenset({1, 2}))
    assert (p2[0].label(), p2[1].label(), p2[2]) == ("abc", "bac", frozenset({0, 1}))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        dup = SupportSpec.of(["abc", "cba"])
    with pytest.raises(PremiseNotMet):
        has_constant_shared_peaks(dup)
