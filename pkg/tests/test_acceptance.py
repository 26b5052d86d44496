"""Acceptance gate: twelve criteria, each with its runtime bound.

Every test records one ``criterion N: PASS|FAIL`` line; the lines are printed
in the pytest terminal summary, or directly when run as a script.
"""

from __future__ import annotations

import itertools
import time
from math import comb

import numpy as np
import pytest

import acceptance_log
from oracles import unimodal_mask
from peakverify.checker import (Conclusion, check_anonymous, check_implementable,
                                check_strategy_proof, check_unanimous)
from peakverify.domain import (SupportSpec, canonical_alignments, domain_intersection,
                               enumerate_single_peaked, full_support, has_constant_shared_peaks)
from peakverify.mechsim import (canonical_mechanism, check_mixed_implementation,
                                check_partially_honest_implementation, outcome, profitable_deviation)
from peakverify.rules import (ProjectedSCF, TabularSCF, enumerate_median_rules,
                              make_symmetric_order_statistic, make_true_median, tabulate_rule)
from peakverify.search import (all_nvpms, search_implementable_nvpms,
                               verify_constant_shared_peaks, verify_disjoint_support,
                               verify_lemma_consistency, verify_lemma_symmetry)

SUMMARIES = {
    1: "domain sizes 2^(m-1), m=3..6",
    2: "consistency of shared peaks, m=3..5",
    3: "symmetry: SM iff equal cut counts",
    4: "full support m=3: symmetric order statistics, n-2 of them",
    5: "full support m=4, n=4: empty",
    6: "full support m=4, n=3,5: true median only",
    7: "canonical mechanism implements the found SCF at m=3, n=3",
    8: "SM violation gives a wrong-outcome equilibrium",
    9: "disjoint domains: every NVPMS implementable",
    10: "constant shared peaks: conditioned pass, unconditioned fail",
    11: "partially-honest mechanism implements every NVPMS",
    12: "median rules are SP, unanimous, anonymous; counts",
}


def record(num: int, ok: bool, elapsed: float, limit: float, detail: str = ""):
    within = elapsed < limit
    status = "PASS" if ok and within else "FAIL"
    note = f" ({detail})" if detail else ""
    timing = f"{elapsed:.2f}s < {limit:g}s" if within else f"{elapsed:.2f}s exceeds {limit:g}s"
    line = f"criterion {num:2d}: {status}  {SUMMARIES[num]}{note} [{timing}]"
    acceptance_log.LINES[num] = line
    print(line)
    assert ok, line
    assert within, line


def timed(fn):
    start = time.perf_counter()
    result = fn()
    return result, time.perf_counter() - start


def test_criterion_01_domain_counts():
    def run():
        bad = []
        for m in (3, 4, 5, 6):
            perms = np.array(list(itertools.permutations(range(m))))
            for a in canonical_alignments(m):
                brute = {tuple(int(x) for x in row) for row in perms[unimodal_mask(perms, a.order)]}
                got = {p.ranking for p in enumerate_single_peaked(a)}
                if got != brute or len(got) != 2 ** (m - 1):
                    bad.append(a)
        return bad
    bad, t = timed(run)
    record(1, not bad, t, 5, f"{len(bad)} mismatches")


def test_criterion_02_lemma_consistency():
    verdicts, t = timed(lambda: [verify_lemma_consistency(m) for m in (3, 4, 5)])
    violations = sum(len(v.witnesses) for v in verdicts)
    pairs = sum(v.detail["pairs_checked"] for v in verdicts)
    record(2, all(v.holds for v in verdicts) and violations == 0, t, 30, f"{pairs} pairs, {violations} violations")


def test_criterion_03_lemma_symmetry():
    verdicts, t = timed(lambda: [verify_lemma_symmetry(n, m) for n, m in ((3, 3), (4, 3), (3, 4))])
    pairs = sum(v.detail["rule_pairs_checked"] for v in verdicts)
    record(3, all(v.holds for v in verdicts), t, 60, f"{pairs} rule pairs")


def test_criterion_04_full_support_m3():
    s = full_support(3)

    def run():
        out = {}
        for n in (3, 4, 5):
            found = set(search_implementable_nvpms(n, s).found)
            expected = {make_symmetric_order_statistic(n, k, s) for k in range(1, n - 1)}
            out[n] = (found == expected, len(found))
        return out
    res, t = timed(run)
    ok = all(eq and size == n - 2 for n, (eq, size) in res.items())
    record(4, ok, t, 60, "sizes " + ", ".join(str(res[n][1]) for n in (3, 4, 5)))


def test_criterion_05_full_support_m4_n4():
    r, t = timed(lambda: search_implementable_nvpms(4, full_support(4)))
    record(5, r.found == (), t, 300, f"{len(r.found)} found, {r.nodes_explored} nodes")


def test_criterion_06_full_support_m4_odd():
    s = full_support(4)
    res, t = timed(lambda: {n: search_implementable_nvpms(n, s).found for n in (3, 5)})
    ok = all(found == (make_true_median(n, s),) for n, found in res.items())
    record(6, ok, t, 300, "n=3: %d, n=5: %d" % (len(res[3]), len(res[5])))


def test_criterion_07_canonical_mechanism_sufficiency():
    s = full_support(3)

    def run():
        found = search_implementable_nvpms(3, s).found
        results = []
        for f in found:
            assert check_implementable(f, s).conclusion is Conclusion.IMPLEMENTABLE
            reps = check_mixed_implementation(canonical_mechanism(f, 2), f, s)
            results.append((len(reps), all(r.passed for r in reps),
                            all(r.nash_outcomes == {r.expected} for r in reps)))
        return results
    res, t = timed(run)
    ok = bool(res) and all(count == 192 and passed and single for count, passed, single in res)
    record(7, ok, t, 600, f"{len(res)} SCF(s), {res[0][0] if res else 0} states each")


def test_criterion_08_sm_violation_realized():
    s = SupportSpec.of(["abc", "bca"])
    f = ProjectedSCF.from_phantoms(3, {a: [a.position(0)] * 2 for a in s})

    def run():
        mech = canonical_mechanism(f, 2)
        replayed = 0
        for r in check_mixed_implementation(mech, f, s):
            for v in r.violations:
                if v["condition"] != "wrong_equilibrium_outcome":
                    continue
                prof = v["profile"]
                private_truth = [m.preference for m in prof] == list(r.state.profile)
                wrong = outcome(mech, prof) != f.outcome(r.state.alignment, r.state.profile)
                if private_truth and wrong and profitable_deviation(mech, prof, r.state) is None:
                    replayed += 1
        return replayed
    replayed, t = timed(run)
    record(8, replayed >= 1, t, 600, f"{replayed} replayed witnesses")


def test_criterion_09_disjoint_support():
    s = SupportSpec.of(["abcd", "bdac"])

    def run():
        disjoint = all(not domain_intersection(a1, a2) for a1, a2 in s.pairs())
        verdicts = [verify_disjoint_support(n, s) for n in (3, 4)]
        return disjoint, verdicts
    (disjoint, verdicts), t = timed(run)
    checked = sum(v.detail["assignments_checked"] for v in verdicts)
    record(9, disjoint and all(v.holds for v in verdicts), t, 30, f"{checked} assignments")


def test_criterion_10_constant_shared_peaks():
    s = SupportSpec.of(["abcd", "abdc"])

    def run():
        premise = has_constant_shared_peaks(s)
        verdicts = {n: verify_constant_shared_peaks(n, s) for n in (3, 5)}
        return premise, verdicts
    (premise, verdicts), t = timed(run)
    ok = (premise.holds and premise.peaks == frozenset({2, 3})
          and all(v.holds for v in verdicts.values())
          and verdicts[5].detail["unconditioned_sm_failures"] >= 1)
    d = verdicts[5].detail
    record(10, ok, t, 120, f"n=5: {d['conditioned']} conditioned pass, "
                           f"{d['unconditioned_sm_failures']} unconditioned fail SM")


def test_criterion_11_partially_honest():
    s = full_support(3)

    def run():
        scfs = list(all_nvpms(3, s))
        passed = all(all(r.passed for r in check_partially_honest_implementation(f, s, 0, 2)) for f in scfs)
        control = sum(r.false_alignment_equilibria
                      for f in scfs for r in check_partially_honest_implementation(f, s, 0, 2, honesty=False))
        return len(scfs), passed, control
    (count, passed, control), t = timed(run)
    record(11, count >= 1 and passed and control >= 1, t, 600,
           f"{count} NVPMS, {control} spurious equilibria without honesty")


def test_criterion_12_median_rules_axioms():
    def run():
        bad, counted = [], True
        for m in (3, 4):
            for n in (3, 4):
                for a in canonical_alignments(m):
                    rules = enumerate_median_rules(n, a)
                    counted &= len(rules) == comb(m + n - 2, n - 1)
                    for r in rules:
                        t = TabularSCF(n, {a: tabulate_rule(r)})
                        if not (check_strategy_proof(t, a).holds and check_unanimous(t).holds
                                and check_anonymous(t).holds):
                            bad.append(r)
        return bad, counted
    (bad, counted), t = timed(run)
    record(12, not bad and counted, t, 60, f"{len(bad)} failing rules")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
