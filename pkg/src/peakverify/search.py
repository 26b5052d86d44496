"""Backtracking search over per-alignment median-rule assignments, and exhaustive verifiers.

Shared-monotonicity only binds pairs of alignments whose domains intersect,
and only through reported peaks in the shared set T. Compatibility of two
rules is therefore precomputed on the ``T ** n`` peak grid, and the search
prunes a partial assignment as soon as an assigned pair is incompatible.
"""

from __future__ import annotations

import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
import numpy as np

from .checker import (Conclusion, Verdict, Witness, check_implementable, check_shared_monotonic,
                      check_strategy_proof, implementability_of_table)
from .domain import (Alignment, SupportSpec, canonical_alignments, domain_intersection,
                     enumerate_single_peaked, full_support, has_constant_shared_peaks,
                     is_contiguous, ordered_along, shared_peaks)
from .errors import PremiseNotMet, ScaleExceeded
from .rules import (TABLE_LIMIT, MedianRule, ProjectedSCF, TabularSCF, enumerate_median_rules,
                    make_symmetric_order_statistic, make_true_median, order_statistic_assignment,
                    rule_alt_grid, tabulate_rule)

MAX_M = 5
MAX_N = 6

SYMMETRIC_ORDER_STATISTIC = "SymmetricOrderStatistic"
TRUE_MEDIAN_ONLY = "TrueMedianOnly"
EMPTY = "Empty"
ALL_NVPMS = "AllNVPMS"
CONDITIONED_FAMILY = "ConditionedFamily"


@dataclass(frozen=True)
class AssignmentSearchReport:
    support: SupportSpec
    n: int
    found: tuple[ProjectedSCF, ...]
    nodes_explored: int
    elapsed: float = field(compare=False)


@dataclass(frozen=True)
class CharacterizationVerdict:
    expected_family: str
    matches: bool
    extras: frozenset
    missing: frozenset
    found: tuple[ProjectedSCF, ...] = ()
    witnesses: tuple[dict, ...] = field(default=(), compare=False)
    report: AssignmentSearchReport | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.matches != (not self.extras and not self.missing):
            raise ValueError("matches must equal (no extras and no missing)")

    @property
    def witnesses_confirmed(self) -> bool:
        return all(w.get("confirmed") for w in self.witnesses)

    @property
    def holds(self) -> bool:
        return self.matches and self.witnesses_confirmed


def _guard(n: int, m: int, allow_large: bool):
    if (m > MAX_M or n > MAX_N) and not allow_large:
        raise ScaleExceeded(f"n={n}, m={m} is beyond the default search limits (m <= {MAX_M}, n <= {MAX_N})")


def _scf_key(f: ProjectedSCF):
    return tuple((r.alignment.order, r.phantoms) for r in f.rules)


def sm_compatible(r1: MedianRule, r2: MedianRule) -> bool:
    """Do the two rules agree on every profile single-peaked for both alignments?

    Outcomes of median rules depend on reported peaks only, so agreement on
    the shared-peak grid is the same as agreement on shared profiles.
    """
    peaks = sorted(shared_peaks(r1.alignment, r2.alignment))
    if not peaks:
        return True
    ix = np.ix_(*([peaks] * r1.n))
    return bool(np.array_equal(rule_alt_grid(r1)[ix], rule_alt_grid(r2)[ix]))


@lru_cache(maxsize=4096)
def rule_is_strategy_proof(r: MedianRule) -> bool:
    """Asserted rather than assumed: checked on the table, or at peak level when too large."""
    dom = enumerate_single_peaked(r.alignment)
    if len(dom) ** r.n <= TABLE_LIMIT // 8:
        t = TabularSCF(r.n, {r.alignment: tabulate_rule(r)})
        return check_strategy_proof(t, r.alignment).holds
    grid = rule_alt_grid(r)
    n = r.n
    for i in range(n):
        moved = np.moveaxis(grid, i, 0)
        for p in dom:
            rank = np.asarray(p.ranks)
            truthful = rank[moved[p.peak]]
            if (rank[moved] < truthful[None]).any():
                return False
    return True


def _order_variables(s: SupportSpec):
    partners = {a: sum(1 for b in s if b != a and shared_peaks(a, b)) for a in s}
    return sorted(s, key=lambda a: (-partners[a], a))


def _compat_tables(order, options):
    compat = {}
    for i, j in itertools.combinations(range(len(order)), 2):
        a, b = order[i], order[j]
        if not shared_peaks(a, b):
            continue
        compat[(i, j)] = np.array([[sm_compatible(r1, r2) for r2 in options[b]] for r1 in options[a]],
                                  dtype=bool)
    return compat


def _backtrack(n, order, options, compat, prefix):
    """Depth-first extension of ``prefix`` (rule indices in ``order``)."""
    found, nodes = [], 0
    links = {j: [(i, compat[(i, j)]) for i in range(j) if (i, j) in compat] for j in range(len(order))}
    choice = list(prefix)

    def consistent(j, r):
        return all(table[choice[i], r] for i, table in links[j])

    def extend(j):
        nonlocal nodes
        if j == len(order):
            found.append(tuple(choice))
            return
        for r in range(len(options[order[j]])):
            nodes += 1
            if consistent(j, r):
                choice.append(r)
                extend(j + 1)
                choice.pop()

    for j in range(len(prefix)):
        if not consistent(j, prefix[j]):
            return [], nodes
    extend(len(prefix))
    return found, nodes


def _branch(args):
    return _backtrack(*args)


def search_implementable_nvpms(n: int, s: SupportSpec, allow_large: bool = False,
                               jobs: int = 1) -> AssignmentSearchReport:
    if n < 3:
        raise PremiseNotMet("the search needs n >= 3")
    _guard(n, s.m, allow_large)
    start = time.perf_counter()
    order = _order_variables(s)
    options = {a: enumerate_median_rules(n, a, nvp_only=True) for a in s}
    compat = _compat_tables(order, options)
    if jobs > 1 and len(order) > 1:
        tasks = [(n, order, options, compat, (r,)) for r in range(len(options[order[0]]))]
        with ProcessPoolExecutor(jobs) as pool:
            parts = list(pool.map(_branch, tasks))
        choices = [c for part, _ in parts for c in part]
        nodes = sum(k for _, k in parts) + len(tasks)
    else:
        choices, nodes = _backtrack(n, order, options, compat, ())
    found = []
    for choice in choices:
        rules = tuple(options[a][r] for a, r in zip(order, choice))
        for r in rules:
            if not rule_is_strategy_proof(r):
                raise AssertionError(f"median rule {r} failed strategy-proofness")
        found.append(ProjectedSCF(n, rules))
    found.sort(key=_scf_key)
    return AssignmentSearchReport(s, n, tuple(found), nodes, time.perf_counter() - start)


def brute_force_nvpms(n: int, s: SupportSpec, allow_large: bool = False) -> tuple[ProjectedSCF, ...]:
    """Unpruned product scan over NVP rules, each candidate run through the tabular checker."""
    _guard(n, s.m, allow_large)
    options = [enumerate_median_rules(n, a, nvp_only=True) for a in s]
    out = []
    for rules in itertools.product(*options):
        f = ProjectedSCF(n, rules)
        if check_implementable(f, s, allow_large).conclusion is Conclusion.IMPLEMENTABLE:
            out.append(f)
    return tuple(sorted(out, key=_scf_key))


def all_nvpms(n: int, s: SupportSpec):
    options = [enumerate_median_rules(n, a, nvp_only=True) for a in s]
    for rules in itertools.product(*options):
        yield ProjectedSCF(n, rules)


def verify_lemma_consistency(m: int) -> Verdict:
    """Shared peaks of two intersecting domains: at least two, contiguous and equally ordered."""
    if not 3 <= m <= 6:
        raise PremiseNotMet("consistency is checked for 3 <= m <= 6")
    found, checked = [], 0
    for a1, a2 in itertools.combinations(canonical_alignments(m), 2):
        t = shared_peaks(a1, a2)
        if not t:
            continue
        checked += 1
        o1, o2 = ordered_along(t, a1), ordered_along(t, a2)
        problems = []
        if len(t) < 2:
            problems.append("fewer than two shared peaks")
        if not (is_contiguous(t, a1) and is_contiguous(t, a2)):
            problems.append("not contiguous")
        if o1 != o2 and o1 != o2[::-1]:
            problems.append("orders disagree")
        if problems:
            found.append(Witness("consistency", alignment=a1, other_alignment=a2,
                                 detail={"peaks": sorted(t), "problems": problems}))
    v = Verdict(not found, found[0] if found else None, tuple(found), {"pairs_checked": checked})
    return v


def cut_counts(r: MedianRule, chain: tuple[int, ...]) -> tuple[int, ...]:
    """Phantoms on the first alternative's side of each adjacent cut of ``chain``.

    ``chain`` lists the shared peaks in a common order; for the cut between
    ``x`` and ``y`` we count phantoms at positions on or before ``x`` when
    walking the alignment from ``x`` towards ``y``.
    """
    a = r.alignment
    out = []
    for x, y in zip(chain, chain[1:]):
        px, py = a.position(x), a.position(y)
        if px < py:
            out.append(sum(1 for p in r.phantoms if p <= px))
        else:
            out.append(sum(1 for p in r.phantoms if p >= px))
    return tuple(out)


def _chain(a1: Alignment, a2: Alignment) -> tuple[int, ...]:
    return ordered_along(shared_peaks(a1, a2), a1)


@lru_cache(maxsize=None)
def _table(r: MedianRule) -> np.ndarray:
    return tabulate_rule(r)


def verify_lemma_symmetry(n: int, m: int) -> Verdict:
    """SM over shared profiles holds exactly when the cut counts agree.

    Checked two ways for every intersecting pair and every pair of median
    rules: on the two-preference profiles (k agents peaked at x, the rest at
    y) for each adjacent cut, and against the full tabular SM check.
    """
    if n > 4 or m > 4:
        raise ScaleExceeded("the symmetry check is sized for n <= 4 and m <= 4")
    found, checked = [], 0
    for a1, a2 in itertools.combinations(canonical_alignments(m), 2):
        shared = domain_intersection(a1, a2)
        if not shared:
            continue
        chain = _chain(a1, a2)
        rep = {x: next(p for p in shared if p.peak == x) for x in chain}
        for r1 in enumerate_median_rules(n, a1):
            for r2 in enumerate_median_rules(n, a2):
                checked += 1
                c1, c2 = cut_counts(r1, chain), cut_counts(r2, chain)
                for j, (x, y) in enumerate(zip(chain, chain[1:])):
                    agree = all(
                        r1.outcome([x] * k + [y] * (n - k)) == r2.outcome([x] * k + [y] * (n - k))
                        for k in range(1, n)
                    )
                    if agree != (c1[j] == c2[j]):
                        found.append(Witness("symmetry_cut", alignment=a1, other_alignment=a2,
                                             profile=(rep[x], rep[y]),
                                             detail={"rules": (r1.phantoms, r2.phantoms), "cut": (x, y)}))
                t = TabularSCF(n, {a1: _table(r1), a2: _table(r2)})
                sm = check_shared_monotonic(t, [a1, a2]).holds
                if sm != (c1 == c2):
                    found.append(Witness("symmetry_full", alignment=a1, other_alignment=a2,
                                         detail={"rules": (r1.phantoms, r2.phantoms), "sm": sm,
                                                 "counts": (c1, c2)}))
    return Verdict(not found, found[0] if found else None, tuple(found), {"rule_pairs_checked": checked})


def expected_full_support_family(n: int, m: int):
    s = full_support(m)
    if m == 3:
        return SYMMETRIC_ORDER_STATISTIC, {make_symmetric_order_statistic(n, k, s) for k in range(1, n - 1)}
    if n % 2 == 0:
        return EMPTY, set()
    return TRUE_MEDIAN_ONLY, {make_true_median(n, s)}


def scf_deviation_witness(f: ProjectedSCF) -> dict | None:
    """A state where one agent gains by moving the state to another alignment.

    Searches for n-1 agents with one preference shared by two alignments and
    a remaining agent whose report, together with the alignment change,
    yields an outcome they strictly prefer. This is the profitable deviation
    that rules out order statistics with all phantoms on one end.
    """
    n = f.n
    for a, b in itertools.permutations(f.support, 2):
        for p in domain_intersection(a, b):
            for q in enumerate_single_peaked(a):
                for q2 in enumerate_single_peaked(b):
                    before = f.outcome(a, (p,) * (n - 1) + (q,))
                    after = f.outcome(b, (p,) * (n - 1) + (q2,))
                    if q.prefers(after, before):
                        return {"alignment": a, "other_alignment": b, "others": p, "truth": q,
                                "misreport": q2, "outcome": before, "deviation_outcome": after,
                                "confirmed": True}
    return None


def verify_full_support_theorem(n: int, m: int, allow_large: bool = False, jobs: int = 1) -> CharacterizationVerdict:
    if n < 3 or m < 3:
        raise PremiseNotMet("the full-support characterization needs n >= 3 and m >= 3")
    s = full_support(m)
    report = search_implementable_nvpms(n, s, allow_large, jobs)
    family, expected = expected_full_support_family(n, m)
    found = set(report.found)
    witnesses = []
    if m == 3:
        from .mechsim import spurious_equilibrium_witness

        for k in (0, n - 1):
            f = order_statistic_assignment(n, k, s)
            w = scf_deviation_witness(f) or {"confirmed": False}
            witnesses.append({"kind": "scf_deviation", "k": k, **w})
            mech = spurious_equilibrium_witness(f) or {"confirmed": False}
            witnesses.append({"kind": "spurious_equilibrium", "k": k, **mech})
    extras = frozenset(found - expected)
    missing = frozenset(expected - found)
    return CharacterizationVerdict(family, not extras and not missing, extras, missing,
                                   report.found, tuple(witnesses), report)


def phantom_alternatives(r: MedianRule) -> tuple[int, ...]:
    return tuple(sorted(r.alignment.order[p] for p in r.phantoms))


def verify_reverse_pair(n: int, a: Alignment) -> Verdict:
    """Raw pair {a, reverse(a)}: equal phantom alternatives pass, anything else fails SM."""
    b = a.reversed()
    found, checked = [], 0
    for r1 in enumerate_median_rules(n, a, nvp_only=True):
        for r2 in enumerate_median_rules(n, b, nvp_only=True):
            checked += 1
            t = TabularSCF(n, {a: tabulate_rule(r1), b: tabulate_rule(r2)})
            v = implementability_of_table(t, [a, b])
            same = phantom_alternatives(r1) == phantom_alternatives(r2)
            if same and v.conclusion is not Conclusion.IMPLEMENTABLE:
                found.append(Witness("reverse_pair_identical", alignment=a, other_alignment=b,
                                     detail={"rules": (r1.phantoms, r2.phantoms),
                                             "conclusion": v.conclusion.value}))
            if not same and v.shared_monotonic.holds:
                found.append(Witness("reverse_pair_differing", alignment=a, other_alignment=b,
                                     detail={"rules": (r1.phantoms, r2.phantoms)}))
    return Verdict(not found, found[0] if found else None, tuple(found), {"rule_pairs_checked": checked})


def _require_passes(n, s, assignments, label):
    found, checked = [], 0
    for f in assignments:
        checked += 1
        v = check_implementable(f, s)
        if v.conclusion is not Conclusion.IMPLEMENTABLE:
            w = v.shared_monotonic.witness or v.nvp.witness
            w = w or next(x.witness for x in v.sp_per_alignment.values() if x.witness)
            found.append(Witness(label, alignment=w.alignment, other_alignment=w.other_alignment,
                                 profile=w.profile, outcome=w.outcome,
                                 deviation_outcome=w.deviation_outcome,
                                 detail={"scf": _scf_key(f), "conclusion": v.conclusion.value}))
    return found, checked


def verify_disjoint_support(n: int, s: SupportSpec) -> Verdict:
    for a1, a2 in s.pairs():
        if domain_intersection(a1, a2):
            raise PremiseNotMet(f"domains of {a1} and {a2} intersect", witness=(a1, a2))
    found, checked = _require_passes(n, s, all_nvpms(n, s), "disjoint_support")
    return Verdict(not found, found[0] if found else None, tuple(found), {"assignments_checked": checked})


def is_conditioned(f: ProjectedSCF) -> bool:
    """Equal cut counts inside the common shared-peak chain for every pair, plus NVP."""
    if not f.is_nvpms:
        return False
    for a1, a2 in f.support.pairs():
        chain = _chain(a1, a2)
        if cut_counts(f.rule_for(a1), chain) != cut_counts(f.rule_for(a2), chain):
            return False
    return True


def verify_constant_shared_peaks(n: int, s: SupportSpec) -> Verdict:
    premise = has_constant_shared_peaks(s)
    if not premise.holds:
        raise PremiseNotMet("shared peaks differ across pairs of the support", witness=premise.witness)
    t = premise.peaks
    found = []
    for a in s:
        if not is_contiguous(t, a):
            found.append(Witness("shared_peaks_not_contiguous", alignment=a, detail={"peaks": sorted(t)}))
    candidates = list(all_nvpms(n, s))
    conditioned = [f for f in candidates if is_conditioned(f)]
    bad, checked = _require_passes(n, s, conditioned, "conditioned_assignment")
    found.extend(bad)
    unconditioned_sm_failures = 0
    for f in candidates:
        if f in conditioned:
            continue
        if not check_shared_monotonic(_tabular(f), s).holds:
            unconditioned_sm_failures += 1
    detail = {"peaks": sorted(t), "conditioned": checked, "unconditioned": len(candidates) - checked,
              "unconditioned_sm_failures": unconditioned_sm_failures}
    return Verdict(not found, found[0] if found else None, tuple(found), detail)


def _tabular(f: ProjectedSCF) -> TabularSCF:
    return TabularSCF(f.n, {r.alignment: _table(r) for r in f.rules})


def is_subset_monotone(n: int, small: SupportSpec, large: SupportSpec) -> bool:
    """Enlarging the support never adds restricted assignments."""
    big = {f.restrict(small) for f in search_implementable_nvpms(n, large).found}
    return big <= set(search_implementable_nvpms(n, small).found)
