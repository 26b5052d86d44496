"""Generalized median rules and projected SCFs built from them.

A median rule on an alignment is fixed by its n-1 phantom positions (indices
into that alignment's order). Its outcome is the n-th smallest element of the
2n-1 positions formed by the reported peaks and the phantoms.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .domain import Alignment, Preference, SupportSpec, enumerate_single_peaked
from .errors import ArityError, IncompleteSCF, PremiseNotMet, ScaleExceeded, SupportMismatch

#: tables larger than this many entries per alignment need ``allow_large``
TABLE_LIMIT = 1 << 22


@dataclass(frozen=True, order=True)
class MedianRule:
    alignment: Alignment
    phantoms: tuple[int, ...]

    def __post_init__(self):
        ph = tuple(sorted(int(p) for p in self.phantoms))
        if any(p < 0 or p >= self.alignment.m for p in ph):
            raise ValueError(f"phantom positions {ph} out of range for m={self.alignment.m}")
        if len(ph) < 2:
            raise ValueError("a median rule for n >= 3 agents has at least 2 phantoms")
        object.__setattr__(self, "phantoms", ph)

    @property
    def n(self) -> int:
        return len(self.phantoms) + 1

    @property
    def counts(self) -> tuple[int, ...]:
        c = [0] * self.alignment.m
        for p in self.phantoms:
            c[p] += 1
        return tuple(c)

    @property
    def is_nvp(self) -> bool:
        """At least one phantom on each extreme end."""
        return self.phantoms[0] == 0 and self.phantoms[-1] == self.alignment.m - 1

    def outcome(self, peaks: Sequence[int]) -> int:
        """Outcome alternative for a sequence of peak *alternatives*."""
        pos = self.alignment.positions
        return self.alignment.order[eval_median_rule(self, [pos[x] for x in peaks])]


def eval_median_rule(r: MedianRule, peaks: Sequence[int]) -> int:
    """Outcome position for peak positions measured along ``r.alignment``."""
    if len(peaks) != r.n:
        raise ArityError(f"rule expects {r.n} peaks, got {len(peaks)}")
    merged = sorted(list(peaks) + list(r.phantoms))
    return merged[r.n - 1]


def enumerate_median_rules(n: int, a: Alignment, nvp_only: bool = False) -> tuple[MedianRule, ...]:
    if n < 3:
        raise PremiseNotMet("median rules are enumerated for n >= 3")
    rules = []
    for ph in itertools.combinations_with_replacement(range(a.m), n - 1):
        if nvp_only and (ph[0] != 0 or ph[-1] != a.m - 1):
            continue
        rules.append(MedianRule(a, ph))
    return tuple(rules)


def count_median_rules(n: int, m: int) -> int:
    return comb(m + n - 2, n - 1)


@lru_cache(maxsize=4096)
def rule_grid(r: MedianRule) -> np.ndarray:
    """Outcome positions for every peak-position vector, shape ``(m,) * n``."""
    m, n = r.alignment.m, r.n
    peaks = np.indices((m,) * n).reshape(n, -1).T
    out = kernels.median_positions(peaks, r.counts).reshape((m,) * n)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=4096)
def rule_alt_grid(r: MedianRule) -> np.ndarray:
    """Outcome alternative indexed by peak *alternatives*, shape ``(m,) * n``."""
    a = r.alignment
    pos = np.asarray(a.positions)
    out = np.asarray(a.order, dtype=np.int8)[rule_grid(r)[np.ix_(*([pos] * r.n))]]
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ProjectedSCF:
    """One median rule per alignment of the support."""

    n: int
    rules: tuple[MedianRule, ...]

    def __post_init__(self):
        rules = tuple(sorted(self.rules))
        if not rules:
            raise SupportMismatch("a projected SCF needs at least one alignment")
        if any(r.n != self.n for r in rules):
            raise SupportMismatch(f"every rule must carry n-1={self.n - 1} phantoms")
        keys = [r.alignment for r in rules]
        if len(set(keys)) != len(keys):
            raise SupportMismatch("two rules for the same alignment")
        if any(not a.canonical for a in keys):
            raise SupportMismatch("projected SCFs are keyed by canonical alignments")
        object.__setattr__(self, "rules", rules)
        object.__setattr__(self, "_by_alignment", {r.alignment: r for r in rules})

    @classmethod
    def from_phantoms(cls, n: int, mapping: Mapping[Alignment, Sequence[int]]) -> "ProjectedSCF":
        return cls(n, tuple(MedianRule(a, tuple(ph)) for a, ph in mapping.items()))

    @property
    def support(self) -> SupportSpec:
        return SupportSpec(tuple(r.alignment for r in self.rules))

    def rule_for(self, a: Alignment) -> MedianRule:
        try:
            return self._by_alignment[a]
        except KeyError:
            raise SupportMismatch(f"no rule for alignment {a}") from None

    def outcome(self, a: Alignment, profile) -> int:
        return self.rule_for(a).outcome([p.peak for p in profile])

    @property
    def is_nvpms(self) -> bool:
        return all(r.is_nvp for r in self.rules)

    def restrict(self, s: SupportSpec) -> "ProjectedSCF":
        return ProjectedSCF(self.n, tuple(self.rule_for(a) for a in s))


def make_true_median(n: int, s: SupportSpec) -> ProjectedSCF:
    if n % 2 == 0:
        raise PremiseNotMet("the true median needs an odd number of agents")
    half = (n - 1) // 2
    return ProjectedSCF(n, tuple(MedianRule(a, (0,) * half + (a.m - 1,) * half) for a in s))


def cyclic_orientation(a: Alignment) -> tuple[int, ...]:
    """For m=3: whichever of ``a`` or its reverse is a rotation of (0, 1, 2)."""
    rotations = {(0, 1, 2), (1, 2, 0), (2, 0, 1)}
    return a.order if a.order in rotations else a.order[::-1]


def order_statistic_assignment(n: int, k: int, s: SupportSpec) -> ProjectedSCF:
    """k phantoms on the leftmost and n-1-k on the rightmost end, m=3.

    Left/right follow the cyclic orientation abc, bca, cab of each reversal
    class; shared peaks then appear in the same order on every pair, which is
    what makes the pattern shared-monotonic. k may be 0 or n-1 here (the
    non-NVP members used by the necessity witnesses).
    """
    rules = []
    for a in s:
        left = cyclic_orientation(a)[0]
        at_left = a.position(left)
        ph = (at_left,) * k + (2 - at_left,) * (n - 1 - k)
        rules.append(MedianRule(a, ph))
    return ProjectedSCF(n, tuple(rules))


def make_symmetric_order_statistic(n: int, k: int, s: SupportSpec) -> ProjectedSCF:
    if s.m != 3:
        raise PremiseNotMet("symmetric order-statistic SCFs are defined for three alternatives")
    if not 1 <= k <= n - 2:
        raise PremiseNotMet(f"k must lie in 1..{n - 2}, got {k}")
    return order_statistic_assignment(n, k, s)


def order_statistic_value(f: ProjectedSCF, a: Alignment, peaks: Sequence[int]) -> int:
    """Closed form for end-only rules: the (n-k)-th smallest peak position."""
    r = f.rule_for(a)
    if len(peaks) != f.n:
        raise ArityError(f"expected {f.n} peaks, got {len(peaks)}")
    if any(p not in (0, a.m - 1) for p in r.phantoms):
        raise PremiseNotMet("phantoms occupy interior positions")
    k = r.counts[0]
    return sorted(peaks)[f.n - k - 1]


@dataclass
class TabularSCF:
    """Explicit outcome table per alignment.

    ``tables[a]`` has shape ``(d,) * n`` with ``d = |D_a|``; axis ``i`` indexes
    agent ``i``'s preference in ``domains[a]`` order; entries are alternative
    ids, ``-1`` marking an undefined state.
    """

    n: int
    tables: dict[Alignment, np.ndarray]
    domains: dict[Alignment, tuple[Preference, ...]] = field(default_factory=dict)

    def __post_init__(self):
        for a in self.tables:
            self.domains.setdefault(a, enumerate_single_peaked(a))
        self._index = {a: {p: i for i, p in enumerate(d)} for a, d in self.domains.items()}

    @property
    def alignments(self) -> tuple[Alignment, ...]:
        return tuple(sorted(self.tables))

    def index_of(self, a: Alignment, profile) -> tuple[int, ...]:
        idx = self._index[a]
        return tuple(idx[p] for p in profile)

    def outcome(self, a: Alignment, profile) -> int:
        return int(self.tables[a][self.index_of(a, profile)])

    def profile_at(self, a: Alignment, index: Sequence[int]) -> tuple[Preference, ...]:
        dom = self.domains[a]
        return tuple(dom[i] for i in index)

    def require_total(self):
        for a, t in self.tables.items():
            if (t < 0).any():
                raise IncompleteSCF(f"outcome table for {a} has undefined states")
            if t.shape != (len(self.domains[a]),) * self.n:
                raise IncompleteSCF(f"outcome table for {a} has shape {t.shape}")

    @classmethod
    def from_function(cls, alignments: Iterable[Alignment], n: int,
                      fn: Callable[[Alignment, tuple[Preference, ...]], int]) -> "TabularSCF":
        tables = {}
        for a in alignments:
            dom = enumerate_single_peaked(a)
            t = np.empty((len(dom),) * n, dtype=np.int8)
            for index in itertools.product(range(len(dom)), repeat=n):
                t[index] = fn(a, tuple(dom[i] for i in index))
            tables[a] = t
        return cls(n, tables)


def tabulate_rule(r: MedianRule, allow_large: bool = False) -> np.ndarray:
    """Outcome table of one rule over ``D_a ** n`` (alternative ids)."""
    a = r.alignment
    dom = enumerate_single_peaked(a)
    if len(dom) ** r.n > TABLE_LIMIT and not allow_large:
        raise ScaleExceeded(f"table with {len(dom)}^{r.n} entries exceeds the default limit")
    peak_pos = np.array([a.position(p.peak) for p in dom])
    grid = rule_grid(r)[np.ix_(*([peak_pos] * r.n))]
    return np.asarray(a.order, dtype=np.int8)[grid]


def to_tabular(f: ProjectedSCF, allow_large: bool = False) -> TabularSCF:
    return TabularSCF(f.n, {r.alignment: tabulate_rule(r, allow_large) for r in f.rules})
