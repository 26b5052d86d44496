"""Alternatives, alignments, single-peaked preferences and their domains.

Alternatives are dense integer ids ``0..m-1``; letters are used only for
display and file formats. An alignment and its exact reverse generate the same
single-peaked domain, so set-valued results are keyed by the canonical member
of each reversal class (the lexicographically smaller id sequence).
"""

from __future__ import annotations

import itertools
import string
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

from .errors import DomainMismatch, InvalidAlignment, PremiseNotMet

LETTERS = string.ascii_lowercase


def default_labels(m: int) -> tuple[str, ...]:
    if m > len(LETTERS):
        return tuple(f"x{i}" for i in range(m))
    return tuple(LETTERS[:m])


def _join(labels: Sequence[str]) -> str:
    return "".join(labels) if all(len(s) == 1 for s in labels) else ",".join(labels)


def _check_permutation(seq, what) -> tuple[int, ...]:
    try:
        seq = tuple(int(x) for x in seq)
    except (TypeError, ValueError) as exc:
        raise InvalidAlignment(f"{what} must be a sequence of integer ids") from exc
    if not seq or sorted(seq) != list(range(len(seq))):
        raise InvalidAlignment(f"{what} {seq!r} is not a permutation of 0..{len(seq) - 1}")
    return seq


@dataclass(frozen=True)
class Alternative:
    id: int
    label: str


@dataclass(frozen=True, order=True)
class Alignment:
    """A strict left-to-right order of all alternatives."""

    order: tuple[int, ...]
    positions: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        order = _check_permutation(self.order, "alignment")
        object.__setattr__(self, "order", order)
        pos = [0] * len(order)
        for i, x in enumerate(order):
            pos[x] = i
        object.__setattr__(self, "positions", tuple(pos))

    @property
    def m(self) -> int:
        return len(self.order)

    @property
    def canonical(self) -> bool:
        return self.order <= self.order[::-1]

    def reversed(self) -> "Alignment":
        return Alignment(self.order[::-1])

    def position(self, x: int) -> int:
        return self.positions[x]

    def label(self, labels: Sequence[str] | None = None) -> str:
        labels = labels or default_labels(self.m)
        return _join([labels[x] for x in self.order])

    def __str__(self):
        return self.label()


@dataclass(frozen=True, order=True)
class Preference:
    """A strict ranking from best to worst."""

    ranking: tuple[int, ...]
    ranks: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        try:
            ranking = _check_permutation(self.ranking, "preference")
        except InvalidAlignment as exc:
            raise DomainMismatch(str(exc)) from None
        object.__setattr__(self, "ranking", ranking)
        ranks = [0] * len(ranking)
        for i, x in enumerate(ranking):
            ranks[x] = i
        object.__setattr__(self, "ranks", tuple(ranks))

    @property
    def peak(self) -> int:
        return self.ranking[0]

    @property
    def m(self) -> int:
        return len(self.ranking)

    def prefers(self, x: int, y: int) -> bool:
        """True when ``x`` is ranked strictly above ``y``."""
        return self.ranks[x] < self.ranks[y]

    def label(self, labels: Sequence[str] | None = None) -> str:
        labels = labels or default_labels(self.m)
        return ">".join(labels[x] for x in self.ranking)

    def __str__(self):
        return self.label()


@dataclass(frozen=True)
class Profile:
    prefs: tuple[Preference, ...]

    def __post_init__(self):
        prefs = tuple(self.prefs)
        if len(prefs) < 3:
            raise DomainMismatch(f"profiles need at least 3 agents, got {len(prefs)}")
        if len({p.m for p in prefs}) != 1:
            raise DomainMismatch("preferences in a profile rank different alternative sets")
        object.__setattr__(self, "prefs", prefs)

    @property
    def n(self) -> int:
        return len(self.prefs)

    @property
    def peaks(self) -> tuple[int, ...]:
        return tuple(p.peak for p in self.prefs)

    def __iter__(self):
        return iter(self.prefs)

    def __len__(self):
        return len(self.prefs)

    def __getitem__(self, i):
        return self.prefs[i]


@dataclass(frozen=True)
class State:
    alignment: Alignment
    profile: Profile

    def is_consistent(self) -> bool:
        return all(is_single_peaked(p, self.alignment) for p in self.profile)


def parse_alignment(text: str, labels: Sequence[str] | None = None) -> Alignment:
    """``"bdac"`` or ``"b,d,a,c"`` -> Alignment over the given (default) labels."""
    items = text.split(",") if "," in text else list(text)
    labels = labels or default_labels(len(items))
    index = {s: i for i, s in enumerate(labels)}
    try:
        return Alignment(tuple(index[s] for s in items))
    except KeyError as exc:
        raise InvalidAlignment(f"unknown alternative {exc.args[0]!r} in {text!r}") from None


def parse_preference(text: str, labels: Sequence[str] | None = None) -> Preference:
    """``"b>c>a"`` -> Preference."""
    items = text.split(">")
    labels = labels or default_labels(len(items))
    index = {s: i for i, s in enumerate(labels)}
    try:
        return Preference(tuple(index[s] for s in items))
    except KeyError as exc:
        raise DomainMismatch(f"unknown alternative {exc.args[0]!r} in {text!r}") from None


def canonicalize_alignment(a: Alignment | Sequence[int]) -> Alignment:
    if not isinstance(a, Alignment):
        a = Alignment(tuple(a))
    return a if a.canonical else a.reversed()


def _same_alternatives(m1: int, m2: int):
    if m1 != m2:
        raise DomainMismatch(f"alternative sets differ in size ({m1} vs {m2})")


def is_single_peaked(p: Preference, a: Alignment) -> bool:
    """Direct check of the definition: on each side of the peak, closer is better."""
    _same_alternatives(p.m, a.m)
    pos = a.positions
    top = pos[p.peak]
    for x in range(a.m):
        dx = pos[x] - top
        for y in range(a.m):
            dy = pos[y] - top
            if dx * dy > 0 and abs(dx) < abs(dy) and not p.prefers(x, y):
                return False
    return True


@lru_cache(maxsize=None)
def enumerate_single_peaked(a: Alignment) -> tuple[Preference, ...]:
    """All preferences single-peaked for ``a``, sorted by ranking.

    Built constructively: a single-peaked ranking grows an interval around the
    peak one neighbour at a time, so there are 2^(m-1) of them.
    """
    order = a.order
    m = a.m
    out = []

    def grow(lo, hi, ranking):
        if lo == 0 and hi == m - 1:
            out.append(Preference(tuple(ranking)))
            return
        if lo > 0:
            grow(lo - 1, hi, ranking + [order[lo - 1]])
        if hi < m - 1:
            grow(lo, hi + 1, ranking + [order[hi + 1]])

    for i in range(m):
        grow(i, i, [order[i]])
    return tuple(sorted(out))


def all_preferences(m: int) -> tuple[Preference, ...]:
    return tuple(Preference(p) for p in itertools.permutations(range(m)))


def all_alignments(m: int) -> tuple[Alignment, ...]:
    return tuple(Alignment(p) for p in itertools.permutations(range(m)))


def canonical_alignments(m: int) -> tuple[Alignment, ...]:
    """One representative per reversal class, m!/2 of them for m >= 2."""
    return tuple(a for a in all_alignments(m) if a.canonical)


@lru_cache(maxsize=None)
def _intersection(a1: Alignment, a2: Alignment) -> tuple[Preference, ...]:
    d2 = set(enumerate_single_peaked(a2))
    return tuple(p for p in enumerate_single_peaked(a1) if p in d2)


def domain_intersection(a1: Alignment, a2: Alignment) -> tuple[Preference, ...]:
    _same_alternatives(a1.m, a2.m)
    if a2 < a1:
        a1, a2 = a2, a1
    return _intersection(a1, a2)


def shared_peaks(a1: Alignment, a2: Alignment) -> frozenset[int]:
    return frozenset(p.peak for p in domain_intersection(a1, a2))


def is_contiguous(items: Iterable[int], a: Alignment) -> bool:
    pos = sorted(a.positions[x] for x in items)
    return not pos or pos[-1] - pos[0] == len(pos) - 1


def ordered_along(items: Iterable[int], a: Alignment) -> tuple[int, ...]:
    return tuple(sorted(items, key=a.position))


@dataclass(frozen=True)
class SupportSpec:
    """The alignments the designer considers possible, one per reversal class."""

    alignments: tuple[Alignment, ...]

    def __post_init__(self):
        items = tuple(self.alignments)
        if not items:
            raise PremiseNotMet("support must contain at least one alignment")
        if len({a.m for a in items}) != 1:
            raise DomainMismatch("support mixes alignments over different alternative sets")
        if any(not a.canonical for a in items):
            raise InvalidAlignment("support members must be canonical; use SupportSpec.of")
        if len(set(items)) != len(items):
            raise InvalidAlignment("support lists a reversal class twice; use SupportSpec.of")
        object.__setattr__(self, "alignments", tuple(sorted(items)))

    @classmethod
    def of(cls, alignments: Iterable[Alignment | Sequence[int] | str], labels=None) -> "SupportSpec":
        """Canonicalize and deduplicate; warns when reversal classes collapse."""
        seen: dict[Alignment, list[Alignment]] = {}
        for a in alignments:
            if isinstance(a, str):
                a = parse_alignment(a, labels)
            elif not isinstance(a, Alignment):
                a = Alignment(tuple(a))
            seen.setdefault(canonicalize_alignment(a), []).append(a)
        collapsed = {c: raw for c, raw in seen.items() if len(raw) > 1}
        if collapsed:
            detail = "; ".join(
                f"{'/'.join(r.label(labels) for r in raw)} -> {c.label(labels)}"
                for c, raw in sorted(collapsed.items())
            )
            warnings.warn(f"collapsed duplicate reversal classes: {detail}", stacklevel=2)
        return cls(tuple(seen))

    @property
    def m(self) -> int:
        return self.alignments[0].m

    def __iter__(self):
        return iter(self.alignments)

    def __len__(self):
        return len(self.alignments)

    def __contains__(self, a):
        return a in self.alignments

    def pairs(self):
        return itertools.combinations(self.alignments, 2)

    def label(self, labels=None) -> list[str]:
        return [a.label(labels) for a in self.alignments]


def full_support(m: int) -> SupportSpec:
    return SupportSpec(canonical_alignments(m))


@dataclass(frozen=True)
class SharedPeaksVerdict:
    holds: bool
    peaks: frozenset[int] | None = None
    # ((a1, a2, T12), (a3, a4, T34)) for the first disagreeing pairs
    witness: tuple | None = None


def has_constant_shared_peaks(s: SupportSpec) -> SharedPeaksVerdict:
    if len(s) < 2:
        raise PremiseNotMet("constant shared peaks needs at least two reversal classes")
    pairs = [(a1, a2, shared_peaks(a1, a2)) for a1, a2 in s.pairs()]
    first = pairs[0]
    for other in pairs[1:]:
        if other[2] != first[2]:
            return SharedPeaksVerdict(False, witness=(first, other))
    if not first[2]:
        return SharedPeaksVerdict(False, witness=(first, first))
    return SharedPeaksVerdict(True, peaks=first[2])
