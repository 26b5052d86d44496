"""Axiom checks over tabular SCFs, each returning a replayable witness on failure.

Scans run in lexicographic profile order (then agent, then misreport) and
report the first violation; ``exhaustive=True`` also collects every witness.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Any, Iterable

import numpy as np

from .domain import Alignment, Preference, SupportSpec, domain_intersection
from .errors import IncompleteSCF, SupportMismatch
from .rules import ProjectedSCF, TabularSCF, to_tabular


@dataclass(frozen=True)
class Witness:
    kind: str
    alignment: Alignment | None = None
    profile: tuple[Preference, ...] | None = None
    agent: int | None = None
    misreport: Preference | None = None
    outcome: int | None = None
    deviation_outcome: int | None = None
    other_alignment: Alignment | None = None
    permutation: tuple[int, ...] | None = None
    required: int | None = None
    detail: dict[str, Any] = field(default_factory=dict, compare=False, hash=False)


@dataclass(frozen=True)
class Verdict:
    holds: bool
    witness: Witness | None = None
    witnesses: tuple[Witness, ...] = ()
    detail: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.holds != (self.witness is None):
            raise ValueError("a verdict holds exactly when it carries no witness")

    def __bool__(self):
        return self.holds


def _verdict(found: list[Witness]) -> Verdict:
    return Verdict(not found, found[0] if found else None, tuple(found))


class Conclusion(str, enum.Enum):
    NOT_IMPLEMENTABLE = "NotImplementable"
    IMPLEMENTABLE = "Implementable"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class ImplementabilityVerdict:
    sp_per_alignment: dict[Alignment, Verdict]
    shared_monotonic: Verdict
    nvp: Verdict
    conclusion: Conclusion

    @property
    def holds(self) -> bool:
        return self.conclusion is Conclusion.IMPLEMENTABLE


def _table(f: TabularSCF, a: Alignment) -> np.ndarray:
    if a not in f.tables:
        raise IncompleteSCF(f"no outcome table for alignment {a}")
    f.require_total()
    return f.tables[a]


def _flat_hits(mask: np.ndarray, exhaustive: bool) -> list[tuple[int, ...]]:
    hits = np.flatnonzero(mask)
    if not exhaustive:
        hits = hits[:1]
    return [tuple(int(v) for v in np.unravel_index(h, mask.shape)) for h in hits]


def check_strategy_proof(f: TabularSCF, a: Alignment, exhaustive: bool = False) -> Verdict:
    t = _table(f, a)
    dom = f.domains[a]
    n, d = f.n, len(dom)
    ranks = np.array([p.ranks for p in dom])
    per_agent = []
    for i in range(n):
        moved = np.moveaxis(t, i, 0)
        # u[p, q, rest]: rank, under true preference p, of the outcome when q is reported
        u = ranks[:, moved]
        truthful = u[np.arange(d), np.arange(d)]
        viol = u < truthful[:, None]
        per_agent.append((np.moveaxis(viol.any(axis=1), 0, i), np.moveaxis(viol, (0, 1), (i, n))))
    found = []
    any_mask = np.logical_or.reduce([m for m, _ in per_agent])
    for index in _flat_hits(any_mask, exhaustive):
        for i, (mask, viol) in enumerate(per_agent):
            if not mask[index]:
                continue
            for q in np.flatnonzero(viol[index]):
                dev = index[:i] + (int(q),) + index[i + 1:]
                found.append(Witness(
                    "strategy_proofness", alignment=a, profile=f.profile_at(a, index),
                    agent=i, misreport=dom[q], outcome=int(t[index]),
                    deviation_outcome=int(t[dev]),
                ))
                if not exhaustive:
                    break
            if not exhaustive:
                break
    return _verdict(found)


def check_unanimous(f: TabularSCF, exhaustive: bool = False) -> Verdict:
    found = []
    for a in f.alignments:
        t = _table(f, a)
        dom = f.domains[a]
        for x in range(a.m):
            idx = [i for i, p in enumerate(dom) if p.peak == x]
            sub = t[np.ix_(*([idx] * f.n))]
            for sub_index in _flat_hits(sub != x, exhaustive):
                index = tuple(idx[j] for j in sub_index)
                found.append(Witness("unanimity", alignment=a, profile=f.profile_at(a, index),
                                     outcome=int(t[index]), required=x))
            if found and not exhaustive:
                return _verdict(found)
    return _verdict(found)


def _permute_index(index, axes):
    # np.transpose(t, axes)[index] == t[k] with k[axes[j]] = index[j]
    k = [0] * len(index)
    for j, ax in enumerate(axes):
        k[ax] = index[j]
    return tuple(k)


def check_anonymous(f: TabularSCF, exhaustive: bool = False) -> Verdict:
    found = []
    for a in f.alignments:
        t = _table(f, a)
        for axes in itertools.permutations(range(f.n)):
            if axes == tuple(range(f.n)):
                continue
            diff = np.transpose(t, axes) != t
            for index in _flat_hits(diff, exhaustive):
                k = _permute_index(index, axes)
                profile = f.profile_at(a, index)
                # relabelled profile Q_i = P_sigma(i) sits at index k
                sigma = tuple(int(s) for s in np.argsort(axes))
                found.append(Witness(
                    "anonymity", alignment=a, profile=profile, permutation=sigma,
                    outcome=int(t[index]), deviation_outcome=int(t[k]),
                ))
            if found and not exhaustive:
                return _verdict(found)
    return _verdict(found)


def check_nvp(f: TabularSCF, exhaustive: bool = False) -> Verdict:
    found = []
    for a in f.alignments:
        t = _table(f, a)
        dom = f.domains[a]
        n = f.n
        peaks = np.array([p.peak for p in dom])
        bad = np.zeros(t.shape, dtype=bool)
        required = np.full(t.shape, -1)
        for x in range(a.m):
            at_x = (peaks == x).astype(int)
            count = sum(at_x.reshape([-1 if j == i else 1 for j in range(n)]) for i in range(n))
            near = count >= n - 1
            hit = near & (t != x)
            required = np.where(hit & ~bad, x, required)
            bad |= hit
        for index in _flat_hits(bad, exhaustive):
            found.append(Witness("no_veto_power", alignment=a, profile=f.profile_at(a, index),
                                 outcome=int(t[index]), required=int(required[index])))
        if found and not exhaustive:
            return _verdict(found)
    return _verdict(found)


def check_shared_monotonic(f: TabularSCF, s: SupportSpec | Iterable[Alignment],
                           exhaustive: bool = False) -> Verdict:
    alignments = sorted(s)
    found = []
    for a1, a2 in itertools.combinations(alignments, 2):
        shared = domain_intersection(a1, a2)
        if not shared:
            continue
        t1, t2 = _table(f, a1), _table(f, a2)
        i1 = [f._index[a1][p] for p in shared]
        i2 = [f._index[a2][p] for p in shared]
        s1 = t1[np.ix_(*([i1] * f.n))]
        s2 = t2[np.ix_(*([i2] * f.n))]
        for sub_index in _flat_hits(s1 != s2, exhaustive):
            profile = tuple(shared[j] for j in sub_index)
            found.append(Witness("shared_monotonicity", alignment=a1, other_alignment=a2,
                                 profile=profile, outcome=int(s1[sub_index]),
                                 deviation_outcome=int(s2[sub_index])))
        if found and not exhaustive:
            return _verdict(found)
    return _verdict(found)


def conclude(sp: dict, sm: Verdict, nvp: Verdict) -> Conclusion:
    if not all(v.holds for v in sp.values()) or not sm.holds:
        return Conclusion.NOT_IMPLEMENTABLE
    if nvp.holds:
        return Conclusion.IMPLEMENTABLE
    return Conclusion.UNDETERMINED


def implementability_of_table(t: TabularSCF, alignments: Iterable[Alignment]) -> ImplementabilityVerdict:
    alignments = sorted(alignments)
    sp = {a: check_strategy_proof(t, a) for a in alignments}
    sm = check_shared_monotonic(t, alignments)
    nvp = check_nvp(t)
    return ImplementabilityVerdict(sp, sm, nvp, conclude(sp, sm, nvp))


def check_implementable(f: ProjectedSCF, s: SupportSpec, allow_large: bool = False) -> ImplementabilityVerdict:
    if set(r.alignment for r in f.rules) != set(s):
        raise SupportMismatch("the SCF's alignments differ from the support")
    return implementability_of_table(to_tabular(f, allow_large), s)


def replay_witness(f: TabularSCF, w: Witness) -> bool:
    """Re-evaluate a witness through ``f``; True when the violation reproduces."""
    out = f.outcome(w.alignment, w.profile)
    if out != w.outcome:
        return False
    if w.kind == "strategy_proofness":
        i = w.agent
        dev = w.profile[:i] + (w.misreport,) + w.profile[i + 1:]
        dev_out = f.outcome(w.alignment, dev)
        return dev_out == w.deviation_outcome and w.profile[i].prefers(dev_out, out)
    if w.kind == "unanimity":
        return all(p.peak == w.required for p in w.profile) and out != w.required
    if w.kind == "anonymity":
        permuted = tuple(w.profile[w.permutation[i]] for i in range(len(w.profile)))
        return f.outcome(w.alignment, permuted) == w.deviation_outcome != out
    if w.kind == "no_veto_power":
        near = sum(p.peak == w.required for p in w.profile) >= len(w.profile) - 1
        return near and out != w.required
    if w.kind == "shared_monotonicity":
        other = f.outcome(w.other_alignment, w.profile)
        return other == w.deviation_outcome != out
    raise ValueError(f"cannot replay witness kind {w.kind!r}")
