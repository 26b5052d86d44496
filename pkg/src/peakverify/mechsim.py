"""Indirect mechanisms that implement projected SCFs, with exhaustive equilibrium scans.

Two constructions are supported.

``canonical``: each agent sends (integer, favorite, alignment, preference). If
at least n-1 agents name the same alignment, the SCF's rule for it is applied
to all reported peaks. Otherwise the lowest-indexed agent among those sending
the largest integer gets their favorite.

``partially_honest``: the favorite is replaced by a median-rule descriptor.
Under disagreement the winner's rule is run on the winner's alignment. One
agent breaks outcome ties in favour of naming the true alignment.

Integers are capped at ``int_cap``. The outcome only depends on which agent
sends the largest integer (lowest index on ties), so in a scan candidate
profiles use integers ``1..int_cap-1`` and deviations may go up to
``int_cap``. Every candidate therefore leaves room for a strictly larger
integer, as in the unbounded game.
"""

from __future__ import annotations

import itertools
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .domain import (Alignment, Preference, Profile, State, SupportSpec, canonicalize_alignment,
                     domain_intersection, enumerate_single_peaked, is_single_peaked)
from .errors import InvalidMessage, PremiseNotMet, ScaleExceeded
from .rules import MedianRule, ProjectedSCF, enumerate_median_rules, rule_alt_grid

CANONICAL = "canonical"
PARTIALLY_HONEST = "partially_honest"

#: outcome tensors with more message profiles than this need ``allow_large``
PROFILE_LIMIT = 5_000_000


@dataclass(frozen=True, order=True)
class Message:
    integer: int
    alignment: Alignment
    preference: Preference
    favorite: int | None = None
    rule: MedianRule | None = None

    def __post_init__(self):
        if not isinstance(self.integer, (int, np.integer)) or self.integer < 1:
            raise InvalidMessage(f"integer component must be a positive integer, got {self.integer!r}")
        if not is_single_peaked(self.preference, self.alignment):
            raise InvalidMessage(f"{self.preference} is not single-peaked for {self.alignment}")


def profile_label(msgs: Sequence[Message]) -> list[dict]:
    out = []
    for msg in msgs:
        item = {"integer": msg.integer, "alignment": msg.alignment.label(),
                "preference": msg.preference.label()}
        if msg.favorite is not None:
            item["favorite"] = "abcdefghijklmnopqrstuvwxyz"[msg.favorite]
        if msg.rule is not None:
            item["rule"] = list(msg.rule.phantoms)
        out.append(item)
    return out


class Mechanism:
    """A finite message game ``(M, g)``; every agent has the same message set."""

    def __init__(self, scf: ProjectedSCF, int_cap: int = 2, kind: str = CANONICAL,
                 honest_agent: int | None = None, descriptor_rules: str = "nvp",
                 allow_large: bool = False):
        if int_cap < 2:
            raise PremiseNotMet("int_cap must be at least 2")
        if kind not in (CANONICAL, PARTIALLY_HONEST):
            raise ValueError(f"unknown mechanism kind {kind!r}")
        self.scf = scf
        self.n = scf.n
        self.int_cap = int_cap
        self.kind = kind
        self.honest_agent = honest_agent
        self.descriptor_rules = descriptor_rules
        self.allow_large = allow_large
        self.support = scf.support
        self.m = self.support.m
        self._align_index = {a: i for i, a in enumerate(self.support)}
        self._descriptors = {
            a: enumerate_median_rules(self.n, a, nvp_only=(descriptor_rules == "nvp"))
            for a in self.support
        }
        self.messages = tuple(self._enumerate_messages())
        self._msg_index = {msg: i for i, msg in enumerate(self.messages)}
        self._pref_ids = {}
        attrs = {"int": [], "align": [], "peak": [], "pref": [], "fav": [], "rule": []}
        for msg in self.messages:
            attrs["int"].append(msg.integer)
            attrs["align"].append(self._align_index[msg.alignment])
            attrs["peak"].append(msg.preference.peak)
            attrs["pref"].append(self._pref_ids.setdefault(msg.preference, len(self._pref_ids)))
            attrs["fav"].append(-1 if msg.favorite is None else msg.favorite)
            attrs["rule"].append(-1 if msg.rule is None else self._descriptors[msg.alignment].index(msg.rule))
        self._attr = {key: np.array(v, dtype=np.int64) for key, v in attrs.items()}
        self._tensor = None

    @property
    def descriptor(self) -> tuple:
        if self.kind == CANONICAL:
            return ("Canonical", self.scf)
        return ("PartiallyHonest", self.scf, self.honest_agent)

    @property
    def k(self) -> int:
        return len(self.messages)

    def _enumerate_messages(self):
        for z in range(1, self.int_cap + 1):
            for a in self.support:
                for p in enumerate_single_peaked(a):
                    if self.kind == CANONICAL:
                        for x in range(self.m):
                            yield Message(z, a, p, favorite=x)
                    else:
                        for r in self._descriptors[a]:
                            yield Message(z, a, p, rule=r)

    def index(self, msg: Message) -> int:
        return self._msg_index[msg]

    def validate(self, msgs: Sequence[Message]) -> None:
        if len(msgs) != self.n:
            raise InvalidMessage(f"expected {self.n} messages, got {len(msgs)}")
        for msg in msgs:
            if not isinstance(msg, Message):
                raise InvalidMessage(f"not a message: {msg!r}")
            if msg.integer > self.int_cap:
                raise InvalidMessage(f"integer {msg.integer} exceeds the cap {self.int_cap}")
            if canonicalize_alignment(msg.alignment) not in self._align_index:
                raise InvalidMessage(f"alignment {msg.alignment} is outside the support")
            if self.kind == CANONICAL:
                if msg.favorite is None or not 0 <= msg.favorite < self.m:
                    raise InvalidMessage("canonical messages carry a favorite alternative")
            else:
                if msg.rule is None or msg.rule.alignment != canonicalize_alignment(msg.alignment):
                    raise InvalidMessage("partially-honest messages carry a rule for the claimed alignment")
                if msg.rule not in self._descriptors[msg.rule.alignment]:
                    raise InvalidMessage("rule descriptor outside the allowed set")

    def outcome_rule(self, msgs: Sequence[Message]) -> int:
        """Direct evaluation of g, independent of the outcome tensor."""
        n = self.n
        classes = [canonicalize_alignment(msg.alignment) for msg in msgs]
        peaks = [msg.preference.peak for msg in msgs]
        agreed = [a for a, c in Counter(classes).items() if c >= n - 1]
        if agreed:
            return self.scf.rule_for(agreed[0]).outcome(peaks)
        top = max(msg.integer for msg in msgs)
        j = next(i for i, msg in enumerate(msgs) if msg.integer == top)
        if self.kind == CANONICAL:
            return msgs[j].favorite
        return msgs[j].rule.outcome(peaks)

    def tensor(self) -> np.ndarray:
        """Flattened outcome of every message profile, shape ``(k,) * n`` in C order."""
        if self._tensor is None:
            self._tensor = self._build_tensor()
        return self._tensor

    def _build_tensor(self) -> np.ndarray:
        n, k = self.n, self.k
        if k ** n > PROFILE_LIMIT and not self.allow_large:
            raise ScaleExceeded(f"{k}^{n} message profiles exceed the default scan limit")

        def on_axis(arr, i):
            shape = [1] * n
            shape[i] = k
            return arr.reshape(shape)

        aligns = [on_axis(self._attr["align"], i) for i in range(n)]
        peaks = [on_axis(self._attr["peak"], i) for i in range(n)]
        out = np.full((k,) * n, -1, dtype=np.int8)
        for s, a in enumerate(self.support):
            agree = sum((ai == s).astype(np.int8) for ai in aligns) >= n - 1
            val = rule_alt_grid(self.scf.rule_for(a))[tuple(peaks)]
            out = np.where(agree & (out < 0), val, out)
        ints = [on_axis(self._attr["int"], i) for i in range(n)]
        best = ints[0]
        winner = np.zeros_like(best)
        for i in range(1, n):
            winner = np.where(ints[i] > best, i, winner)
            best = np.maximum(best, ints[i])
        if self.kind == CANONICAL:
            favs = [on_axis(self._attr["fav"], i) for i in range(n)]
            fallback = np.choose(winner, favs)
        else:
            table = np.stack([
                np.stack([rule_alt_grid(r) for r in self._descriptors[a]]) for a in self.support
            ])
            rules = [on_axis(self._attr["rule"], i) for i in range(n)]
            fallback = table[(np.choose(winner, aligns), np.choose(winner, rules)) + tuple(peaks)]
        out = np.where(out < 0, fallback, out).astype(np.int8)
        return out.reshape(-1)

    def flat_index(self, idx: Sequence[int]) -> int:
        flat = 0
        for i in idx:
            flat = flat * self.k + int(i)
        return flat


def canonical_mechanism(f: ProjectedSCF, int_cap: int = 2, allow_large: bool = False) -> Mechanism:
    return Mechanism(f, int_cap, CANONICAL, allow_large=allow_large)


def partially_honest_mechanism(f: ProjectedSCF, honest_agent: int, int_cap: int = 2,
                               descriptor_rules: str = "nvp", allow_large: bool = False) -> Mechanism:
    if len(f.support) < 3:
        raise PremiseNotMet("the partially-honest construction needs at least three alignments")
    if not 0 <= honest_agent < f.n:
        raise PremiseNotMet(f"honest agent {honest_agent} is not in 0..{f.n - 1}")
    return Mechanism(f, int_cap, PARTIALLY_HONEST, honest_agent=honest_agent,
                     descriptor_rules=descriptor_rules, allow_large=allow_large)


def outcome(mech: Mechanism, msgs: Sequence[Message]) -> int:
    mech.validate(msgs)
    return mech.outcome_rule(msgs)


@dataclass(frozen=True)
class EquilibriumReport:
    state: State
    expected: int
    truthful_equilibrium_outcome: int
    nash_outcomes: frozenset[int]
    truthful_profile_is_equilibrium: bool
    dominant_strategy_ok: bool
    strict_clause: bool
    false_alignment_equilibria: int = 0
    violations: tuple[dict, ...] = ()
    case_witnesses: tuple[dict, ...] = field(default=(), compare=False)

    @property
    def passed(self) -> bool:
        return (self.truthful_equilibrium_outcome == self.expected
                and self.truthful_profile_is_equilibrium
                and self.nash_outcomes == frozenset({self.expected})
                and self.dominant_strategy_ok)


def states_over(s: SupportSpec, n: int):
    for a in s:
        for prefs in itertools.product(enumerate_single_peaked(a), repeat=n):
            yield State(a, Profile(prefs))


def _utilities(mech: Mechanism, state: State, honesty: bool):
    m = mech.m
    score = np.array([[2 * (m - 1 - p.ranks[x]) for x in range(m)] for p in state.profile], dtype=np.int64)
    bonus = np.zeros((mech.n, mech.k), dtype=np.int64)
    if honesty and mech.honest_agent is not None:
        truth = mech._align_index[state.alignment]
        bonus[mech.honest_agent] = (mech._attr["align"] == truth)
    return score, bonus


def truthful_profile(mech: Mechanism, state: State) -> tuple[Message, ...]:
    a = state.alignment
    msgs = []
    for p in state.profile:
        if mech.kind == CANONICAL:
            msgs.append(Message(1, a, p, favorite=p.peak))
        else:
            msgs.append(Message(1, a, p, rule=mech.scf.rule_for(a)))
    return tuple(msgs)


def profitable_deviation(mech: Mechanism, msgs: Sequence[Message], state: State, honesty: bool = True):
    """First (agent, message, outcome) that strictly improves on ``msgs``, else None.

    Walks every unilateral deviation through the direct outcome rule, so it
    does not share code with the tensor scan.
    """
    honest = mech.honest_agent if honesty else None

    def value(i, profile):
        x = mech.outcome_rule(profile)
        u = 2 * (mech.m - 1 - state.profile[i].ranks[x])
        if i == honest and canonicalize_alignment(profile[i].alignment) == state.alignment:
            u += 1
        return u, x

    msgs = tuple(msgs)
    for i in range(mech.n):
        current, _ = value(i, msgs)
        for dev in mech.messages:
            trial = msgs[:i] + (dev,) + msgs[i + 1:]
            u, x = value(i, trial)
            if u > current:
                return i, dev, x
    return None


def analyse_state(mech: Mechanism, state: State, honesty: bool = True) -> EquilibriumReport:
    n, k = mech.n, mech.k
    g = mech.tensor()
    attr = mech._attr
    truth = mech._align_index[state.alignment]
    score, bonus = _utilities(mech, state, honesty)
    expected = mech.scf.outcome(state.alignment, state.profile)
    violations = []

    star = truthful_profile(mech, state)
    star_idx = [mech.index(msg) for msg in star]
    star_out = int(g[mech.flat_index(star_idx)])
    if star_out != expected:
        violations.append({"condition": "truthful_outcome", "outcome": star_out, "expected": expected})

    # private-truthful candidates with integer headroom
    cands = []
    for p in state.profile:
        pid = mech._pref_ids[p]
        cands.append(np.flatnonzero((attr["pref"] == pid) & (attr["int"] <= mech.int_cap - 1)))
    mask = kernels.nash_mask(g, k, cands, score, bonus).astype(bool)
    sub = g.reshape((k,) * n)[np.ix_(*cands)].reshape(-1)
    nash_outcomes = frozenset(int(x) for x in np.unique(sub[mask]))

    claim_alignments = [attr["align"][c] for c in cands]
    truthful_claims = np.ones(tuple(len(c) for c in cands), dtype=bool)
    for i, ca in enumerate(claim_alignments):
        shape = [1] * n
        shape[i] = len(ca)
        truthful_claims = truthful_claims & (ca == truth).reshape(shape)
    same_false = np.zeros_like(truthful_claims)
    for s in range(len(mech.support)):
        if s == truth:
            continue
        block = np.ones_like(truthful_claims)
        for i, ca in enumerate(claim_alignments):
            shape = [1] * n
            shape[i] = len(ca)
            block = block & (ca == s).reshape(shape)
        same_false |= block
    truthful_claims = truthful_claims.reshape(-1)
    same_false = same_false.reshape(-1)

    truthful_ok = bool(mask[truthful_claims].all())
    if not truthful_ok:
        bad = np.flatnonzero(truthful_claims & ~mask)[0]
        violations.append({"condition": "truthful_not_equilibrium",
                           "profile": _decode(mech, cands, bad)})
    wrong = np.flatnonzero(mask & (sub != expected))
    if len(wrong):
        violations.append({"condition": "wrong_equilibrium_outcome",
                           "profile": _decode(mech, cands, wrong[0]),
                           "outcome": int(sub[wrong[0]]), "expected": expected})
    false_eq = int((mask & same_false).sum())

    dominant_ok, strict = _dominance(mech, state, star_idx, score)
    if not dominant_ok:
        violations.append({"condition": "private_dominance"})

    witnesses = []
    if mech.kind == PARTIALLY_HONEST:
        witnesses = _case_witnesses(mech, state, cands, sub, mask, claim_alignments, expected, honesty)

    return EquilibriumReport(
        state=state, expected=expected, truthful_equilibrium_outcome=star_out,
        nash_outcomes=nash_outcomes, truthful_profile_is_equilibrium=truthful_ok,
        dominant_strategy_ok=dominant_ok, strict_clause=strict,
        false_alignment_equilibria=false_eq, violations=tuple(violations),
        case_witnesses=tuple(witnesses),
    )


def _decode(mech, cands, flat):
    idx = np.unravel_index(int(flat), tuple(len(c) for c in cands))
    return tuple(mech.messages[int(cands[i][j])] for i, j in enumerate(idx))


def _dominance(mech: Mechanism, state: State, star_idx, score):
    """Truthful private reports weakly dominate, others reporting the true alignment.

    Returns (weak dominance holds, strict clause holds). The strict clause asks
    that every misreport of a different preference is strictly worse against
    some reports of the others.
    """
    g = mech.tensor().reshape((mech.k,) * mech.n)
    attr = mech._attr
    truth = mech._align_index[state.alignment]
    on_truth = np.flatnonzero(attr["align"] == truth)
    weak, strict = True, True
    for i, p in enumerate(state.profile):
        options = np.concatenate([[star_idx[i]], on_truth])
        axes = [options if j == i else on_truth for j in range(mech.n)]
        u = np.moveaxis(score[i][g[np.ix_(*axes)]], i, 0)
        truthful, devs = u[0], u[1:]
        if (devs > truthful).any():
            weak = False
        other_pref = attr["pref"][on_truth] != mech._pref_ids[p]
        better = (truthful > devs).reshape(len(on_truth), -1).any(axis=1)
        if not better[other_pref].all():
            strict = False
    return weak, strict


def _case_witnesses(mech, state, cands, sub, mask, claim_alignments, expected, honesty):
    """Concrete deviations breaking the non-equilibrium profiles the construction rules out."""
    n = mech.n
    grids = np.meshgrid(*claim_alignments, indexing="ij")
    stacked = np.stack(grids, axis=-1).reshape(-1, n)
    n_distinct = np.array([len(set(row)) for row in stacked])
    truth = mech._align_index[state.alignment]
    all_false = (n_distinct == 1) & (stacked[:, 0] != truth)
    split = n_distinct == 2
    top, count = Counter(state.profile.peaks).most_common(1)[0]
    out = []
    if count >= n - 1:
        # Case 1: near-unanimous peaks; any split equilibrium must return that peak
        hits = np.flatnonzero(split & mask)
        if len(hits):
            profile = _decode(mech, cands, hits[0])
            got = mech.outcome_rule(profile)
            out.append({"case": "case1", "profile": profile, "outcome": got, "required": top,
                        "holds": got == top})
    for label, select in (("all_false_alignment", all_false),
                          ("case2", split & (sub != expected) if count < n - 1 else np.zeros_like(split))):
        hits = np.flatnonzero(select & ~mask)
        if not len(hits):
            continue
        profile = _decode(mech, cands, hits[0])
        dev = profitable_deviation(mech, profile, state, honesty)
        if dev is None:
            continue
        agent, msg, x = dev
        out.append({"case": label, "profile": profile, "agent": agent, "deviation": msg,
                    "outcome": mech.outcome_rule(profile), "deviation_outcome": x, "holds": True})
    return out


def _analyse_chunk(args):
    mech, states, honesty = args
    return [analyse_state(mech, st, honesty) for st in states]


def _run(mech, states, honesty, jobs):
    states = list(states)
    mech.tensor()
    if jobs <= 1 or len(states) < 2:
        return [analyse_state(mech, st, honesty) for st in states]
    size = -(-len(states) // jobs)
    chunks = [(mech, states[i:i + size], honesty) for i in range(0, len(states), size)]
    with ProcessPoolExecutor(jobs) as pool:
        return [r for part in pool.map(_analyse_chunk, chunks) for r in part]


def check_mixed_implementation(mech: Mechanism, f: ProjectedSCF, s: SupportSpec,
                               jobs: int = 1) -> list[EquilibriumReport]:
    if mech.scf != f or mech.support != s:
        raise PremiseNotMet("mechanism was built for a different SCF or support")
    return _run(mech, states_over(s, f.n), honesty=True, jobs=jobs)


def check_partially_honest_implementation(f: ProjectedSCF, s: SupportSpec, honest_agent: int,
                                          int_cap: int = 2, honesty: bool = True,
                                          descriptor_rules: str = "nvp", jobs: int = 1,
                                          allow_large: bool = False) -> list[EquilibriumReport]:
    if f.support != s:
        raise PremiseNotMet("SCF is not defined exactly on the support")
    if not f.is_nvpms:
        raise PremiseNotMet("the partially-honest result covers NVPMS only")
    mech = partially_honest_mechanism(f, honest_agent, int_cap, descriptor_rules, allow_large)
    return _run(mech, states_over(s, f.n), honesty=honesty, jobs=jobs)


def spurious_equilibrium_witness(f: ProjectedSCF, int_cap: int = 2):
    """Canonical-mechanism equilibrium with truthful private reports but the wrong outcome.

    Looks for a state where n-1 agents share a peak ``x`` that ``f`` does not
    pick (an NVP failure), plus a second alignment on which those agents'
    preferences are also single-peaked and whose rule returns ``x`` whatever
    the remaining agent reports. The n-1 agents name the second alignment and
    the remaining agent reports truthfully. Returns a dict with the replayed
    result, or None if no such configuration exists.
    """
    n = f.n
    mech = canonical_mechanism(f, int_cap)
    for a in f.support:
        dom = enumerate_single_peaked(a)
        for x in range(mech.m):
            for lone in dom:
                if lone.peak == x:
                    continue
                for b in f.support:
                    if b == a:
                        continue
                    shared = [p for p in domain_intersection(a, b) if p.peak == x]
                    if not shared:
                        continue
                    rule_b = f.rule_for(b)
                    if any(rule_b.outcome([x] * (n - 1) + [y]) != x for y in range(mech.m)):
                        continue
                    prefs = (shared[0],) * (n - 1) + (lone,)
                    state = State(a, Profile(prefs))
                    expected = f.outcome(a, prefs)
                    if expected == x:
                        continue
                    msgs = tuple(Message(1, b, p, favorite=p.peak) for p in prefs[:-1]) + (
                        Message(1, a, lone, favorite=lone.peak),)
                    got = outcome(mech, msgs)
                    equilibrium = profitable_deviation(mech, msgs, state) is None
                    return {"state": state, "messages": msgs, "outcome": got, "expected": expected,
                            "is_equilibrium": equilibrium,
                            "confirmed": equilibrium and got != expected}
    return None
