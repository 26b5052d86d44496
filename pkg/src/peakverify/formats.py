"""JSON file formats: supports, SCFs, scenarios, and report objects."""

from __future__ import annotations

import json
import warnings
from dataclasses import fields, is_dataclass
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np

from .domain import (Alignment, Preference, Profile, State, SupportSpec, default_labels,
                     parse_alignment)
from .errors import InvalidAlignment, SupportMismatch
from .rules import MedianRule, ProjectedSCF


def _read(src) -> Any:
    if isinstance(src, (dict, list)):
        return src
    return json.loads(Path(src).read_text())


def _alignment(item, labels) -> Alignment:
    if isinstance(item, str):
        return parse_alignment(item, labels)
    index = {s: i for i, s in enumerate(labels)}
    try:
        return Alignment(tuple(index[str(x)] for x in item))
    except KeyError as exc:
        raise InvalidAlignment(f"unknown alternative {exc.args[0]!r}") from None


def load_support(src) -> SupportSpec:
    """``{"m": 4, "alignments": [["a","b","c","d"], "bdac"]}``; ``labels`` is optional."""
    data = _read(src)
    m = int(data["m"])
    labels = tuple(data.get("labels") or default_labels(m))
    if len(set(labels)) != len(labels) or len(labels) != m:
        raise InvalidAlignment("labels must be unique and exactly m of them")
    items = [_alignment(a, labels) for a in data["alignments"]]
    if any(a.m != m for a in items):
        raise InvalidAlignment(f"every alignment must order all {m} alternatives")
    return SupportSpec.of(items)


def dump_support(s: SupportSpec) -> dict:
    return {"m": s.m, "alignments": [list(a.label()) for a in s]}


def load_scf(src) -> ProjectedSCF:
    """``{"n": 3, "rules": {"abc": [0, 2]}}`` with phantom positions per alignment.

    Keys should be canonical labels. A non-canonical key is accepted with a
    warning and its positions are mirrored into canonical coordinates.
    """
    data = _read(src)
    n = int(data["n"])
    rules = []
    for key, phantoms in data["rules"].items():
        a = parse_alignment(key, data.get("labels"))
        ph = [int(p) for p in phantoms]
        if not a.canonical:
            warnings.warn(f"SCF key {key!r} is not canonical; mirrored onto {a.reversed().label()}",
                          stacklevel=2)
            a, ph = a.reversed(), [a.m - 1 - p for p in ph]
        if len(ph) != n - 1:
            raise SupportMismatch(f"rule for {key!r} needs {n - 1} phantoms, got {len(ph)}")
        rules.append(MedianRule(a, tuple(ph)))
    return ProjectedSCF(n, tuple(rules))


def dump_scf(f: ProjectedSCF) -> dict:
    return {"n": f.n, "rules": {r.alignment.label(): list(r.phantoms) for r in f.rules}}


def load_scenario(src) -> dict:
    """``{"scf": ..., "support": ..., "int_cap": 2, "honest_agent": 0 | null}``.

    ``scf`` and ``support`` may be inline objects or paths relative to the file.
    """
    data = _read(src)
    base = Path(src).parent if not isinstance(src, dict) else Path(".")

    def sub(item):
        return item if isinstance(item, dict) else base / item

    return {
        "scf": load_scf(sub(data["scf"])),
        "support": load_support(sub(data["support"])),
        "int_cap": int(data.get("int_cap", 2)),
        "honest_agent": data.get("honest_agent"),
    }


def letter(x, m=26):
    return None if x is None else default_labels(max(m, x + 1))[x]


def to_json(obj) -> Any:
    """Convert library values to plain JSON types, using labels for alternatives in context."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, Alignment):
        return obj.label()
    if isinstance(obj, Preference):
        return obj.label()
    if isinstance(obj, Profile):
        return [p.label() for p in obj]
    if isinstance(obj, State):
        return {"alignment": obj.alignment.label(), "profile": [p.label() for p in obj.profile]}
    if isinstance(obj, MedianRule):
        return {"alignment": obj.alignment.label(), "phantoms": list(obj.phantoms)}
    if isinstance(obj, ProjectedSCF):
        return dump_scf(obj)
    if isinstance(obj, SupportSpec):
        return obj.label()
    if isinstance(obj, dict):
        return {str(to_json(k)) if not isinstance(k, str) else k: to_json(v) for k, v in obj.items()}
    if isinstance(obj, (set, frozenset)):
        items = [to_json(x) for x in obj]
        return sorted(items, key=lambda x: json.dumps(x, sort_keys=True))
    if isinstance(obj, (list, tuple)):
        return [to_json(x) for x in obj]
    if is_dataclass(obj):
        return {f.name: to_json(getattr(obj, f.name)) for f in fields(obj)}
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _alt(x):
    return letter(x)


def witness_json(w) -> dict | None:
    if w is None:
        return None
    out = {"kind": w.kind}
    if w.alignment is not None:
        out["alignment"] = w.alignment.label()
    if w.other_alignment is not None:
        out["other_alignment"] = w.other_alignment.label()
    if w.profile is not None:
        out["profile"] = [p.label() for p in w.profile]
    if w.agent is not None:
        out["agent"] = w.agent
    if w.misreport is not None:
        out["misreport"] = w.misreport.label()
    if w.permutation is not None:
        out["permutation"] = list(w.permutation)
    for key in ("outcome", "deviation_outcome", "required"):
        if getattr(w, key) is not None:
            out[key] = _alt(getattr(w, key))
    if w.detail:
        out["detail"] = to_json(w.detail)
    return out


def verdict_json(v) -> dict:
    out = {"holds": v.holds, "witness": witness_json(v.witness)}
    if v.detail:
        out["detail"] = to_json(v.detail)
    return out


def implementability_json(iv) -> dict:
    witness = None
    for v in list(iv.sp_per_alignment.values()) + [iv.shared_monotonic, iv.nvp]:
        if v.witness is not None:
            witness = v.witness
            break
    return {
        "holds": iv.holds,
        "conclusion": iv.conclusion.value,
        "strategy_proof": {a.label(): v.holds for a, v in iv.sp_per_alignment.items()},
        "shared_monotonic": verdict_json(iv.shared_monotonic),
        "no_veto_power": verdict_json(iv.nvp),
        "witness": witness_json(witness),
    }


def search_report_json(r, timing: bool = False) -> dict:
    out = {"support": r.support.label(), "n": r.n, "found": [dump_scf(f) for f in r.found],
           "nodes_explored": r.nodes_explored}
    if timing:
        out["elapsed_ms"] = round(r.elapsed * 1000)
    return out


def _mech_witness(w: dict) -> dict:
    out = {}
    for k, v in w.items():
        if k in ("outcome", "deviation_outcome", "expected", "required") and isinstance(v, (int, np.integer)) \
                and not isinstance(v, bool):
            out[k] = _alt(int(v))
        elif k in ("profile", "messages"):
            out[k] = message_profile_json(v)
        elif k == "deviation":
            out[k] = message_profile_json([v])[0]
        else:
            out[k] = to_json(v)
    return out


def characterization_json(cv, timing: bool = False) -> dict:
    out = search_report_json(cv.report, timing) if cv.report is not None else {}
    out.update({
        "expected_family": cv.expected_family,
        "matches": cv.matches,
        "extras": [dump_scf(f) for f in sorted(cv.extras, key=lambda f: f.rules)],
        "missing": [dump_scf(f) for f in sorted(cv.missing, key=lambda f: f.rules)],
        "witnesses": [_mech_witness(w) for w in cv.witnesses],
        "holds": cv.holds,
    })
    return out


def message_profile_json(msgs) -> list[dict]:
    from .mechsim import profile_label

    return profile_label(msgs)


def equilibrium_report_json(r) -> dict:
    return {
        "state": to_json(r.state),
        "expected": _alt(r.expected),
        "truthful_equilibrium_outcome": _alt(r.truthful_equilibrium_outcome),
        "nash_outcomes": sorted(_alt(x) for x in r.nash_outcomes),
        "truthful_profile_is_equilibrium": r.truthful_profile_is_equilibrium,
        "dominant_strategy_ok": r.dominant_strategy_ok,
        "strict_clause": r.strict_clause,
        "false_alignment_equilibria": r.false_alignment_equilibria,
        "passed": r.passed,
        "violations": [_mech_witness(v) for v in r.violations],
        "case_witnesses": [_mech_witness(w) for w in r.case_witnesses],
    }
