"""Command-line entry point.

Exit codes: 0 every verdict holds, 1 a violation or mismatch was found (a
witness is written), 2 usage or configuration error, 3 a premise of the
requested check is not met.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from pathlib import Path

from . import checker, formats, mechsim, rules, search
from .domain import (canonical_alignments, domain_intersection, enumerate_single_peaked,
                     full_support, has_constant_shared_peaks, parse_alignment, shared_peaks)
from .errors import PeakVerifyError, PremiseNotMet

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_PREMISE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _at_least_3(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 3:
        raise argparse.ArgumentTypeError(f"must be at least 3, got {v}")
    return v


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _existing(text):
    if not Path(text).is_file():
        raise argparse.ArgumentTypeError(f"no such file: {text}")
    return text


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--aggregate", action="store_true",
                        help="emit one JSON document instead of newline-delimited records")
    common.add_argument("--jobs", type=_positive, default=1)
    common.add_argument("--allow-large", action="store_true", help="lift the default scale guards")
    common.add_argument("--timing", action="store_true", help="include elapsed times (non-deterministic)")

    p = _Parser(prog="peakverify", description=__doc__.splitlines()[0])
    top = p.add_subparsers(dest="group", required=True, parser_class=_Parser)

    def add(sub, name, help_text):
        return sub.add_parser(name, parents=[common], help=help_text)

    dom = top.add_parser("domain", help="single-peaked domains").add_subparsers(dest="cmd", required=True)
    c = add(dom, "enum", "list the single-peaked domain of each alignment")
    c.add_argument("--m", type=_at_least_3, required=True)
    c.add_argument("--alignment", help="only this alignment, e.g. abc")
    c = add(dom, "shared", "shared peaks per pair and the constant-shared-peaks verdict")
    c.add_argument("--support", type=_existing, required=True)
    c = add(dom, "intersect", "domain intersections per pair")
    c.add_argument("--support", type=_existing, required=True)

    scf = top.add_parser("scf", help="projected SCFs").add_subparsers(dest="cmd", required=True)
    c = add(scf, "check", "implementability conditions of an SCF")
    c.add_argument("--scf", type=_existing, required=True)
    c.add_argument("--support", type=_existing, required=True)
    c = add(scf, "enum-rules", "enumerate median rules")
    c.add_argument("--n", type=_at_least_3, required=True)
    c.add_argument("--m", type=_at_least_3, required=True)
    c.add_argument("--alignment")
    c.add_argument("--nvp-only", action="store_true")

    srch = top.add_parser("search", help="assignment search").add_subparsers(dest="cmd", required=True)
    c = add(srch, "nvpms", "all implementable NVP median assignments over a support")
    c.add_argument("--n", type=_at_least_3, required=True)
    g = c.add_mutually_exclusive_group(required=True)
    g.add_argument("--support", type=_existing)
    g.add_argument("--m", type=_at_least_3, help="use the full support on m alternatives")

    ver = top.add_parser("verify", help="characterization verifiers").add_subparsers(dest="cmd", required=True)
    c = add(ver, "lemma1", "shared peaks are contiguous and consistently ordered")
    c.add_argument("--m", type=_at_least_3, required=True)
    c = add(ver, "lemma2", "shared-monotonicity equals matching cut counts")
    c.add_argument("--n", type=_at_least_3, required=True)
    c.add_argument("--m", type=_at_least_3, required=True)
    c = add(ver, "theorem2", "full-support characterization")
    c.add_argument("--n", type=_at_least_3, required=True)
    c.add_argument("--m", type=_at_least_3, required=True)
    c = add(ver, "obs2", "an alignment and its reverse")
    c.add_argument("--n", type=_at_least_3, required=True)
    c.add_argument("--alignment", required=True)
    for name, text in (("prop2", "pairwise-disjoint domains"), ("prop3", "constant shared peaks")):
        c = add(ver, name, text)
        c.add_argument("--n", type=_at_least_3, required=True)
        c.add_argument("--support", type=_existing, required=True)
    c = add(ver, "prop4", "partially-honest implementation of NVPMS")
    c.add_argument("--n", type=_at_least_3, default=3)
    c.add_argument("--support", type=_existing, required=True)
    c.add_argument("--scf", type=_existing, help="check this SCF instead of every NVPMS")
    c.add_argument("--honest-agent", type=int, default=0)
    c.add_argument("--int-cap", type=int, default=2)
    c.add_argument("--no-honesty", action="store_true", help="control run without the honesty refinement")

    mech = top.add_parser("mech", help="mechanism simulation").add_subparsers(dest="cmd", required=True)
    c = add(mech, "simulate", "exhaustive equilibrium scan, one report per state")
    c.add_argument("--scenario", type=_existing)
    c.add_argument("--scf", type=_existing)
    c.add_argument("--support", type=_existing)
    c.add_argument("--int-cap", type=int)
    c.add_argument("--honest-agent", type=int)
    c.add_argument("--no-honesty", action="store_true")
    return p


def _emit(records, args, out):
    records = list(records)
    if args.format == "csv":
        keys = list(dict.fromkeys(k for r in records for k in r))
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for r in records:
            w.writerow({k: (json.dumps(v, sort_keys=True) if isinstance(v, (dict, list)) else v)
                        for k, v in r.items()})
        out.write(buf.getvalue())
    elif args.aggregate or len(records) == 1:
        payload = records[0] if len(records) == 1 and not args.aggregate else records
        out.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    else:
        for r in records:
            out.write(json.dumps(r, sort_keys=True) + "\n")


def _domain_enum(args):
    if args.alignment:
        a = parse_alignment(args.alignment)
        if a.m != args.m:
            raise UsageError(f"alignment {args.alignment!r} does not have {args.m} alternatives")
        targets = [a]
    else:
        targets = canonical_alignments(args.m)
    recs = [{"alignment": a.label(), "size": len(enumerate_single_peaked(a)),
             "preferences": [p.label() for p in enumerate_single_peaked(a)]} for a in targets]
    return EXIT_OK, recs


def _domain_shared(args):
    s = formats.load_support(args.support)
    recs = [{"pair": [a1.label(), a2.label()], "shared_peaks": sorted(formats.letter(x) for x in shared_peaks(a1, a2))}
            for a1, a2 in s.pairs()]
    v = has_constant_shared_peaks(s)
    summary = {"constant_shared_peaks": v.holds,
               "peaks": sorted(formats.letter(x) for x in v.peaks) if v.peaks else None}
    if v.witness:
        summary["witness"] = [{"pair": [p[0].label(), p[1].label()],
                               "shared_peaks": sorted(formats.letter(x) for x in p[2])} for p in v.witness]
    return (EXIT_OK if v.holds else EXIT_VIOLATION), recs + [summary]


def _domain_intersect(args):
    s = formats.load_support(args.support)
    recs = [{"pair": [a1.label(), a2.label()],
             "intersection": [p.label() for p in domain_intersection(a1, a2)]} for a1, a2 in s.pairs()]
    return EXIT_OK, recs


def _scf_check(args):
    f = formats.load_scf(args.scf)
    s = formats.load_support(args.support)
    iv = checker.check_implementable(f, s, args.allow_large)
    return (EXIT_OK if iv.holds else EXIT_VIOLATION), [formats.implementability_json(iv)]


def _scf_enum_rules(args):
    targets = [parse_alignment(args.alignment)] if args.alignment else canonical_alignments(args.m)
    recs = []
    for a in targets:
        found = rules.enumerate_median_rules(args.n, a, args.nvp_only)
        recs.append({"alignment": a.label(), "count": len(found),
                     "expected_count": None if args.nvp_only else rules.count_median_rules(args.n, a.m),
                     "rules": [list(r.phantoms) for r in found]})
    return EXIT_OK, recs


def _support_or_full(args):
    return formats.load_support(args.support) if args.support else full_support(args.m)


def _search_nvpms(args):
    r = search.search_implementable_nvpms(args.n, _support_or_full(args), args.allow_large, args.jobs)
    return EXIT_OK, [formats.search_report_json(r, args.timing)]


def _verdict_result(v, **extra):
    out = {**extra, **formats.verdict_json(v)}
    return (EXIT_OK if v.holds else EXIT_VIOLATION), [out]


def _verify(args):
    cmd = args.cmd
    if cmd == "lemma1":
        return _verdict_result(search.verify_lemma_consistency(args.m), m=args.m)
    if cmd == "lemma2":
        return _verdict_result(search.verify_lemma_symmetry(args.n, args.m), n=args.n, m=args.m)
    if cmd == "theorem2":
        cv = search.verify_full_support_theorem(args.n, args.m, args.allow_large, args.jobs)
        print(f"matches: {cv.expected_family}" if cv.matches else f"mismatch: {cv.expected_family}",
              file=sys.stderr)
        return (EXIT_OK if cv.holds else EXIT_VIOLATION), [formats.characterization_json(cv, args.timing)]
    if cmd == "obs2":
        a = parse_alignment(args.alignment)
        return _verdict_result(search.verify_reverse_pair(args.n, a), n=args.n, alignment=a.label())
    s = formats.load_support(args.support)
    if cmd == "prop2":
        return _verdict_result(search.verify_disjoint_support(args.n, s), n=args.n, support=s.label())
    if cmd == "prop3":
        return _verdict_result(search.verify_constant_shared_peaks(args.n, s), n=args.n, support=s.label())
    return _partially_honest(args, s)


def _partially_honest(args, s):
    if args.scf:
        targets = [formats.load_scf(args.scf)]
    else:
        targets = list(search.all_nvpms(args.n, s))
    recs, ok = [], True
    for f in targets:
        reps = mechsim.check_partially_honest_implementation(
            f, s, args.honest_agent, args.int_cap, honesty=not args.no_honesty,
            jobs=args.jobs, allow_large=args.allow_large)
        failed = [r for r in reps if not r.passed]
        spurious = sum(r.false_alignment_equilibria for r in reps)
        rec = {"scf": formats.dump_scf(f), "states": len(reps), "passed": len(reps) - len(failed),
               "honesty": not args.no_honesty, "false_alignment_equilibria": spurious,
               "holds": not failed,
               "cases": sorted({w["case"] for r in reps for w in r.case_witnesses})}
        if failed:
            rec["witness"] = formats.equilibrium_report_json(failed[0])
            ok = False
        recs.append(rec)
    return (EXIT_OK if ok else EXIT_VIOLATION), recs


def _mech_simulate(args):
    if args.scenario:
        sc = formats.load_scenario(args.scenario)
    elif args.scf and args.support:
        sc = {"scf": formats.load_scf(args.scf), "support": formats.load_support(args.support),
              "int_cap": 2, "honest_agent": None}
    else:
        raise UsageError("mech simulate needs --scenario or both --scf and --support")
    if args.int_cap is not None:
        sc["int_cap"] = args.int_cap
    if args.honest_agent is not None:
        sc["honest_agent"] = args.honest_agent
    f, s = sc["scf"], sc["support"]
    if sc["honest_agent"] is None:
        mech = mechsim.canonical_mechanism(f, sc["int_cap"], args.allow_large)
        reps = mechsim.check_mixed_implementation(mech, f, s, jobs=args.jobs)
    else:
        reps = mechsim.check_partially_honest_implementation(
            f, s, int(sc["honest_agent"]), sc["int_cap"], honesty=not args.no_honesty,
            jobs=args.jobs, allow_large=args.allow_large)
    recs = [formats.equilibrium_report_json(r) for r in reps]
    return (EXIT_OK if all(r.passed for r in reps) else EXIT_VIOLATION), recs


DISPATCH = {
    ("domain", "enum"): _domain_enum,
    ("domain", "shared"): _domain_shared,
    ("domain", "intersect"): _domain_intersect,
    ("scf", "check"): _scf_check,
    ("scf", "enum-rules"): _scf_enum_rules,
    ("search", "nvpms"): _search_nvpms,
    ("mech", "simulate"): _mech_simulate,
}


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"peakverify: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    handler = _verify if args.group == "verify" else DISPATCH[(args.group, args.cmd)]
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            code, records = handler(args)
        for w in caught:
            print(f"peakverify: warning: {w.message}", file=sys.stderr)
    except PremiseNotMet as exc:
        print(f"peakverify: premise not met: {exc}", file=sys.stderr)
        witness = getattr(exc, "witness", None)
        if witness is not None:
            print(json.dumps({"premise_witness": formats.to_json(witness)}, sort_keys=True), file=sys.stderr)
        return EXIT_PREMISE
    except (UsageError, PeakVerifyError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"peakverify: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        with open(args.out, "w") as fh:
            _emit(records, args, fh)
    else:
        _emit(records, args, stdout)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
