import io
import json
from importlib import resources

import pytest

from peakverify import formats
from peakverify.cli import run
from peakverify.domain import SupportSpec, full_support
from peakverify.errors import SupportMismatch
from peakverify.rules import make_true_median

FIX = resources.files("peakverify") / "fixtures"


def fx(name):
    return str(FIX / name)


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), stdout=out)
    return code, out.getvalue()


def test_full_support_verifier_true_median(capsys):
    code, out = call("verify", "theorem2", "--n", "3", "--m", "4")
    assert code == 0
    rec = json.loads(out)
    assert rec["matches"] and rec["expected_family"] == "TrueMedianOnly"
    assert "elapsed_ms" not in rec
    assert "matches: TrueMedianOnly" in capsys.readouterr().err


def test_timing_flag_adds_elapsed():
    _, out = call("verify", "theorem2", "--n", "3", "--m", "3", "--timing")
    assert "elapsed_ms" in json.loads(out)


def test_scf_check_sm_violation_exit_1():
    code, out = call("scf", "check", "--scf", fx("sm_violation_scf.json"),
                     "--support", fx("sm_violation_support.json"))
    rec = json.loads(out)
    assert code == 1 and rec["conclusion"] == "NotImplementable"
    w = rec["shared_monotonic"]["witness"]
    assert w["kind"] == "shared_monotonicity" and {w["outcome"], w["deviation_outcome"]} == {"b", "c"}


def test_usage_errors_exit_2():
    assert call("domain", "enum", "--m", "0")[0] == 2
    assert call("domain", "enum")[0] == 2
    assert call("nonsense")[0] == 2
    assert call("scf", "check", "--scf", "missing.json", "--support", "also-missing.json")[0] == 2


def test_premise_not_met_exit_3(capsys):
    code, _ = call("verify", "prop2", "--n", "3", "--support", fx("full_support_m3.json"))
    assert code == 3
    assert "premise_witness" in capsys.readouterr().err
    assert call("verify", "prop3", "--n", "3", "--support", fx("figure2_support.json"))[0] == 3


def test_domain_commands():
    code, out = call("domain", "enum", "--m", "3", "--alignment", "abc")
    assert code == 0 and json.loads(out)["preferences"] == ["a>b>c", "b>a>c", "b>c>a", "c>b>a"]
    code, out = call("domain", "shared", "--support", fx("constant_shared_pair.json"))
    lines = [json.loads(x) for x in out.splitlines()]
    assert code == 0 and lines[-1]["peaks"] == ["c", "d"]
    code, out = call("domain", "intersect", "--support", fx("disjoint_pair.json"))
    assert code == 0 and json.loads(out)["intersection"] == []
    assert call("domain", "shared", "--support", fx("figure2_support.json"))[0] == 1


def test_enum_rules_counts():
    code, out = call("scf", "enum-rules", "--n", "4", "--m", "4", "--aggregate")
    recs = json.loads(out)
    assert code == 0 and len(recs) == 12 and all(r["count"] == r["expected_count"] == 20 for r in recs)


def test_search_and_verifiers():
    code, out = call("search", "nvpms", "--n", "4", "--m", "3")
    assert code == 0 and len(json.loads(out)["found"]) == 2
    for argv in (("verify", "lemma1", "--m", "4"), ("verify", "lemma2", "--n", "3", "--m", "3"),
                 ("verify", "obs2", "--n", "4", "--alignment", "abc"),
                 ("verify", "prop2", "--n", "4", "--support", fx("disjoint_pair.json")),
                 ("verify", "prop3", "--n", "3", "--support", fx("constant_shared_pair.json"))):
        code, out = call(*argv)
        assert code == 0 and json.loads(out)["holds"], argv


def test_partially_honest_verifier_and_control():
    code, out = call("verify", "prop4", "--support", fx("full_support_m3.json"))
    assert code == 0 and json.loads(out)["false_alignment_equilibria"] == 0
    code, out = call("verify", "prop4", "--support", fx("full_support_m3.json"), "--no-honesty")
    assert json.loads(out)["false_alignment_equilibria"] > 0


def test_mech_simulate_streams_reports():
    code, out = call("mech", "simulate", "--scenario", fx("scenario_true_median.json"))
    lines = out.splitlines()
    assert code == 0 and len(lines) == 192
    assert all(json.loads(x)["passed"] for x in lines)
    code, out = call("mech", "simulate", "--scenario", fx("scenario_sm_violation.json"), "--aggregate")
    recs = json.loads(out)
    assert code == 1
    assert any(v["condition"] == "wrong_equilibrium_outcome" for r in recs for v in r["violations"])
    assert call("mech", "simulate")[0] == 2


def test_output_is_deterministic_across_jobs(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(["mech", "simulate", "--scenario", fx("scenario_partially_honest.json"), "--out", str(a)])
    run(["mech", "simulate", "--scenario", fx("scenario_partially_honest.json"), "--jobs", "2", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_csv_format():
    code, out = call("scf", "enum-rules", "--n", "3", "--m", "3", "--format", "csv")
    rows = out.splitlines()
    assert code == 0 and rows[0].startswith("alignment,") and len(rows) == 4


def test_support_and_scf_round_trip():
    s = formats.load_support(fx("full_support_m4.json"))
    assert s == full_support(4)
    assert formats.load_support(formats.dump_support(s)) == s
    f = make_true_median(3, full_support(3))
    assert formats.load_scf(formats.dump_scf(f)) == f


def test_loader_warnings_and_errors():
    with pytest.warns(UserWarning, match="collapsed"):
        formats.load_support({"m": 3, "alignments": ["abc", "cba"]})
    with pytest.warns(UserWarning, match="mirrored"):
        f = formats.load_scf({"n": 3, "rules": {"bca": [2, 2]}})
    assert f.rules[0].alignment.label() == "acb" and f.rules[0].phantoms == (0, 0)
    with pytest.raises(SupportMismatch):
        formats.load_scf({"n": 3, "rules": {"abc": [0]}})
    s = formats.load_support({"m": 3, "labels": ["x", "y", "z"], "alignments": [["x", "y", "z"]]})
    assert s == SupportSpec.of(["abc"])


def test_scenario_loader_resolves_relative_paths():
    sc = formats.load_scenario(fx("scenario_partially_honest.json"))
    assert sc["honest_agent"] == 0 and sc["int_cap"] == 2 and len(sc["support"]) == 3
