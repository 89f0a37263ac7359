"""The command-line surface: word grammar, subcommands, exit codes."""

import json

import pytest

from noodlefork import cli
from noodlefork.braids import parse_word
from noodlefork.forkpair import ForkSpec, pairing_exact
from noodlefork.laurent import LaurentPoly
from noodlefork.search import (
    KIND_KERNEL,
    Checkpoint,
    Counters,
    HitRecord,
    ScanParams,
    ScanResult,
    load_checkpoint,
)

PSI_TEXT = "a^-3 b^-2 c^-1 b c^4 b^-1 c b a b c^2 b a^-1 b^-1 c^-2"
K108_TEXT = "n=4;c=24,18,11,0;ends=1,3"
K108_ASCENDING = "2 - 9q + 18q^2 - 25q^3 + 25q^4 - 18q^5 + 9q^6 - 2q^7"


def run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# -- word grammar ---------------------------------------------------------------


def test_plain_words_parse_as_core_syntax():
    for text in ("", "a A", "bababa", "ba^3", PSI_TEXT):
        assert cli.parse_cli_word(text, 4) == parse_word(text, 4)


def test_group_power_differs_from_run_power():
    # power binds to the last letter of a bare run, to the whole group
    assert cli.parse_cli_word("ba^3", 4) == parse_word("b a^3", 4)
    assert cli.parse_cli_word("(ba)^3", 4) == parse_word("bababa", 4)


def test_bracket_is_commutator():
    assert cli.parse_cli_word("[a, b]", 4) == parse_word("a b A B", 4)
    assert cli.parse_cli_word("[a, b]^-1", 4) == parse_word("b a B A", 4)


def test_nested_groups_and_brackets():
    word = cli.parse_cli_word("[(ba)^3, (c)^-2]", 4)
    assert word == parse_word("bababa c^-2 A B A B A B c^2", 4)


def test_defines_bind_in_order():
    defines = cli._parse_defines(["x=ab", "y=x^2 c"], 4)
    assert defines["y"] == parse_word("abab c", 4)


def test_define_shadows_letter_run():
    defines = cli._parse_defines(["ab=c"], 4)
    assert cli.parse_cli_word("ab", 4, defines) == parse_word("c", 4)
    assert cli.parse_cli_word("a b", 4, defines) == parse_word("a b", 4)


def test_define_with_power_applies_to_whole_word():
    defines = cli._parse_defines(["x=ab"], 4)
    assert cli.parse_cli_word("x^-1", 4, defines) == parse_word("B A", 4)
    assert cli.parse_cli_word("x^2", 4, defines) == parse_word("abab", 4)


@pytest.mark.parametrize(
    "bad", ["(a", "a)", "[a b]", "[a, b", "a,", "a^", "a * b", "a ^ b"]
)
def test_grammar_rejects_malformed_text(bad):
    with pytest.raises(cli.WordSyntax):
        cli.parse_cli_word(bad, 4)


def test_bad_define_items_rejected():
    for item in ("psi", "2x=a", "=a"):
        with pytest.raises(cli.WordSyntax):
            cli._parse_defines([item], 4)


# -- renderers --------------------------------------------------------------------


def test_poly_text_ascending_order():
    assert cli._poly_text(LaurentPoly(0, (2, -9, 18, -25, 25, -18, 9, -2))) == (
        K108_ASCENDING
    )
    assert cli._poly_text(LaurentPoly(-1, (1, -1, 2))) == "q^-1 - 1 + 2q"
    assert cli._poly_text(LaurentPoly()) == "0"


def test_filters_round_trip_through_text():
    filters = ((2, 7), (123, 2305843009213693951))
    assert cli._parse_filters(cli._filters_text(filters)) == filters
    with pytest.raises(ValueError):
        cli._parse_filters("2,7")


def test_seed_filters_are_deterministic_units():
    assert cli._seed_filters(7) == cli._seed_filters(7)
    assert cli._seed_filters(7) != cli._seed_filters(8)
    for q0, m in cli._seed_filters(7):
        assert 2 <= q0 < m


# -- pair ---------------------------------------------------------------------------


def test_pair_prints_reference_polynomial(capsys):
    code, out, _ = run(capsys, "pair", "--spec", K108_TEXT)
    assert code == 0
    assert out.strip() == K108_ASCENDING


def test_pair_json_round_trips(capsys):
    code, out, _ = run(capsys, "pair", "--spec", K108_TEXT, "--json")
    assert code == 0
    doc = json.loads(out)
    poly = LaurentPoly(int(doc["poly"]["min_deg"]), tuple(doc["poly"]["coeffs"]))
    assert poly == pairing_exact(ForkSpec.from_text(K108_TEXT)).exact
    assert doc["k"] == 108
    assert doc["text"] == K108_ASCENDING


def test_pair_rejects_bad_spec(capsys):
    code, _, err = run(capsys, "pair", "--spec", "n=4;c=1,1;ends=1,3")
    assert code == 1
    assert "error:" in err


# -- usage errors ----------------------------------------------------------------


def test_unknown_flag_exits_one(capsys):
    code, _, err = run(capsys, "pair", "--spec", K108_TEXT, "--frobnicate")
    assert code == 1
    assert "error" in err


def test_unknown_subcommand_exits_one(capsys):
    code, _, _ = run(capsys, "frobnicate")
    assert code == 1


def test_missing_subcommand_exits_one(capsys):
    code, _, _ = run(capsys)
    assert code == 1


def test_help_exits_zero(capsys):
    code, out, _ = run(capsys, "--help")
    assert code == 0
    assert "subcommand" in out or "pair" in out


# -- verify -----------------------------------------------------------------------


def test_verify_trivial_word(capsys):
    code, out, _ = run(capsys, "verify", "--n", "4", "--word", "a A")
    assert code == 0
    assert "trivial braid word" in out


def test_verify_kernel_element_with_define(capsys):
    code, out, _ = run(
        capsys,
        "verify",
        "--n",
        "4",
        "--word",
        "[(ba)^3, psi^-1 b psi]",
        "--define",
        f"psi={PSI_TEXT}",
        "--at",
        "2",
    )
    assert code == 0
    assert "word: 106 letters" in out
    assert "kernel element at q=2; braid non-trivial" in out


def test_verify_json_schema(capsys):
    code, out, _ = run(
        capsys,
        "verify",
        "--word",
        "[(ba)^3, psi^-1 b psi]",
        "--define",
        f"psi={PSI_TEXT}",
        "--at",
        "2",
        "--at",
        "1/2",
        "--json",
    )
    assert code == 0
    doc = json.loads(out)
    assert parse_word(doc["word"], 4).letters == cli.parse_cli_word(
        f"[(ba)^3, ({PSI_TEXT})^-1 b {PSI_TEXT}]", 4
    ).letters
    assert doc["letters"] == 106
    assert doc["checks"]["artin_trivial"] is False
    assert doc["checks"]["generic_identity"] is False
    assert doc["checks"]["per_q0"] == {"2": True, "1/2": True}
    assert doc["verdict"] == "kernel element at q=2, q=1/2; braid non-trivial"


def test_verify_non_kernel_word(capsys):
    code, out, _ = run(capsys, "verify", "--word", "a b", "--at", "2")
    assert code == 0
    assert "not in the kernel" in out


def test_verify_rejects_undefined_name(capsys):
    code, _, err = run(capsys, "verify", "--word", "psi b")
    assert code == 1
    assert "error:" in err


def test_verify_rejects_bad_point(capsys):
    code, _, err = run(capsys, "verify", "--word", "a", "--at", "two")
    assert code == 1


# -- scans ------------------------------------------------------------------------


def test_specialize_small_space_clean(capsys):
    code, out, _ = run(capsys, "specialize", "--at", "2", "--kmax", "12")
    assert code == 0
    assert "verified hits: 0" in out


def test_specialize_rejects_root_of_unity(capsys):
    code, _, err = run(capsys, "specialize", "--at", "1", "--kmax", "4")
    assert code == 1
    assert "error:" in err


def test_scan_seed_prints_filters(capsys):
    code, out, _ = run(capsys, "scan", "--kmax", "8", "--seed", "7")
    assert code == 0
    assert "(seed 7)" in out
    assert cli._filters_text(cli._seed_filters(7)) in out


def test_scan_filters_and_seed_conflict(capsys):
    code, _, err = run(
        capsys, "scan", "--kmax", "8", "--seed", "7", "--filters", "2:7"
    )
    assert code == 1
    assert "mutually exclusive" in err


def test_scan_json_round_trips_params(capsys):
    code, out, _ = run(capsys, "scan", "--kmax", "8", "--json")
    assert code == 0
    doc = json.loads(out)
    params = ScanParams.from_json(doc["params"])
    assert params == ScanParams(n=4, k_max=8, mode="kernel")
    counters = Counters.from_json(doc["counters"])
    visited = counters.enumerated + counters.degenerate + counters.invalid_connectivity
    assert visited == int(doc["cursor"]) > 0
    assert doc["hits"] == []


def test_roots_small_space_clean(capsys):
    code, out, _ = run(capsys, "roots", "--kmax", "12", "--n", "3")
    assert code == 0
    assert "verified hits: 0" in out


def test_threaded_scan_matches_sequential(capsys):
    code1, out1, _ = run(capsys, "scan", "--kmax", "10", "--json", "--unit", "37")
    code2, out2, _ = run(
        capsys, "scan", "--kmax", "10", "--json", "--unit", "37", "--threads", "3"
    )
    assert code1 == code2 == 0
    doc1, doc2 = json.loads(out1), json.loads(out2)
    assert doc1["counters"] == doc2["counters"]
    assert doc1["hits"] == doc2["hits"]
    assert doc1["cursor"] == doc2["cursor"]


def test_threaded_checkpoint_matches_sequential(tmp_path, capsys):
    seq = tmp_path / "seq.json"
    par = tmp_path / "par.json"
    run(capsys, "scan", "--kmax", "10", "--checkpoint", str(seq), "--unit", "41")
    run(
        capsys,
        "scan",
        "--kmax",
        "10",
        "--checkpoint",
        str(par),
        "--unit",
        "41",
        "--threads",
        "4",
    )
    a = load_checkpoint(str(seq))
    b = load_checkpoint(str(par))
    assert (a.cursor, a.counters, a.hits) == (b.cursor, b.counters, b.hits)
    assert a.params.params_hash == b.params.params_hash


def test_scan_resumes_from_checkpoint(tmp_path, capsys):
    path = tmp_path / "cp.json"
    code, out, _ = run(
        capsys, "scan", "--kmax", "10", "--checkpoint", str(path), "--json"
    )
    first = json.loads(out)["counters"]
    code, out, _ = run(
        capsys, "scan", "--kmax", "10", "--checkpoint", str(path), "--json"
    )
    assert code == 0
    # a finished checkpoint resumes to a no-op, not a recount
    assert json.loads(out)["counters"] == first


def test_checkpoint_params_mismatch_exits_one(tmp_path, capsys):
    path = tmp_path / "cp.json"
    run(capsys, "scan", "--kmax", "10", "--checkpoint", str(path))
    code, _, err = run(capsys, "scan", "--kmax", "12", "--checkpoint", str(path))
    assert code == 1
    assert "error:" in err


def test_verified_hit_exits_two(monkeypatch, capsys):
    spec = ForkSpec.from_text("n=4;c=1,1,0,0;ends=1,2")
    params = ScanParams(n=4, k_max=8, mode="kernel")
    hit = HitRecord(spec, KIND_KERNEL, poly=LaurentPoly())
    fake = ScanResult(
        (hit,), Checkpoint(params, 10, Counters(enumerated=10, filter_hits=1), (hit,))
    )
    monkeypatch.setattr(cli, "kernel_scan", lambda p, **kw: fake)
    code, out, _ = run(capsys, "scan", "--kmax", "8")
    assert code == 2
    assert "kernel: n=4;c=1,1,0,0;ends=1,2 k=6" in out
    assert "verified hits: 1" in out


# -- synth ------------------------------------------------------------------------


def test_synth_conjugator_for_reference_spec(capsys):
    code, out, _ = run(capsys, "synth", "--spec", K108_TEXT)
    assert code == 0
    assert "conjugator:" in out
    length = int(out.split("letters:")[1].strip())
    assert 0 < length <= 24


def test_synth_budget_exhaustion_exits_one(capsys):
    code, _, err = run(
        capsys, "synth", "--spec", "n=4;c=0,0,0,1;ends=3,4", "--budget", "1"
    )
    assert code == 1
    assert "error:" in err


def test_synth_candidate_json(capsys):
    code, out, _ = run(capsys, "synth", "--spec", K108_TEXT, "--at", "2", "--json")
    assert code == 0
    doc = json.loads(out)
    word = parse_word(doc["word"], 4)
    assert word.exponent_sum == 0
    assert doc["checks"]["artin_trivial"] is False
    assert doc["checks"]["per_q0"]["2"] is True
    assert doc["provenance"]["spec"] == K108_TEXT


def test_synth_rejects_non_vanishing_point(capsys):
    code, _, err = run(capsys, "synth", "--spec", K108_TEXT, "--at", "3")
    assert code == 1
    assert "error:" in err


# -- reproduce ---------------------------------------------------------------------


def test_reproduce_all_pass(capsys):
    code, out, _ = run(capsys, "reproduce")
    assert code == 0
    assert out.count("PASS") == 4
    assert "FAIL" not in out


def test_reproduce_json(capsys):
    code, out, _ = run(capsys, "reproduce", "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["ok"] is True
    assert len(doc["items"]) == 4
    assert all(item["pass"] for item in doc["items"])


def test_reproduce_failure_exits_three(monkeypatch, capsys):
    broken = (("always wrong", lambda: False),)
    monkeypatch.setattr(cli, "_reproduce_checks", lambda: broken)
    code, out, _ = run(capsys, "reproduce")
    assert code == 3
    assert "FAIL" in out


# -- serve / work plumbing ----------------------------------------------------------


def test_serve_requires_ledger(capsys):
    code, _, err = run(capsys, "serve", "--kmax", "8")
    assert code == 1


def test_work_requires_url(capsys):
    code, _, err = run(capsys, "work")
    assert code == 1
