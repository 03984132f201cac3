import dataclasses
import json
from fractions import Fraction

import pytest

from stvbounds import cli
from stvbounds import io as sio
from stvbounds.cli import format_value, main
from stvbounds.engine import tabulate


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize(
    "x,text",
    [(Fraction(310, 410), "0.756"), (Fraction(1, 101), "0.0099"), (Fraction(210, 410), "0.512"),
     (Fraction(111, 511), "0.217"), (Fraction(6, 25), "0.24"), (Fraction(0), "0"), (Fraction(108), "108")],
)
def test_format_value(x, text):
    assert format_value(x) == text


def test_tabulate_party_surplus(capsys, data_dir, tmp_path):
    out_path = tmp_path / "log.json"
    code, out, _ = run(capsys, "tabulate", "--contest", data_dir / "party_surplus_contest.json",
                       "--ballots", data_dir / "party_surplus_ballots.csv", "--out", out_path)
    assert code == 0
    assert "quota 100" in out
    assert "round 4: transfer value 111/511 = 0.217" in out
    assert "rose from 0.0099 to 0.217" in out
    assert "seated: a1 b a2 a3 c" in out
    assert "pattern: q q q q q …" in out
    log = sio.load_log(out_path)
    assert log.seated == ("a1", "b", "a2", "a3", "c")


def test_tabulate_four_candidates(capsys, data_dir):
    code, out, _ = run(capsys, "tabulate", "--contest", data_dir / "four_candidates_contest.json",
                       "--ballots", data_dir / "four_candidates_ballots.csv")
    assert code == 0
    assert "tv=0.24" in out
    assert "pattern: e q e q" in out


def test_repeated_runs_are_byte_identical(capsys, data_dir, tmp_path):
    outs = []
    for name in ("one.json.gz", "two.json.gz"):
        path = tmp_path / name
        code, out, _ = run(capsys, "tabulate", "--contest", data_dir / "party_surplus_contest.json",
                           "--ballots", data_dir / "party_surplus_ballots.csv", "--record-piles", "--out", path)
        assert code == 0
        outs.append((out, path.read_bytes()))
    assert outs[0] == outs[1]


def test_analyze_and_pattern(capsys, data_dir, tmp_path):
    report = tmp_path / "report.json"
    code, out, _ = run(capsys, "analyze", "--contest", data_dir / "party_surplus_contest.json",
                       "--summary", data_dir / "party_surplus_summary.csv",
                       "--events", data_dir / "party_surplus_events.json", "--out", report)
    assert code == 0
    assert "guaranteed prefix: 4 (a1, b, a2, a3)" in out
    contest = sio.load_contest(data_dir / "party_surplus_contest.json")
    log = tmp_path / "log.json"
    sio.write_text(log, sio.write_log(tabulate(contest, sio.load_ballots(data_dir / "party_surplus_ballots.csv", contest))))
    code, out, _ = run(capsys, "pattern", "--log", log, "--report", report)
    assert code == 0
    assert out == "[q q q q] q …\n"
    code, out, _ = run(capsys, "analyze", "--contest", data_dir / "party_surplus_contest.json",
                       "--summary", data_dir / "party_surplus_summary.csv", "--log", log)
    assert "guaranteed prefix: 4" in out


def test_verify_confirms_party_surplus(capsys, data_dir, tmp_path):
    path = tmp_path / "verdict.json"
    code, out, _ = run(capsys, "verify", "--contest", data_dir / "party_surplus_contest.json",
                       "--summary", data_dir / "party_surplus_summary.csv",
                       "--events", data_dir / "party_surplus_events.json", "--out", path)
    assert code == 0
    assert "confirmed (531380 completions)" in out
    assert sio.parse_verdict(path.read_text()).confirmed


def test_verify_refuses_large_space(capsys, data_dir):
    code, _, err = run(capsys, "verify", "--contest", data_dir / "party_surplus_contest.json",
                       "--summary", data_dir / "party_surplus_summary.csv",
                       "--events", data_dir / "party_surplus_events.json", "--max-completions", 1000)
    assert code == 5
    assert "exceeds the limit" in err


def test_verify_checks_only_the_flagged_prefix(capsys, data_dir, tmp_path):
    contest = data_dir / "party_surplus_contest.json"
    summary = tmp_path / "summary.csv"
    summary.write_text("candidate,atl_papers,btl_papers\na1,410,0\nb,0,101\nc,0,87\n")
    events = tmp_path / "events.json"
    events.write_text(json.dumps({"format": "stv-events", "version": 1, "events": [
        {"kind": "elect", "candidate": "a1"}, {"kind": "elect", "candidate": "b"},
        {"kind": "elect", "candidate": "a2"}, {"kind": "elect", "candidate": "a3"},
        {"kind": "elect", "candidate": "a4"}]}))
    code, out, _ = run(capsys, "verify", "--contest", contest, "--summary", summary, "--events", events)
    # a4's lower bound at its round is 88, below the quota of 100, so only four are claimed
    assert code == 0
    assert "guaranteed: a1 b a2 a3" in out


def test_verify_reports_counterexample(capsys, data_dir, tmp_path, monkeypatch):
    real = cli.analyze

    def overclaim(*args, **kwargs):
        report = real(*args, **kwargs)
        return dataclasses.replace(report, flags=(True,) * 5, prefix_length=5)

    monkeypatch.setattr(cli, "analyze", overclaim)
    path = tmp_path / "verdict.json"
    code, out, _ = run(capsys, "verify", "--contest", data_dir / "party_surplus_contest.json",
                       "--summary", data_dir / "party_surplus_summary.csv",
                       "--events", data_dir / "party_surplus_events.json", "--out", path)
    assert code == 1
    assert "counterexample: c not seated" in out
    assert "kind,multiplicity,preferences" in out
    verdict = sio.parse_verdict(path.read_text())
    assert not verdict.confirmed and verdict.unseated == ("c",)


def test_summarize(capsys, data_dir):
    code, out, _ = run(capsys, "summarize", "--contest", data_dir / "party_surplus_contest.json",
                       "--ballots", data_dir / "party_surplus_ballots.csv")
    assert code == 0
    assert out == (data_dir / "party_surplus_summary.csv").read_text()


def test_ingest(capsys, data_dir, tmp_path):
    prefs = tmp_path / "prefs.csv"
    header = sio.AEC_2019_HEADER + ["A", "B", "C", "a1", "a2", "a3", "a4", "b", "c"]
    rows = [["V", "D", "P", "1", "1", str(i)] for i in range(3)]
    rows[0] += ["1", "", "2"] + [""] * 6
    rows[1] += ["", "", ""] + ["6", "5", "4", "3", "2", "1"]
    rows[2] += [""] * 9
    prefs.write_text("\n".join(",".join(r) for r in [header] + rows) + "\n")
    out_path = tmp_path / "ballots.csv"
    code, out, _ = run(capsys, "ingest", "--contest", data_dir / "party_surplus_contest.json",
                       "--preferences", prefs, "--out", out_path)
    assert code == 0
    assert "2 formal papers in 2 ballot classes; 1 rows skipped as informal" in out
    assert out_path.read_text() == "kind,multiplicity,preferences\nATL,1,A C\nBTL,1,c b a4 a3 a2 a1\n"


def test_exit_codes(capsys, data_dir, tmp_path):
    contest = data_dir / "four_candidates_contest.json"
    code, _, _ = run(capsys, "tabulate", "--contest", tmp_path / "missing.json", "--ballots", contest)
    assert code == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("kind,multiplicity,preferences\nBTL,0,c1\n")
    code, _, err = run(capsys, "tabulate", "--contest", contest, "--ballots", bad)
    assert code == 3
    assert "problem" in err
    events = tmp_path / "events.json"
    events.write_text(json.dumps({"format": "stv-events", "version": 1,
                                  "events": [{"kind": "elect", "candidate": "zz"}]}))
    summary = tmp_path / "s.csv"
    summary.write_text("candidate,atl_papers,btl_papers\nc1,0,10\n")
    code, _, _ = run(capsys, "analyze", "--contest", contest, "--summary", summary, "--events", events)
    assert code == 4
    with pytest.raises(SystemExit) as info:
        main(["tabulate"])
    assert info.value.code == 2
