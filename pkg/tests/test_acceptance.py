"""Acceptance criteria, one test per criterion.

Run ``pytest tests/test_acceptance.py`` to see a PASS/FAIL line per criterion
at the end of the session output.
"""

import random
import time
from fractions import Fraction

import pytest

from checks import conservation_problems
from generators import ballots_for, contests, random_election
from hypothesis import given, settings
from hypothesis import strategies as st
from stvbounds import io as sio
from stvbounds.bounds import Event, analyze, containment_violations, events_from_log
from stvbounds.cli import format_value
from stvbounds.engine import EventKind, detect_value_increases, tabulate
from stvbounds.errors import EnumerationLimitError
from stvbounds.oracle import CompletionSpace, _Tree, verify_guarantees

SUITE5_CONTESTS = 1000
SUITE6_CONTESTS = 200
SUITE6_MIN_VERIFIED = 100


@pytest.mark.acceptance(1, "four-candidate replay")
def test_criterion_1_four_candidates_replay(four_candidates, acceptance_detail):
    start = time.perf_counter()
    log = tabulate(*four_candidates)
    elapsed = time.perf_counter() - start
    assert log.quota == 19
    assert log.events[0].tallies == {"c1": 10, "c2": 15, "c3": 15, "c4": 15}
    assert (log.events[0].kind, log.events[0].candidate) == (EventKind.ELIMINATE, "c1")
    assert log.events[1].tallies["c3"] == 25
    assert (log.events[1].kind, log.events[1].candidate) == (EventKind.ELECT, "c3")
    assert log.events[1].transfer_value == Fraction(6, 25)
    assert log.events[2].tallies == {"c2": 17, "c4": 15}
    assert log.events[3].tallies == {"c2": 32}
    assert log.seated == ("c3", "c2")
    assert elapsed < 1
    acceptance_detail(f"{elapsed * 1000:.1f} ms")



@pytest.mark.acceptance(2, "party surplus replay")
def test_criterion_2_party_surplus_replay(party_surplus, acceptance_detail):
    start = time.perf_counter()
    log = tabulate(*party_surplus)
    elapsed = time.perf_counter() - start
    assert log.seated == ("a1", "b", "a2", "a3", "c")
    taus = [e.transfer_value for e in log.events if e.transfer_value is not None]
    assert taus == [Fraction(310, 410), Fraction(1, 101), Fraction(210, 410), Fraction(111, 511)]
    assert [format_value(t) for t in taus] == ["0.756", "0.0099", "0.512", "0.217"]
    assert log.events[-1].tallies == {"a4": 89, "c": 108}
    assert elapsed < 1
    acceptance_detail(f"{elapsed * 1000:.1f} ms")


@pytest.mark.acceptance(3, "value-increase detection")
def test_criterion_3_value_increase(party_surplus):
    found = detect_value_increases(tabulate(*party_surplus))
    assert len(found) == 1
    inc = found[0]
    contest, ballots = party_surplus
    assert ballots[inc.ballot].prefs == ("b", "a3", "c")
    assert inc.papers == 101
    assert (inc.old_value, inc.new_value, inc.round) == (Fraction(1, 101), Fraction(111, 511), 4)


@pytest.mark.acceptance(4, "guaranteed prefix on party surplus, confirmed by enumeration")
def test_criterion_4_guarantee_prefix(party_surplus, party_surplus_summary, acceptance_detail):
    contest, _ = party_surplus
    events = [Event("elect", c) for c in ("a1", "b", "a2", "a3", "c")]
    report = analyze(party_surplus_summary, events, contest)
    assert report.prefix_length == 4
    assert "c" not in report.guaranteed
    verdict = verify_guarantees(CompletionSpace(contest, party_surplus_summary), report)
    assert verdict.confirmed
    assert verdict.counterexample is None
    acceptance_detail(f"{verdict.completions} completions, {verdict.leaves} counts")


@pytest.fixture(scope="module")
def suite5():
    rng = random.Random(20240501)
    runs = []
    start = time.perf_counter()
    for _ in range(SUITE5_CONTESTS):
        contest, ballots = random_election(rng.randrange(2**63))
        log = tabulate(contest, ballots, record_piles=True)
        report = analyze(sio.summarize(ballots, contest), events_from_log(log), contest)
        runs.append((contest, ballots, log, containment_violations(report, log)))
    return runs, time.perf_counter() - start


@pytest.mark.acceptance(5, "containment over random contests")
def test_criterion_5_containment(suite5, acceptance_detail):
    runs, elapsed = suite5
    assert len(runs) >= 1000
    shapes = {(len(c.candidates), len(c.groups), c.seats) for c, _, _, _ in runs}
    assert {n for n, _, _ in shapes} == set(range(3, 9))
    assert {s for _, _, s in shapes} == {1, 2, 3}
    assert max(sum(b.multiplicity for b in ballots) for _, ballots, _, _ in runs) <= 200
    violations = [v for *_, found in runs for v in found]
    assert violations == []
    assert elapsed < 60
    acceptance_detail(f"{len(runs)} contests, 0 violations, {elapsed:.1f} s")


@pytest.fixture(scope="module")
def suite6():
    rng = random.Random(20240502)
    results = []
    refused = 0
    start = time.perf_counter()
    for _ in range(SUITE6_CONTESTS):
        contest, ballots = random_election(
            rng.randrange(2**63), candidates=(3, 6), groups=(1, 2), seats=(1, 3), max_group=3, max_papers=120
        )
        summary = sio.summarize(ballots, contest)
        log = tabulate(contest, ballots)
        report = analyze(summary, events_from_log(log), contest)
        space = CompletionSpace(contest, summary)
        try:
            space.check_limits()
        except EnumerationLimitError:
            refused += 1
            continue
        leaf_logs = []
        failures = []
        for _, _, _, leaf in _Tree(space).leaves():
            leaf_logs.append(leaf)
            missing = [c for c in report.guaranteed if c not in leaf.seated]
            if missing:
                failures.append(missing)
        results.append((contest, log, report, space.size, leaf_logs, failures))
    return results, refused, time.perf_counter() - start


@pytest.mark.acceptance(6, "guarantee soundness over tiny contests")
@pytest.mark.slow
def test_criterion_6_soundness(suite6, acceptance_detail):
    results, refused, elapsed = suite6
    assert len(results) >= SUITE6_MIN_VERIFIED
    claimed = sum(1 for _, _, report, *_ in results if report.prefix_length)
    # a suite where nothing is ever guaranteed would prove nothing
    assert claimed >= SUITE6_MIN_VERIFIED
    counterexamples = sum(len(f) for *_, f in results)
    assert counterexamples == 0
    assert elapsed < 300
    completions = sum(size for _, _, _, size, _, _ in results)
    acceptance_detail(
        f"{len(results)} verified ({claimed} with guarantees, {refused} over limits), "
        f"{completions} completions, 0 counterexamples, {elapsed:.1f} s"
    )


@pytest.mark.acceptance(7, "conservation and transfer-value range")
@pytest.mark.slow
def test_criterion_7_conservation(suite5, suite6, acceptance_detail):
    logs = [log for _, _, log, _ in suite5[0]]
    for _, log, _, _, leaf_logs, _ in suite6[0]:
        logs.append(log)
        logs.extend(leaf_logs)
    problems = [p for log in logs for p in conservation_problems(log)]
    assert problems == []
    acceptance_detail(f"{len(logs)} counts checked")


@pytest.mark.acceptance(8, "round trips for contest, ballot, summary, event and log documents")
@settings(max_examples=200, deadline=None)
@given(st.data())
def test_criterion_8_round_trips(data):
    contest = data.draw(contests())
    text = sio.write_contest(contest)
    assert sio.parse_contest(text) == contest
    assert sio.write_contest(sio.parse_contest(text)) == text
    ballots = data.draw(ballots_for(contest))
    text = sio.write_ballots(ballots)
    assert sio.parse_ballots(text, contest) == ballots
    assert sio.write_ballots(sio.parse_ballots(text, contest)) == text
    summary = sio.summarize(ballots, contest)
    text = sio.write_summary(summary)
    assert sio.parse_summary(text, contest) == summary
    assert sio.write_summary(sio.parse_summary(text, contest)) == text
    if ballots:
        log = tabulate(contest, ballots, record_piles=data.draw(st.booleans()))
        text = sio.write_log(log)
        assert sio.parse_log(text) == log
        assert sio.write_log(sio.parse_log(text)) == text
        events = events_from_log(log)
        text = sio.write_events(events)
        assert sio.parse_events(text) == events
        assert sio.write_events(sio.parse_events(text)) == text
