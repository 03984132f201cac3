from pathlib import Path

import pytest

from stvbounds.bounds import FirstPrefSummary
from stvbounds.model import Ballot, BallotKind, Contest, Group

DATA = Path(__file__).parent / "data"

_results: dict[int, tuple[str, bool, str]] = {}
_details: dict[str, str] = {}


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def four_candidates():
    contest = Contest("four_candidates", 2, ("c1", "c2", "c3", "c4"))
    ballots = [
        Ballot(BallotKind.BTL, ("c3", "c2", "c1"), 10),
        Ballot(BallotKind.BTL, ("c2",), 15),
        Ballot(BallotKind.BTL, ("c4", "c1", "c2"), 15),
        Ballot(BallotKind.BTL, ("c3", "c1"), 5),
        Ballot(BallotKind.BTL, ("c1", "c3"), 10),
    ]
    return contest, ballots


@pytest.fixture
def party_surplus():
    contest = Contest(
        "party_surplus",
        5,
        ("a1", "a2", "a3", "a4", "b", "c"),
        (Group("A", ("a1", "a2", "a3", "a4")), Group("B", ("b",)), Group("C", ("c",))),
    )
    ballots = [
        Ballot(BallotKind.ATL, ("A",), 410),
        Ballot(BallotKind.BTL, ("b", "a3", "c"), 101),
        Ballot(BallotKind.BTL, ("c",), 87),
    ]
    return contest, ballots


@pytest.fixture
def party_surplus_summary():
    return FirstPrefSummary({"a1": (410, 0), "a2": (0, 0), "a3": (0, 0), "a4": (0, 0), "b": (0, 101), "c": (0, 87)})


@pytest.fixture
def acceptance_detail(request):
    """Attach a one-line measurement to the current acceptance criterion."""

    def note(text):
        _details[request.node.nodeid] = text

    return note


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): an acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or (report.when != "call" and report.passed):
        return
    number, title = marker.args
    previous = _results.get(number)
    if previous is not None and not previous[1]:
        return  # keep the first failure
    _results[number] = (title, report.passed, item.nodeid)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        title, passed, nodeid = _results[number]
        detail = _details.get(nodeid, "")
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {title}"
        terminalreporter.write_line(line + (f"  ({detail})" if detail else ""))
