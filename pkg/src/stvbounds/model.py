"""Contests, groups and ballots.

Candidates that are not listed in any group behave as singleton groups for
every group-related query, but they never acquire an above-the-line box:
ATL ballots may only name declared groups.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import BallotError, ContestError


class BallotKind(str, Enum):
    ATL = "ATL"
    BTL = "BTL"


@dataclass(frozen=True)
class Group:
    id: str
    members: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise ContestError("empty-group", f"group {self.id!r} has no members")
        if len(set(self.members)) != len(self.members):
            raise ContestError("duplicate-group-member", f"group {self.id!r} repeats a member")


@dataclass(frozen=True)
class Contest:
    """An STV contest: candidates in ballot-paper order, groups and seats."""

    name: str
    seats: int
    candidates: tuple[str, ...]
    groups: tuple[Group, ...] = ()
    _index: dict = field(init=False, repr=False, compare=False)
    _group_of: dict = field(init=False, repr=False, compare=False)
    _groups_by_id: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(self.candidates))
        object.__setattr__(self, "groups", tuple(self.groups))
        if not self.candidates:
            raise ContestError("no-candidates", "contest has no candidates")
        index = {}
        for i, c in enumerate(self.candidates):
            if c in index:
                raise ContestError("duplicate-candidate", f"candidate {c!r} listed twice")
            index[c] = i
        if isinstance(self.seats, bool) or not isinstance(self.seats, int):
            raise ContestError("seats-out-of-range", f"seats must be an integer, got {self.seats!r}")
        if not 1 <= self.seats < len(self.candidates):
            raise ContestError(
                "seats-out-of-range",
                f"need 1 <= seats < {len(self.candidates)} candidates, got {self.seats}",
            )
        group_of = {}
        by_id = {}
        for g in self.groups:
            if g.id in by_id:
                raise ContestError("duplicate-group", f"group {g.id!r} declared twice")
            by_id[g.id] = g
            for m in g.members:
                if m not in index:
                    raise ContestError("unknown-group-member", f"group {g.id!r} lists unknown candidate {m!r}")
                if m in group_of:
                    raise ContestError("candidate-in-two-groups", f"candidate {m!r} is in more than one group")
                group_of[m] = g
        for c in self.candidates:
            if c not in group_of:
                group_of[c] = Group(c, (c,))
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_group_of", group_of)
        object.__setattr__(self, "_groups_by_id", by_id)

    def index(self, candidate: str) -> int:
        return self._index[candidate]

    def has_candidate(self, candidate: str) -> bool:
        return candidate in self._index

    def has_group(self, group_id: str) -> bool:
        return group_id in self._groups_by_id

    def group(self, group_id: str) -> Group:
        return self._groups_by_id[group_id]

    def group_of(self, candidate: str) -> Group:
        """The declared group holding ``candidate``, or its implicit singleton."""
        return self._group_of[candidate]

    def later_group_members(self, candidate: str) -> tuple[str, ...]:
        members = self._group_of[candidate].members
        return members[members.index(candidate) + 1:]

    def is_last_in_group(self, candidate: str) -> bool:
        return not self.later_group_members(candidate)

    def is_group_head(self, candidate: str) -> bool:
        return self._group_of[candidate].members[0] == candidate

    def quota(self, total_ballots: int) -> int:
        return compute_quota(total_ballots, self.seats)


@dataclass(frozen=True)
class Ballot:
    """A class of identical ballot papers.

    ``prefs`` ranks group ids for ATL ballots and candidate ids for BTL ones.
    """

    kind: BallotKind
    prefs: tuple[str, ...]
    multiplicity: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", BallotKind(self.kind))
        object.__setattr__(self, "prefs", tuple(self.prefs))


def compute_quota(total_ballots: int, seats: int) -> int:
    """Droop quota: ``floor(total / (seats + 1)) + 1``."""
    if seats < 1:
        raise ValueError(f"seats must be positive, got {seats}")
    if total_ballots < 0:
        raise ValueError(f"total_ballots must be non-negative, got {total_ballots}")
    return total_ballots // (seats + 1) + 1


def validate_ballot(ballot: Ballot, contest: Contest) -> list[str]:
    """Return a list of problems with ``ballot``; empty when it is well formed.

    Only structural problems are reported. Statutory formality rules (minimum
    numbers of preferences and the like) are not checked.
    """
    problems = []
    if ballot.multiplicity < 1:
        problems.append(f"multiplicity must be positive, got {ballot.multiplicity}")
    if not ballot.prefs:
        problems.append("empty preferences")
    seen = set()
    for p in ballot.prefs:
        if p in seen:
            problems.append(f"duplicate preference {p!r}")
        seen.add(p)
        if ballot.kind is BallotKind.ATL and not contest.has_group(p):
            problems.append(f"unknown group {p!r}")
        elif ballot.kind is BallotKind.BTL and not contest.has_candidate(p):
            problems.append(f"unknown candidate {p!r}")
    return problems


def expand_atl(ballot: Ballot, contest: Contest) -> tuple[str, ...]:
    """Convert a ranking over groups into the implied ranking over candidates."""
    if ballot.kind is not BallotKind.ATL:
        raise BallotError("expand_atl needs an ATL ballot")
    out = []
    for gid in ballot.prefs:
        if not contest.has_group(gid):
            raise BallotError(f"unknown group {gid!r}")
        out.extend(contest.group(gid).members)
    return tuple(out)


def candidate_ranking(ballot: Ballot, contest: Contest) -> tuple[str, ...]:
    """The ranking over candidates used for counting, for either ballot kind."""
    if ballot.kind is BallotKind.ATL:
        return expand_atl(ballot, contest)
    return ballot.prefs


def total_papers(ballots) -> int:
    return sum(b.multiplicity for b in ballots)
