"""Australian Senate STV count with exact rational arithmetic.

One event happens per round: an election (with surplus distribution), an
elimination, or the seating of a candidate left standing once the number of
continuing candidates equals the number of vacancies. Ballot values are kept
as exact fractions; a candidate's reported tally is the floor of the exact sum
of the values in their pile.

Every paper leaving an elected candidate's pile is re-valued to that round's
transfer value regardless of the value it arrived with. This is the rule that
lets papers gain value during the count; such events are recorded on the log
as :class:`ValueIncrease` records.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import BallotError
from .model import Ballot, BallotKind, Contest, candidate_ranking, compute_quota, validate_ballot

ZERO = Fraction(0)
ONE = Fraction(1)


class EventKind(str, Enum):
    ELECT = "elect"
    ELIMINATE = "eliminate"
    SEAT = "seat"  # seated as one of the last candidates standing


@dataclass(frozen=True)
class PileSummary:
    """Split of a pile into papers still inside their first ATL group and the rest.

    ``atl_*`` covers ATL ballots sitting with a member of the first group they
    ranked; every other paper (BTL ballots, and ATL ballots that have left
    their first group) is counted under ``btl_*``.
    """

    atl_value: Fraction
    btl_value: Fraction
    atl_papers: int
    btl_papers: int


@dataclass(frozen=True)
class RoundEvent:
    round: int
    kind: EventKind
    candidate: str
    tallies: Mapping[str, int]
    values: Mapping[str, Fraction]
    transfer_value: Fraction | None = None
    has_quota: bool = False
    exhausted: Fraction = ZERO
    rounding_loss: Fraction = ZERO
    piles: Mapping[str, PileSummary] | None = None


@dataclass(frozen=True)
class ValueIncrease:
    """Papers of one ballot class that left a surplus worth more than they arrived with."""

    ballot: int  # index into the ballots passed to tabulate
    round: int
    old_value: Fraction
    new_value: Fraction
    papers: int


@dataclass(frozen=True)
class CountLog:
    contest: str
    seats: int
    total_papers: int
    quota: int
    events: tuple[RoundEvent, ...]
    seated: tuple[str, ...]
    value_increases: tuple[ValueIncrease, ...] = field(default=())


def compute_transfer_value(tally: int, quota: int, papers: int) -> Fraction:
    """Surplus divided by the number of papers in the elected candidate's pile."""
    if papers < 1:
        raise ValueError("cannot compute a transfer value for an empty pile")
    if tally < quota:
        raise ValueError(f"tally {tally} is below the quota {quota}")
    return Fraction(tally - quota, papers)


def select_elimination(
    standing: Sequence[str],
    history: Mapping[str, Sequence[int]],
    order: Mapping[str, int],
) -> str:
    """Pick the standing candidate with the smallest current tally.

    Ties go to the candidate that was lower at the most recent earlier round
    where the tied candidates differ; a tie that survives the whole history
    eliminates the candidate listed first on the ballot paper.
    """
    low = min(history[c][-1] for c in standing)
    tied = [c for c in standing if history[c][-1] == low]
    rounds = min(len(history[c]) for c in tied)
    back = 2
    while len(tied) > 1 and back <= rounds:
        low = min(history[c][-back] for c in tied)
        tied = [c for c in tied if history[c][-back] == low]
        back += 1
    return min(tied, key=order.__getitem__)


def select_election(
    pending: Sequence[str],
    attained: Mapping[str, int],
    tallies: Mapping[str, int],
    order: Mapping[str, int],
) -> str:
    """Next candidate to seat among those holding a quota.

    Earlier quota attainment wins, then the larger surplus, then ballot-paper
    order.
    """
    return min(pending, key=lambda c: (attained[c], -tallies[c], order[c]))


# A parcel is a group of identical papers: (ballot class, position in its
# candidate ranking, value per paper, number of papers). Plain tuples keep the
# oracle's brute force affordable.


class OpenRanking(tuple):
    """A ranking decided only up to its current length.

    Reading past the end raises :class:`Undecided` instead of exhausting the
    paper, which lets the oracle explore completions lazily.
    """

    __slots__ = ()


class Undecided(Exception):
    def __init__(self, ballot: int):
        super().__init__(ballot)
        self.ballot = ballot


def _next_position(ranking, pos, eligible):
    for j in range(pos + 1, len(ranking)):
        if ranking[j] in eligible:
            return j
    if type(ranking) is OpenRanking:
        raise Undecided(-1)
    return -1


def distribute(parcels, rankings, eligible, value=None):
    """Pass parcels on to the next eligible preference.

    With ``value`` set every paper leaves at that value (surplus transfer);
    otherwise papers keep their current value (elimination). Returns
    ``(moved, exhausted)`` where ``moved`` maps candidates to received parcels
    and ``exhausted`` is the total value that left the count.
    """
    moved: dict[str, list] = {}
    exhausted = ZERO
    for cls, pos, v, n in parcels:
        out = v if value is None else value
        ranking = rankings[cls]
        try:
            j = _next_position(ranking, pos, eligible)
        except Undecided:
            raise Undecided(cls) from None
        if j < 0:
            exhausted += out * n
        else:
            moved.setdefault(ranking[j], []).append((cls, j, out, n))
    return moved, exhausted


def _pile_value(parcels):
    return sum((v * n for _, _, v, n in parcels), ZERO)


def _floor(x: Fraction) -> int:
    return x.numerator // x.denominator


class _Count:
    def __init__(self, contest: Contest, classes, record_piles: bool):
        # classes: (candidate ranking, length of first ATL group or 0, papers)
        self.contest = contest
        self.record_piles = record_piles
        self.order = {c: i for i, c in enumerate(contest.candidates)}
        self.rankings = [r for r, _, _ in classes]
        self.first_group_len = [g for _, g, _ in classes]
        self.total = sum(n for _, _, n in classes)
        self.quota = compute_quota(self.total, contest.seats)
        self.piles = {c: [] for c in contest.candidates}
        for i, (ranking, _, n) in enumerate(classes):
            self.piles[ranking[0]].append((i, 0, ONE, n))
        self.standing = list(contest.candidates)
        self.values = {c: _pile_value(p) for c, p in self.piles.items()}
        self.tallies = {c: _floor(v) for c, v in self.values.items()}
        self.history = {c: [self.tallies[c]] for c in contest.candidates}
        self.pending: list[str] = []
        self.attained: dict[str, int] = {}
        self.events: list[RoundEvent] = []
        self.seated: list[str] = []
        self.increases: list[ValueIncrease] = []
        self.round = 1
        self._note_quotas()

    def _note_quotas(self):
        for c in self.standing:
            if c not in self.attained and self.tallies[c] >= self.quota:
                self.attained[c] = self.round
                self.pending.append(c)

    def _eligible(self):
        return {c for c in self.standing if self.tallies[c] < self.quota}

    def _split(self, c):
        atl_v = btl_v = ZERO
        atl_n = btl_n = 0
        for cls, pos, v, n in self.piles[c]:
            if pos < self.first_group_len[cls]:
                atl_v += v * n
                atl_n += n
            else:
                btl_v += v * n
                btl_n += n
        return PileSummary(atl_v, btl_v, atl_n, btl_n)

    def _record(self, kind, cand, **extra):
        piles = None
        if self.record_piles:
            piles = {c: self._split(c) for c in self.standing}
        self.events.append(RoundEvent(
            round=self.round,
            kind=kind,
            candidate=cand,
            tallies={c: self.tallies[c] for c in self.standing},
            values={c: self.values[c] for c in self.standing},
            piles=piles,
            **extra,
        ))

    def _receive(self, moved):
        for c, parcels in moved.items():
            self.piles[c].extend(parcels)
            self.values[c] += _pile_value(parcels)
            self.tallies[c] = _floor(self.values[c])

    def _advance(self):
        self.round += 1
        for c in self.standing:
            self.history[c].append(self.tallies[c])
        self._note_quotas()

    def _remove(self, c):
        self.standing.remove(c)
        if c in self.pending:
            self.pending.remove(c)

    def run(self) -> CountLog:
        seats_left = self.contest.seats
        while seats_left > 0:
            if len(self.standing) <= seats_left:
                rest = sorted(
                    self.standing,
                    key=lambda c: (self.attained.get(c, self.round + 1), -self.tallies[c], self.order[c]),
                )
                for c in rest:
                    self._record(EventKind.SEAT, c, has_quota=self.tallies[c] >= self.quota)
                    self.seated.append(c)
                    self._remove(c)
                    seats_left -= 1
                    self._advance()
                break
            if self.pending:
                c = select_election(self.pending, self.attained, self.tallies, self.order)
                seats_left -= 1
                self._elect(c, distribute_surplus=seats_left > 0)
            else:
                c = select_elimination(self.standing, self.history, self.order)
                self._eliminate(c)
            self._advance()
        return CountLog(
            contest=self.contest.name,
            seats=self.contest.seats,
            total_papers=self.total,
            quota=self.quota,
            events=tuple(self.events),
            seated=tuple(self.seated),
            value_increases=tuple(self.increases),
        )

    def _elect(self, c, distribute_surplus):
        parcels = self.piles[c]
        papers = sum(n for *_, n in parcels)
        if not distribute_surplus:
            self._record(EventKind.ELECT, c, has_quota=True)
            self.seated.append(c)
            self._remove(c)
            return
        tau = compute_transfer_value(self.tallies[c], self.quota, papers)
        loss = self.values[c] - self.tallies[c]
        eligible = self._eligible()
        eligible.discard(c)
        moved, exhausted = distribute(parcels, self.rankings, eligible, value=tau)
        self._record(EventKind.ELECT, c, transfer_value=tau, has_quota=True,
                     exhausted=exhausted, rounding_loss=loss)
        self._note_increases(parcels, tau, eligible)
        self.seated.append(c)
        self._remove(c)
        self.piles[c] = []
        self._receive(moved)

    def _note_increases(self, parcels, tau, eligible):
        # only papers that actually reach another candidate count
        gained = {}
        for cls, pos, v, n in parcels:
            if v < tau and _next_position(self.rankings[cls], pos, eligible) >= 0:
                gained[(cls, v)] = gained.get((cls, v), 0) + n
        for (cls, v), n in sorted(gained.items()):
            self.increases.append(ValueIncrease(cls, self.round, v, tau, n))

    def _eliminate(self, c):
        eligible = self._eligible()
        eligible.discard(c)
        moved, exhausted = distribute(self.piles[c], self.rankings, eligible)
        self._record(EventKind.ELIMINATE, c, exhausted=exhausted)
        self._remove(c)
        self.piles[c] = []
        self._receive(moved)


def prepare(contest: Contest, ballots: Iterable[Ballot]) -> list[tuple]:
    """Validate ballots and convert them to ``(ranking, first group length, papers)``."""
    classes = []
    for i, b in enumerate(ballots):
        problems = validate_ballot(b, contest)
        if problems:
            raise BallotError(f"ballot {i}: " + "; ".join(problems))
        group_len = len(contest.group(b.prefs[0]).members) if b.kind is BallotKind.ATL else 0
        classes.append((candidate_ranking(b, contest), group_len, b.multiplicity))
    return classes


def count_prepared(contest: Contest, classes, *, record_piles: bool = False) -> CountLog:
    """Run the count on ballot classes already produced by :func:`prepare`.

    Rankings may be :class:`OpenRanking`; the count then raises
    :class:`Undecided` carrying the class index as soon as it needs a
    preference that has not been decided.
    """
    return _Count(contest, classes, record_piles).run()


def tabulate(contest: Contest, ballots: Iterable[Ballot], *, record_piles: bool = False) -> CountLog:
    """Run the count and return the complete round log.

    With ``record_piles`` each event also carries the ATL/BTL split of every
    continuing candidate's pile at the start of that round.
    """
    return _Count(contest, prepare(contest, ballots), record_piles).run()


def detect_value_increases(log: CountLog) -> tuple[ValueIncrease, ...]:
    """Ballot classes whose papers were passed on at a higher value than they arrived with."""
    return log.value_increases


def seated_candidates(contest: Contest, ballots: Iterable[Ballot]) -> tuple[str, ...]:
    return tabulate(contest, ballots).seated
