"""Interval bounds on candidate tallies given only first-preference counts.

Starting from exact per-candidate counts of ATL and BTL first preferences,
the analyzer replays a reported sequence of elections and eliminations and
keeps, for every continuing candidate, lower and upper bounds on

* the value of ATL papers still inside the first group they ranked,
* the value of every other paper (BTL papers, and ATL papers that have left
  their first group),
* and the number of papers in each of those two classes.

ATL papers move deterministically down their group, so their bounds can be
tracked from both sides. Everything else may go anywhere or exhaust: it only
ever raises upper bounds. A seating is guaranteed once the candidate's lower
tally bound reaches the quota.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import BallotError, StvError
from .model import Contest, compute_quota

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))

    @classmethod
    def point(cls, x) -> Interval:
        return cls(x, x)

    def __add__(self, other: Interval) -> Interval:
        return Interval(self.lo + other.lo, self.hi + other.hi)

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi

    def contains_interval(self, other: Interval) -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def add(self, lo=ZERO, hi=ZERO) -> Interval:
        return Interval(self.lo + lo, self.hi + hi)

    def clamp(self, cap) -> Interval:
        return Interval(max(ZERO, min(self.lo, cap)), max(ZERO, min(self.hi, cap)))

    def __repr__(self):
        return f"[{self.lo}, {self.hi}]"


@dataclass(frozen=True)
class CandidateBounds:
    atl_value: Interval
    btl_value: Interval
    atl_papers: Interval
    btl_papers: Interval

    @classmethod
    def exact(cls, atl: int, btl: int) -> CandidateBounds:
        return cls(Interval.point(atl), Interval.point(btl), Interval.point(atl), Interval.point(btl))

    @property
    def tally(self) -> Interval:
        return self.atl_value + self.btl_value

    @property
    def papers(self) -> Interval:
        return self.atl_papers + self.btl_papers

    def intervals(self) -> tuple[Interval, ...]:
        return (self.atl_value, self.btl_value, self.atl_papers, self.btl_papers)


@dataclass(frozen=True)
class FirstPrefSummary:
    """Per-candidate counts of ATL and BTL papers ranking that candidate first."""

    counts: Mapping[str, tuple[int, int]]

    def __post_init__(self):
        counts = {}
        for c, (atl, btl) in self.counts.items():
            if atl < 0 or btl < 0:
                raise StvError(f"negative first-preference count for {c!r}")
            counts[c] = (int(atl), int(btl))
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return sum(a + b for a, b in self.counts.values())

    @property
    def total_atl(self) -> int:
        return sum(a for a, _ in self.counts.values())

    def atl(self, c: str) -> int:
        return self.counts.get(c, (0, 0))[0]

    def btl(self, c: str) -> int:
        return self.counts.get(c, (0, 0))[1]


@dataclass(frozen=True)
class Event:
    kind: str  # "elect" or "eliminate"
    candidate: str

    def __post_init__(self):
        if self.kind not in ("elect", "eliminate"):
            raise ValueError(f"unknown event kind {self.kind!r}")


def events_from_log(log) -> tuple[Event, ...]:
    """The reported outcome of a count as a sequence of elections and eliminations.

    Candidates seated as the last ones standing are replayed as elections.
    """
    return tuple(
        Event("eliminate" if e.kind.value == "eliminate" else "elect", e.candidate)
        for e in log.events
    )


@dataclass(frozen=True)
class BoundsRound:
    """Bounds at the start of a round, plus what happened in that round once known."""

    round: int
    bounds: Mapping[str, CandidateBounds]
    quota: int
    total_papers: int
    total_atl_papers: int
    event: Event | None = None
    surplus: Interval | None = None
    transfer_value: Interval | None = None


@dataclass(frozen=True)
class GuaranteeReport:
    quota: int
    events: tuple[Event, ...]
    flags: tuple[bool, ...]
    prefix_length: int
    trace: tuple[BoundsRound, ...] = field(repr=False)
    literal_elimination_papers: bool = False

    @property
    def guaranteed(self) -> tuple[str, ...]:
        """Candidates in the guaranteed prefix, in the order they were seated."""
        return tuple(e.candidate for e in self.events[: self.prefix_length])


def init_bounds(summary: FirstPrefSummary, contest: Contest) -> BoundsRound:
    """Round-one bounds: every interval collapses to the known first-preference count."""
    for c in summary.counts:
        if not contest.has_candidate(c):
            raise StvError(f"summary names unknown candidate {c!r}")
    total = summary.total
    return BoundsRound(
        round=1,
        bounds={c: CandidateBounds.exact(summary.atl(c), summary.btl(c)) for c in contest.candidates},
        quota=compute_quota(total, contest.seats),
        total_papers=total,
        total_atl_papers=summary.total_atl,
    )


def _check_present(state: BoundsRound, candidate: str):
    if candidate not in state.bounds:
        raise StvError(f"candidate {candidate!r} is not continuing at round {state.round}")


def _route_atl(state: BoundsRound, e: str, contest: Contest):
    """Where ATL papers leaving ``e`` can land inside ``e``'s group.

    Returns ``(definite, maybe, may_leave)``. ``definite`` is the member that
    receives them for certain (lower and upper bounds grow), ``maybe`` lists
    members that might receive them (upper bounds only), and ``may_leave``
    says the papers might pass beyond the group. Members already removed are
    skipped; a member certain to hold a quota is skipped; a member that might
    hold one makes the destination uncertain.
    """
    q = state.quota
    maybe = []
    for m in contest.later_group_members(e):
        if m not in state.bounds:
            continue
        t = state.bounds[m].tally
        if t.lo >= q:
            continue
        if t.hi < q:
            if maybe:
                return None, maybe + [m], False
            return m, [], False
        maybe.append(m)
    return None, maybe, True


def _clamp(state: BoundsRound, b: CandidateBounds) -> CandidateBounds:
    total, atl = state.total_papers, state.total_atl_papers
    return CandidateBounds(
        b.atl_value.clamp(atl),
        b.btl_value.clamp(total),
        b.atl_papers.clamp(atl),
        b.btl_papers.clamp(total),
    )


def _apply(state, removed, atl_add, btl_add, event, surplus=None, tau=None):
    """Build the next round from per-candidate increments.

    ``atl_add[c]`` holds ``(value_lo, value_hi, papers_lo, papers_hi)``;
    ``btl_add[c]`` holds ``(value_hi, papers_hi)`` since BTL lower bounds never move.
    """
    nxt = {}
    for c, b in state.bounds.items():
        if c == removed:
            continue
        vlo, vhi, plo, phi = atl_add.get(c, (ZERO, ZERO, 0, 0))
        bvhi, bphi = btl_add.get(c, (ZERO, 0))
        nb = CandidateBounds(
            b.atl_value.add(vlo, vhi),
            b.btl_value.add(ZERO, bvhi),
            b.atl_papers.add(plo, phi),
            b.btl_papers.add(0, bphi),
        )
        nxt[c] = _clamp(state, nb)
    applied = replace(state, event=event, surplus=surplus, transfer_value=tau)
    following = replace(state, round=state.round + 1, bounds=nxt, event=None, surplus=None, transfer_value=None)
    return applied, following


def _add_btl(btl_add, recipients, value, papers):
    for c in recipients:
        v, p = btl_add.get(c, (ZERO, 0))
        btl_add[c] = (v + value, p + papers)


def _elect(state: BoundsRound, e: str, contest: Contest):
    _check_present(state, e)
    q = state.quota
    b = state.bounds[e]
    t, p = b.tally, b.papers
    s_lo = max(ZERO, t.lo - q)
    s_hi = max(ZERO, t.hi - q)
    tau_lo = min(ONE, s_lo / p.hi) if p.hi > 0 else ZERO
    if p.lo > 0:
        tau_hi = min(ONE, s_hi / p.lo)
    else:
        tau_hi = ONE if s_hi > 0 else ZERO
    tau = Interval(tau_lo, tau_hi)

    # receivers are judged on bounds at the start of the round
    open_ = [c for c, cb in state.bounds.items() if c != e and cb.tally.lo < q]
    atl_add, btl_add = {}, {}
    _add_btl(btl_add, open_, tau_hi * b.btl_papers.hi, b.btl_papers.hi)

    definite, maybe, may_leave = _route_atl(state, e, contest)
    atl_hi_value = tau_hi * b.atl_papers.hi
    if definite is not None:
        atl_add[definite] = (
            Fraction(math.floor(tau_lo * b.atl_papers.lo)),
            atl_hi_value,
            b.atl_papers.lo,
            b.atl_papers.hi,
        )
    for m in maybe:
        atl_add[m] = (ZERO, atl_hi_value, 0, b.atl_papers.hi)
    if may_leave:
        _add_btl(btl_add, open_, atl_hi_value, b.atl_papers.hi)
    return _apply(state, e, atl_add, btl_add, Event("elect", e), Interval(s_lo, s_hi), tau)


def _eliminate(state: BoundsRound, e: str, contest: Contest, literal_papers: bool):
    _check_present(state, e)
    b = state.bounds[e]
    others = [c for c in state.bounds if c != e]
    atl_add, btl_add = {}, {}
    paper_hi = b.atl_papers.hi if literal_papers else b.btl_papers.hi
    _add_btl(btl_add, others, b.btl_value.hi, paper_hi)

    definite, maybe, may_leave = _route_atl(state, e, contest)
    if definite is not None:
        atl_add[definite] = (b.atl_value.lo, b.atl_value.hi, b.atl_papers.lo, b.atl_papers.hi)
    for m in maybe:
        atl_add[m] = (ZERO, b.atl_value.hi, 0, b.atl_papers.hi)
    if may_leave:
        _add_btl(btl_add, others, b.atl_value.hi, b.atl_papers.hi)
    return _apply(state, e, atl_add, btl_add, Event("eliminate", e))


def elect_update(state: BoundsRound, elected: str, contest: Contest) -> BoundsRound:
    """Bounds at the start of the next round after ``elected`` is seated and their surplus passed on."""
    return _elect(state, elected, contest)[1]


def eliminate_update(
    state: BoundsRound, eliminated: str, contest: Contest, *, literal_papers: bool = False
) -> BoundsRound:
    """Bounds at the start of the next round after ``eliminated`` is excluded.

    ``literal_papers`` selects the variant update that grows BTL paper
    upper bounds by the eliminated candidate's ATL paper count instead of its
    BTL paper count. It is kept for comparison only; it is not sound.
    """
    return _eliminate(state, eliminated, contest, literal_papers)[1]


def transfer_bounds(state: BoundsRound, elected: str, contest: Contest) -> tuple[Interval, Interval]:
    """Surplus and transfer-value intervals for electing ``elected`` in ``state``."""
    applied, _ = _elect(state, elected, contest)
    return applied.surplus, applied.transfer_value


def analyze(
    summary: FirstPrefSummary,
    events: Iterable[Event],
    contest: Contest,
    *,
    literal_elimination_papers: bool = False,
) -> GuaranteeReport:
    """Replay ``events`` through the bound updates and flag guaranteed seatings.

    An election is flagged when the candidate's lower tally bound reaches the
    quota at the start of its round. The guaranteed prefix is the leading run
    of flagged elections; it ends at the first elimination or unflagged
    election even if later elections are flagged.
    """
    events = tuple(events)
    seen = set()
    for ev in events:
        if not contest.has_candidate(ev.candidate):
            raise BallotError(f"event names unknown candidate {ev.candidate!r}")
        if ev.candidate in seen:
            raise StvError(f"candidate {ev.candidate!r} appears in more than one event")
        seen.add(ev.candidate)
    state = init_bounds(summary, contest)
    trace, flags = [], []
    for ev in events:
        if ev.kind == "elect":
            _check_present(state, ev.candidate)
            flags.append(state.bounds[ev.candidate].tally.lo >= state.quota)
            applied, state = _elect(state, ev.candidate, contest)
        else:
            flags.append(False)
            applied, state = _eliminate(state, ev.candidate, contest, literal_elimination_papers)
        trace.append(applied)
    prefix = 0
    for ev, ok in zip(events, flags):
        if ev.kind != "elect" or not ok:
            break
        prefix += 1
    return GuaranteeReport(
        quota=trace[0].quota if trace else state.quota,
        events=events,
        flags=tuple(flags),
        prefix_length=prefix,
        trace=tuple(trace),
        literal_elimination_papers=literal_elimination_papers,
    )


def containment_violations(report: GuaranteeReport, log) -> list[str]:
    """Compare a count log recorded with piles against the analyzer's bounds.

    Returns human-readable descriptions of every engine quantity that falls
    outside its interval, every inverted interval and every broken clamp.
    Empty means the bounds contained the count.
    """
    problems = []
    for br, ev in zip(report.trace, log.events):
        if ev.piles is None:
            raise ValueError("log was not recorded with piles")
        total, atl = br.total_papers, br.total_atl_papers
        for c, b in br.bounds.items():
            for name, iv, cap in zip(
                ("atl_value", "btl_value", "atl_papers", "btl_papers"),
                b.intervals(),
                (atl, total, atl, total),
            ):
                if not (0 <= iv.lo <= iv.hi <= cap):
                    problems.append(f"round {br.round} {c} {name} interval {iv} breaks 0 <= lo <= hi <= {cap}")
            pile = ev.piles.get(c)
            if pile is None:
                problems.append(f"round {br.round}: {c} has bounds but is not continuing in the count")
                continue
            actual = (pile.atl_value, pile.btl_value, pile.atl_papers, pile.btl_papers)
            for name, iv, x in zip(("atl_value", "btl_value", "atl_papers", "btl_papers"), b.intervals(), actual):
                if x not in iv:
                    problems.append(f"round {br.round} {c} {name} = {x} outside {iv}")
            if ev.tallies[c] not in b.tally:
                problems.append(f"round {br.round} {c} tally {ev.tallies[c]} outside {b.tally}")
    return problems
