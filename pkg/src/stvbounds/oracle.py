"""Brute-force check of guaranteed seatings on tiny contests.

Each first-preference pile (the ATL papers of a group head, or the BTL papers
of one candidate) is assumed to hold a single ranking. A *completion* picks a
continuation for every pile: ATL piles continue over the other declared
groups, BTL piles over the other candidates, and any continuation may stop
early, so papers can exhaust. Guarantees derived from first preferences must
hold in every completion.

Verification explores completions as a prefix tree. The count is run on
partially decided rankings; whenever it needs a preference that has not been
decided yet it branches on every possibility (stop here, or each unused
option). A leaf therefore stands for every completion extending its decided
prefixes, all of which produce the same count, and the number of such
completions is known exactly. ``brute_force=True`` instead runs the count on
each completion separately.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator

from .bounds import FirstPrefSummary, GuaranteeReport, analyze, containment_violations, events_from_log
from .engine import OpenRanking, Undecided, count_prepared, prepare
from .errors import EnumerationLimitError, StvError
from .model import Ballot, BallotKind, Contest

DEFAULT_MAX_CANDIDATES = 6
DEFAULT_MAX_GROUPS = 2
DEFAULT_MAX_COMPLETIONS = 10**6


def continuations(r: int) -> int:
    """Number of ordered selections (of any length, including none) from ``r`` items."""
    return sum(math.perm(r, k) for k in range(r + 1))


@dataclass(frozen=True)
class Pile:
    kind: BallotKind
    head: str  # group id for ATL piles, candidate id for BTL piles
    options: tuple[str, ...]  # what the continuation may rank, in ballot-paper order
    papers: int

    @property
    def completions(self) -> int:
        return continuations(len(self.options))


@dataclass(frozen=True)
class CompletionSpace:
    contest: Contest
    summary: FirstPrefSummary
    max_candidates: int = DEFAULT_MAX_CANDIDATES
    max_groups: int = DEFAULT_MAX_GROUPS
    max_completions: int = DEFAULT_MAX_COMPLETIONS

    @property
    def piles(self) -> tuple[Pile, ...]:
        contest = self.contest
        group_ids = [g.id for g in contest.groups]
        out = []
        for c in contest.candidates:
            atl, btl = self.summary.atl(c), self.summary.btl(c)
            if atl:
                group = contest.group_of(c)
                if not contest.has_group(group.id) or not contest.is_group_head(c):
                    raise StvError(f"ATL first preferences for {c!r}, who does not head a declared group")
                out.append(Pile(BallotKind.ATL, group.id, tuple(g for g in group_ids if g != group.id), atl))
            if btl:
                out.append(Pile(BallotKind.BTL, c, tuple(x for x in contest.candidates if x != c), btl))
        return tuple(out)

    @property
    def size(self) -> int:
        return math.prod(p.completions for p in self.piles)

    def check_limits(self) -> None:
        """Refuse spaces beyond the declared limits; nothing is ever silently truncated.

        The group limit counts declared groups with more than one member.
        """
        contest = self.contest
        if len(contest.candidates) > self.max_candidates:
            raise EnumerationLimitError(
                f"{len(contest.candidates)} candidates exceeds the limit of {self.max_candidates}"
            )
        multi = sum(1 for g in contest.groups if len(g.members) > 1)
        if multi > self.max_groups:
            raise EnumerationLimitError(f"{multi} multi-member groups exceeds the limit of {self.max_groups}")
        if self.size > self.max_completions:
            raise EnumerationLimitError(f"{self.size} completions exceeds the limit of {self.max_completions}")


def _pile_sequences(pile: Pile) -> list[tuple[str, ...]]:
    seqs = []
    for k in range(len(pile.options) + 1):
        seqs.extend(itertools.permutations(pile.options, k))
    return seqs


def _ballot(pile: Pile, tail) -> Ballot:
    return Ballot(pile.kind, (pile.head, *tail), pile.papers)


def enumerate_completions(space: CompletionSpace) -> Iterator[tuple[Ballot, ...]]:
    """Yield every completion as a tuple of ballots, one per pile, in a fixed order."""
    space.check_limits()
    piles = space.piles
    for tails in itertools.product(*(_pile_sequences(p) for p in piles)):
        yield tuple(_ballot(p, t) for p, t in zip(piles, tails))


@dataclass(frozen=True)
class Verdict:
    confirmed: bool
    completions: int
    guaranteed: tuple[str, ...]
    counterexample: tuple[Ballot, ...] | None = None
    unseated: tuple[str, ...] = ()
    leaves: int = 0  # counts actually run

    def __str__(self) -> str:
        if self.confirmed:
            return f"confirmed ({self.completions} completions)"
        return f"counterexample: {', '.join(self.unseated)} not seated"


class _Tree:
    """Prefix-tree exploration of a completion space."""

    def __init__(self, space: CompletionSpace):
        self.contest = space.contest
        self.piles = space.piles

    def _expand(self, pile: Pile, tail) -> tuple[str, ...]:
        if pile.kind is BallotKind.ATL:
            out = []
            for gid in (pile.head, *tail):
                out.extend(self.contest.group(gid).members)
            return tuple(out)
        return (pile.head, *tail)

    def _classes(self, tails, closed):
        classes = []
        for pile, tail, done in zip(self.piles, tails, closed):
            ranking = self._expand(pile, tail)
            if not done:
                ranking = OpenRanking(ranking)
            group_len = len(self.contest.group(pile.head).members) if pile.kind is BallotKind.ATL else 0
            classes.append((ranking, group_len, pile.papers))
        return classes

    def leaves(self):
        """Yield ``(tails, closed, weight, log)`` for every leaf, depth first."""
        n = len(self.piles)
        stack = [(tuple(() for _ in range(n)), (False,) * n)]
        while stack:
            tails, closed = stack.pop()
            try:
                log = count_prepared(self.contest, self._classes(tails, closed), record_piles=self.record_piles)
            except Undecided as need:
                k = need.ballot
                pile = self.piles[k]
                children = [(tails, closed[:k] + (True,) + closed[k + 1:])]
                for opt in pile.options:
                    if opt not in tails[k]:
                        children.append((tails[:k] + (tails[k] + (opt,),) + tails[k + 1:], closed))
                stack.extend(reversed(children))
                continue
            weight = 1
            for pile, tail, done in zip(self.piles, tails, closed):
                if not done:
                    weight *= continuations(len(pile.options) - len(tail))
            yield tails, closed, weight, log

    record_piles = False


def verify_guarantees(
    space: CompletionSpace,
    report: GuaranteeReport | tuple[str, ...],
    *,
    brute_force: bool = False,
) -> Verdict:
    """Check that every guaranteed candidate is seated in every completion.

    ``report`` is a guarantee report (its guaranteed prefix is checked) or an
    explicit tuple of candidates. The first failing completion, in the fixed
    exploration order, is returned as the counterexample.
    """
    space.check_limits()
    guaranteed = report.guaranteed if isinstance(report, GuaranteeReport) else tuple(report)
    if isinstance(report, GuaranteeReport):
        expected_quota = space.contest.quota(space.summary.total)
        if report.quota != expected_quota:
            raise StvError(f"report quota {report.quota} does not match the summary's quota {expected_quota}")
    piles = space.piles
    if brute_force:
        total = 0
        for ballots in enumerate_completions(space):
            total += 1
            seated = set(count_prepared(space.contest, prepare(space.contest, ballots)).seated)
            missing = tuple(c for c in guaranteed if c not in seated)
            if missing:
                return Verdict(False, total, guaranteed, ballots, missing, total)
        return Verdict(True, total, guaranteed, leaves=total)

    total = leaves = 0
    for tails, _, weight, log in _Tree(space).leaves():
        total += weight
        leaves += 1
        seated = set(log.seated)
        missing = tuple(c for c in guaranteed if c not in seated)
        if missing:
            # undecided continuations were never read; stopping them is one concrete completion
            ballots = tuple(_ballot(p, t) for p, t in zip(piles, tails))
            return Verdict(False, total, guaranteed, ballots, missing, leaves)
    return Verdict(True, total, guaranteed, leaves=leaves)


def check_containment(space: CompletionSpace, events, *, literal_elimination_papers: bool = False) -> list[str]:
    """Containment check over all completions that reproduce ``events``.

    Returns violation descriptions; empty when every matching completion's
    piles sit inside the analyzer's bounds.
    """
    space.check_limits()
    events = tuple(events)
    report = analyze(space.summary, events, space.contest, literal_elimination_papers=literal_elimination_papers)
    tree = _Tree(space)
    tree.record_piles = True
    problems = []
    for _, _, _, log in tree.leaves():
        if events_from_log(log) == events:
            problems.extend(containment_violations(report, log))
    return problems
