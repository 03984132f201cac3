"""Australian Senate STV tabulation and first-preference guarantee analysis."""

from .bounds import (
    BoundsRound,
    CandidateBounds,
    Event,
    FirstPrefSummary,
    GuaranteeReport,
    Interval,
    analyze,
    elect_update,
    eliminate_update,
    events_from_log,
    init_bounds,
)
from .engine import CountLog, EventKind, RoundEvent, ValueIncrease, compute_transfer_value, detect_value_increases, tabulate
from .errors import BallotError, ContestError, EnumerationLimitError, ParseError, SchemaError, StvError
from .model import Ballot, BallotKind, Contest, Group, compute_quota, expand_atl, validate_ballot
from .oracle import CompletionSpace, Verdict, enumerate_completions, verify_guarantees
from .pattern import PatternString, compare_pattern, render_pattern

__version__ = "0.1.0"
