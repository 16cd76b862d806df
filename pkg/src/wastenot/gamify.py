"""Badge engine for the food-saving campaign.

Four badges, earned in order of effort: attempt (first submission),
persistence (a run of consecutive record days), quantity (total records),
and quality (sustained high completion scores). Badges are permanent
achievements: evaluation scans the record stream in submission order and a
badge is earned at the first record whose prefix satisfies the rule, so
appending records can never revoke one. The final reward needs all four.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, datetime, timedelta
from enum import Enum
from typing import Iterable, Mapping, Sequence

from wastenot.domain import CATEGORY_ORDER, FoodCategory, MealRecord, format_utc, parse_utc


class BadgeKind(str, Enum):
    ATTEMPT = "attempt"
    PERSISTENCE = "persistence"
    QUANTITY = "quantity"
    QUALITY = "quality"


BADGE_ORDER: tuple[BadgeKind, ...] = (
    BadgeKind.ATTEMPT,
    BadgeKind.PERSISTENCE,
    BadgeKind.QUANTITY,
    BadgeKind.QUALITY,
)


@dataclass(frozen=True)
class BadgeRuleConfig:
    """Earning thresholds; defaults match the two-week campaign setup."""

    persistence_days: int = 5
    quantity_records: int = 10
    quality_min_avg: float = 90.0
    quality_min_records: int = 5

    def __post_init__(self):
        if self.persistence_days < 1:
            raise ValueError("persistence_days must be >= 1")
        if self.quantity_records < 1:
            raise ValueError("quantity_records must be >= 1")
        if self.quality_min_records < 1:
            raise ValueError("quality_min_records must be >= 1")
        if not 0 < self.quality_min_avg <= 100:
            raise ValueError("quality_min_avg must be in (0, 100]")


@dataclass(frozen=True)
class BadgeProgress:
    earned: bool
    earned_at: datetime | None
    progress: float  # in [0, 1]; exactly 1 once earned


@dataclass(frozen=True)
class BadgeState:
    """Snapshot of one user's badge standing."""

    badges: Mapping[BadgeKind, BadgeProgress]

    @property
    def reward_eligible(self) -> bool:
        return all(self.badges[kind].earned for kind in BADGE_ORDER)

    def to_doc(self) -> dict:
        doc: dict = {}
        for kind in BADGE_ORDER:
            b = self.badges[kind]
            doc[kind.value] = {
                "earned": b.earned,
                "earned_at": format_utc(b.earned_at) if b.earned_at else None,
                "progress": b.progress,
            }
        doc["reward_eligible"] = self.reward_eligible
        return doc

    @classmethod
    def from_doc(cls, doc: Mapping) -> "BadgeState":
        badges = {}
        for kind in BADGE_ORDER:
            b = doc[kind.value]
            badges[kind] = BadgeProgress(
                earned=bool(b["earned"]),
                earned_at=parse_utc(b["earned_at"]) if b.get("earned_at") else None,
                progress=float(b["progress"]),
            )
        return cls(badges=badges)

    @classmethod
    def fresh(cls) -> "BadgeState":
        return cls(
            badges={k: BadgeProgress(earned=False, earned_at=None, progress=0.0) for k in BADGE_ORDER}
        )


def current_streak(record_dates: Iterable[date], as_of: date) -> int:
    """Consecutive-day run ending at the latest record date on or before as_of.

    The run ends at the latest *record* date, not at as_of, so a streak is
    not forfeited merely by evaluating on a later day. No records: 0.
    """
    dates = {d for d in record_dates if d <= as_of}
    if not dates:
        return 0
    day = max(dates)
    run = 0
    while day in dates:
        run += 1
        day -= timedelta(days=1)
    return run


def best_run(record_dates: Iterable[date]) -> int:
    """Longest run of consecutive calendar dates anywhere in the set."""
    dates = set(record_dates)
    best = 0
    for d in dates:
        if d - timedelta(days=1) in dates:
            continue  # not a run start
        length = 1
        while d + timedelta(days=length) in dates:
            length += 1
        best = max(best, length)
    return best


def evaluate_badges(
    records: Sequence[MealRecord],
    rules: BadgeRuleConfig,
    as_of: date,
) -> BadgeState:
    """Evaluate all four badges over one user's campaign records.

    Earned flags come from a prefix scan in submission order: each badge is
    earned at the first record whose prefix satisfies its rule, with
    earned_at taken from that record. Because prefixes only grow, earned
    badges are never revoked by later records (quality in particular may
    stop holding on the full set once the mean dips, but the badge stays).

    Progress is computed on the full record set: counts toward the
    quantity/attempt thresholds, the live streak for persistence, and the
    volume-times-quality product for quality. Earned badges pin at 1.
    """
    ordered = sorted(records, key=lambda r: (r.submitted_at, r.record_id))

    earned_at: dict[BadgeKind, datetime] = {}
    count = 0
    overall_sum = 0.0
    dates: set[date] = set()
    for record in ordered:
        count += 1
        overall_sum += record.overall
        dates.add(record.local_date)
        if BadgeKind.ATTEMPT not in earned_at and count >= 1:
            earned_at[BadgeKind.ATTEMPT] = record.submitted_at
        if (
            BadgeKind.PERSISTENCE not in earned_at
            and best_run(dates) >= rules.persistence_days
        ):
            earned_at[BadgeKind.PERSISTENCE] = record.submitted_at
        if BadgeKind.QUANTITY not in earned_at and count >= rules.quantity_records:
            earned_at[BadgeKind.QUANTITY] = record.submitted_at
        if (
            BadgeKind.QUALITY not in earned_at
            and count >= rules.quality_min_records
            and overall_sum / count >= rules.quality_min_avg
        ):
            earned_at[BadgeKind.QUALITY] = record.submitted_at

    total = len(ordered)
    mean_overall = overall_sum / total if total else 0.0
    progress = {
        BadgeKind.ATTEMPT: min(1.0, float(total)),
        BadgeKind.PERSISTENCE: min(
            1.0, current_streak(dates, as_of) / rules.persistence_days
        ),
        BadgeKind.QUANTITY: min(1.0, total / rules.quantity_records),
        BadgeKind.QUALITY: min(
            1.0,
            max(
                0.0,
                (total / rules.quality_min_records)
                * min(1.0, mean_overall / rules.quality_min_avg),
            ),
        ),
    }

    badges = {}
    for kind in BADGE_ORDER:
        if kind in earned_at:
            badges[kind] = BadgeProgress(earned=True, earned_at=earned_at[kind], progress=1.0)
        else:
            badges[kind] = BadgeProgress(earned=False, earned_at=None, progress=progress[kind])
    return BadgeState(badges=badges)


def badge_earner_counts(states: Iterable[BadgeState]) -> dict[BadgeKind, int]:
    """How many users hold each badge."""
    counts = {kind: 0 for kind in BADGE_ORDER}
    for state in states:
        for kind in BADGE_ORDER:
            if state.badges[kind].earned:
                counts[kind] += 1
    return counts


@dataclass(frozen=True)
class CommunityAverages:
    """Unweighted per-category means over every record in the store."""

    per_category: Mapping[FoodCategory, float]
    overall: float
    no_data: bool

    def to_doc(self) -> dict:
        doc = {c.value: self.per_category[c] for c in CATEGORY_ORDER}
        doc["overall"] = self.overall
        doc["no_data"] = self.no_data
        return doc


def community_averages(records: Sequence[MealRecord]) -> CommunityAverages:
    if not records:
        return CommunityAverages(
            per_category={c: 0.0 for c in CATEGORY_ORDER}, overall=0.0, no_data=True
        )
    n = len(records)
    per_category = {
        cat: sum(r.scores.get(cat) for r in records) / n for cat in CATEGORY_ORDER
    }
    overall = sum(r.overall for r in records) / n
    return CommunityAverages(per_category=per_category, overall=overall, no_data=False)
