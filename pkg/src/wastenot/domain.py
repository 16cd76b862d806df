"""Core domain types shared by every other module.

Everything in here is a plain value: frozen dataclasses, enums, and pure
functions. Timezone policy lives here too — all timestamps are stored UTC
and calendar dates are derived in the single configured campaign timezone.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, datetime, timezone
from enum import Enum
from typing import TYPE_CHECKING, Mapping
from zoneinfo import ZoneInfo

if TYPE_CHECKING:
    from wastenot.aggregate import SeverityThresholds
    from wastenot.gamify import BadgeRuleConfig


class FoodCategory(str, Enum):
    """The three tracked food types, in canonical display order."""

    RICE = "rice"
    MEAT = "meat"
    VEGETABLES = "vegetables"


#: Fixed ordering used everywhere a deterministic category order matters
#: (serialization, remainder tie-breaks, UI layout).
CATEGORY_ORDER: tuple[FoodCategory, ...] = (
    FoodCategory.RICE,
    FoodCategory.MEAT,
    FoodCategory.VEGETABLES,
)


class ScoreError(ValueError):
    """Base class for completion-score validation failures."""


class MissingCategory(ScoreError):
    def __init__(self, category: FoodCategory):
        self.category = category
        super().__init__(f"missing score for category '{category.value}'")


class OutOfRange(ScoreError):
    def __init__(self, category: FoodCategory, value: object):
        self.category = category
        self.value = value
        super().__init__(
            f"score for '{category.value}' must be an integer in [0, 100], got {value!r}"
        )


@dataclass(frozen=True)
class CompletionScores:
    """Self-reported completion percentages, one integer per category."""

    rice: int
    meat: int
    vegetables: int

    def get(self, category: FoodCategory) -> int:
        return getattr(self, category.value)

    def as_dict(self) -> dict[str, int]:
        return {c.value: self.get(c) for c in CATEGORY_ORDER}


def validate_scores(raw: Mapping[str | FoodCategory, object]) -> CompletionScores:
    """Validate a category→integer map into CompletionScores.

    All three categories must be present and each value must be an integer
    in [0, 100]. Unknown keys are ignored. Raises MissingCategory or
    OutOfRange otherwise.
    """
    normalized: dict[FoodCategory, object] = {}
    for key, value in raw.items():
        try:
            cat = key if isinstance(key, FoodCategory) else FoodCategory(key)
        except ValueError:
            continue
        normalized[cat] = value
    values: dict[str, int] = {}
    for cat in CATEGORY_ORDER:
        if cat not in normalized:
            raise MissingCategory(cat)
        value = normalized[cat]
        # bool is an int subclass; reject it explicitly.
        if isinstance(value, bool) or not isinstance(value, int) or not 0 <= value <= 100:
            raise OutOfRange(cat, value)
        values[cat.value] = value
    return CompletionScores(**values)


def overall_completion(scores: CompletionScores) -> float:
    """Arithmetic mean of the three category scores (equal weighting)."""
    return (scores.rice + scores.meat + scores.vegetables) / 3


@dataclass(frozen=True)
class User:
    user_id: str
    email: str
    display_name: str
    password_hash: bytes
    registered_at: datetime

    def to_doc(self) -> dict:
        return {
            "user_id": self.user_id,
            "email": self.email,
            "display_name": self.display_name,
            "password_hash": self.password_hash.hex(),
            "registered_at": format_utc(self.registered_at),
        }

    @classmethod
    def from_doc(cls, doc: Mapping) -> "User":
        return cls(
            user_id=doc["user_id"],
            email=doc["email"],
            display_name=doc["display_name"],
            password_hash=bytes.fromhex(doc["password_hash"]),
            registered_at=parse_utc(doc["registered_at"]),
        )


@dataclass(frozen=True)
class MealRecord:
    """One food-saving action: a finished-meal photo plus its scores."""

    record_id: str
    user_id: str
    submitted_at: datetime
    local_date: date
    scores: CompletionScores
    photo_ref: str

    @property
    def overall(self) -> float:
        return overall_completion(self.scores)

    def to_doc(self) -> dict:
        return {
            "record_id": self.record_id,
            "user_id": self.user_id,
            "submitted_at": format_utc(self.submitted_at),
            "local_date": self.local_date.isoformat(),
            "scores": self.scores.as_dict(),
            "photo_ref": self.photo_ref,
        }

    @classmethod
    def from_doc(cls, doc: Mapping) -> "MealRecord":
        scores = doc["scores"]
        return cls(
            record_id=doc["record_id"],
            user_id=doc["user_id"],
            submitted_at=parse_utc(doc["submitted_at"]),
            local_date=date.fromisoformat(doc["local_date"]),
            scores=CompletionScores(
                rice=scores["rice"], meat=scores["meat"], vegetables=scores["vegetables"]
            ),
            photo_ref=doc["photo_ref"],
        )


@dataclass(frozen=True)
class CampaignConfig:
    """Dates, timezone, tips, and rule settings for one campaign."""

    prereg_start: date
    start_date: date
    end_date: date
    timezone: str
    tips: tuple[str, ...]
    badge_rules: "BadgeRuleConfig"
    severity_thresholds: "SeverityThresholds"

    def __post_init__(self):
        if not self.prereg_start <= self.start_date:
            raise ValueError("prereg_start must not be after start_date")
        if not self.start_date < self.end_date:
            raise ValueError("start_date must be before end_date")
        if not self.tips:
            raise ValueError("tips must be non-empty")
        ZoneInfo(self.timezone)  # raises for unknown zone names

    @property
    def tzinfo(self) -> ZoneInfo:
        return ZoneInfo(self.timezone)

    def in_window(self, day: date) -> bool:
        return self.start_date <= day <= self.end_date

    def campaign_days(self) -> list[date]:
        """Every calendar date of the campaign, start through end inclusive."""
        from datetime import timedelta

        n = (self.end_date - self.start_date).days + 1
        return [self.start_date + timedelta(days=i) for i in range(n)]


def normalize_email(email: str) -> str:
    """Lowercase/trim an email address; raises ValueError for garbage."""
    email = email.strip().lower()
    if "@" not in email or email.startswith("@") or email.endswith("@"):
        raise ValueError(f"not an email address: {email!r}")
    return email


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


def parse_utc(value: str) -> datetime:
    """Parse an RFC 3339 timestamp ('Z' or numeric offset) to aware UTC."""
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    parsed = datetime.fromisoformat(text)
    if parsed.tzinfo is None:
        raise ValueError(f"timestamp missing timezone: {value!r}")
    return parsed.astimezone(timezone.utc)


def format_utc(ts: datetime) -> str:
    """Format an aware timestamp as RFC 3339 UTC with trailing 'Z'."""
    if ts.tzinfo is None:
        raise ValueError("naive timestamps are not allowed")
    ts = ts.astimezone(timezone.utc).replace(tzinfo=None)
    if ts.microsecond:
        return ts.isoformat(timespec="microseconds") + "Z"
    return ts.isoformat(timespec="seconds") + "Z"


def local_date_of(ts: datetime, tz: ZoneInfo) -> date:
    """Calendar date of a UTC timestamp in the campaign timezone."""
    if ts.tzinfo is None:
        raise ValueError("naive timestamps are not allowed")
    return ts.astimezone(tz).date()
