"""Dashboard aggregation.

Per-tray waste weight comes from the regression model; each tray is
classified into one of three severity levels. The Daily payload allocates
the day's trays onto 100 bowl cells (one cell per 1% of meals) and renders
the waste-type split as integer percentages; the Monthly payload carries
per-day severity tray counts. Both apportionments use the largest-remainder
method so the totals are exact and reproducible.

The job runner recomputes and caches these payloads per date; a small
scheduler thread triggers it once a day for the previous campaign day.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass
from datetime import date, datetime, time, timedelta
from enum import Enum
from fractions import Fraction
from typing import Callable, Mapping, Sequence
from zoneinfo import ZoneInfo

from wastenot.domain import CATEGORY_ORDER, FoodCategory, format_utc, parse_utc, utc_now
from wastenot.estimator import LinearModel, predict
from wastenot.ingest import TrayObservation

logger = logging.getLogger(__name__)


class SeverityLevel(str, Enum):
    SEVERE = "severe"
    MEDIUM = "medium"
    LIGHT = "light"

    @property
    def rank(self) -> int:
        """Ordering for monotonicity checks: light(0) < medium(1) < severe(2)."""
        return _RANK[self]


_RANK = {SeverityLevel.LIGHT: 0, SeverityLevel.MEDIUM: 1, SeverityLevel.SEVERE: 2}

#: Display order: worst first. Also the remainder tie-break priority.
SEVERITY_ORDER: tuple[SeverityLevel, ...] = (
    SeverityLevel.SEVERE,
    SeverityLevel.MEDIUM,
    SeverityLevel.LIGHT,
)


class AllZero(ValueError):
    def __init__(self):
        super().__init__("cannot split percentages when every value is zero")


class MixedMonths(ValueError):
    pass


@dataclass(frozen=True)
class SeverityThresholds:
    """Grams of leftover per tray at which waste counts as medium / severe."""

    medium_min_g: float = 50.0
    severe_min_g: float = 150.0

    def __post_init__(self):
        if not 0 < self.medium_min_g < self.severe_min_g:
            raise ValueError("thresholds must satisfy 0 < medium_min_g < severe_min_g")


def classify_severity(waste_g: float, thresholds: SeverityThresholds) -> SeverityLevel:
    """severe at >= severe_min_g, medium at >= medium_min_g, light below."""
    if waste_g < 0:
        raise ValueError("waste_g must be >= 0")
    if waste_g >= thresholds.severe_min_g:
        return SeverityLevel.SEVERE
    if waste_g >= thresholds.medium_min_g:
        return SeverityLevel.MEDIUM
    return SeverityLevel.LIGHT


def largest_remainder(values: Sequence[float | int], units: int) -> list[int]:
    """Apportion `units` integer parts proportionally to `values`.

    Classic largest-remainder rounding: floor every exact quota, then hand
    the leftover units to the largest fractional remainders. Ties break
    toward the earliest position, so callers encode priority by argument
    order. Exact rational arithmetic keeps ties and the sum exact.
    """
    if any(v < 0 for v in values):
        raise ValueError("values must be >= 0")
    total = sum(Fraction(v) for v in values)
    if total == 0:
        raise AllZero()
    quotas = [Fraction(v) * units / total for v in values]
    floors = [int(q) for q in quotas]
    leftover = units - sum(floors)
    by_remainder = sorted(range(len(values)), key=lambda i: (floors[i] - quotas[i], i))
    allocation = floors[:]
    for i in by_remainder[:leftover]:
        allocation[i] += 1
    return allocation


BOWL_COUNT = 100


def allocate_bowls(
    severity_counts: Mapping[SeverityLevel, int], total: int
) -> list[SeverityLevel]:
    """Allocate the 100 bowl cells across severity levels, worst first.

    Each cell stands for 1% of the day's meals. Remainder ties break in
    severity order (severe, then medium, then light); the returned list is
    grouped severe-first so the grid reads worst-to-best.
    """
    if total <= 0:
        raise ValueError("total must be > 0")
    counts = [severity_counts.get(level, 0) for level in SEVERITY_ORDER]
    if sum(counts) != total:
        raise ValueError(f"severity counts {counts} do not sum to total {total}")
    cells = largest_remainder(counts, BOWL_COUNT)
    bowls: list[SeverityLevel] = []
    for level, n in zip(SEVERITY_ORDER, cells):
        bowls.extend([level] * n)
    return bowls


def integer_percent(values: Mapping[FoodCategory, float]) -> dict[FoodCategory, int]:
    """Split per-category magnitudes into integer percentages summing to 100.

    Remainder ties break in the fixed category order (rice, meat,
    vegetables). Raises AllZero when there is nothing to split.
    """
    ordered = [values.get(cat, 0.0) for cat in CATEGORY_ORDER]
    allocation = largest_remainder(ordered, 100)
    return dict(zip(CATEGORY_ORDER, allocation))


@dataclass
class DailyAggregate:
    """Cached payload behind the Daily dashboard page."""

    day: date
    total_trays: int
    severity_counts: dict[SeverityLevel, int]
    bowls: list[SeverityLevel]
    type_percent: dict[FoodCategory, int]
    total_waste_g: float
    computed_at: datetime

    def to_doc(self) -> dict:
        return {
            "date": self.day.isoformat(),
            "total_trays": self.total_trays,
            "severity_counts": {l.value: self.severity_counts[l] for l in SEVERITY_ORDER},
            "bowls": [l.value for l in self.bowls],
            "type_percent": {c.value: self.type_percent[c] for c in CATEGORY_ORDER},
            "total_waste_g": self.total_waste_g,
            "computed_at": format_utc(self.computed_at),
        }

    @classmethod
    def from_doc(cls, doc: Mapping) -> "DailyAggregate":
        return cls(
            day=date.fromisoformat(doc["date"]),
            total_trays=int(doc["total_trays"]),
            severity_counts={l: int(doc["severity_counts"][l.value]) for l in SEVERITY_ORDER},
            bowls=[SeverityLevel(v) for v in doc["bowls"]],
            type_percent={c: int(doc["type_percent"][c.value]) for c in CATEGORY_ORDER},
            total_waste_g=float(doc["total_waste_g"]),
            computed_at=parse_utc(doc["computed_at"]),
        )


@dataclass(frozen=True)
class MonthlyEntry:
    day: date
    severity_counts: Mapping[SeverityLevel, int]


@dataclass
class MonthlyAggregate:
    """Cached payload behind the Monthly dashboard page: one bar per day."""

    year: int
    month: int
    entries: list[MonthlyEntry]
    computed_at: datetime

    def to_doc(self) -> dict:
        return {
            "month": f"{self.year:04d}-{self.month:02d}",
            "days": [
                {
                    "date": e.day.isoformat(),
                    "severity_counts": {l.value: e.severity_counts[l] for l in SEVERITY_ORDER},
                }
                for e in self.entries
            ],
            "computed_at": format_utc(self.computed_at),
        }

    @classmethod
    def from_doc(cls, doc: Mapping) -> "MonthlyAggregate":
        year, month = (int(part) for part in doc["month"].split("-"))
        entries = [
            MonthlyEntry(
                day=date.fromisoformat(d["date"]),
                severity_counts={l: int(d["severity_counts"][l.value]) for l in SEVERITY_ORDER},
            )
            for d in doc["days"]
        ]
        return cls(year=year, month=month, entries=entries, computed_at=parse_utc(doc["computed_at"]))


def daily_aggregate(
    day: date,
    observations: Sequence[TrayObservation],
    model: LinearModel,
    thresholds: SeverityThresholds,
    computed_at: datetime | None = None,
) -> DailyAggregate:
    """Compute the Daily payload for one date from its tray observations.

    An empty day yields total_trays 0, an empty bowl list, and all-zero
    type percentages rather than an error: the dashboard still renders.
    """
    for obs in observations:
        if obs.local_date != day:
            raise ValueError(
                f"observation {obs.tray_id} dated {obs.local_date}, expected {day}"
            )
    computed_at = computed_at if computed_at is not None else utc_now()

    severity_counts = {level: 0 for level in SEVERITY_ORDER}
    area_totals = {cat: 0 for cat in CATEGORY_ORDER}
    total_waste_g = 0.0
    for obs in observations:
        waste_g = predict(model, obs.total_area_px)
        total_waste_g += waste_g
        severity_counts[classify_severity(waste_g, thresholds)] += 1
        for cat in CATEGORY_ORDER:
            area_totals[cat] += obs.areas_px[cat]

    total_trays = len(observations)
    if total_trays == 0:
        bowls: list[SeverityLevel] = []
        type_percent = {cat: 0 for cat in CATEGORY_ORDER}
    else:
        bowls = allocate_bowls(severity_counts, total_trays)
        if sum(area_totals.values()) == 0:
            type_percent = {cat: 0 for cat in CATEGORY_ORDER}
        else:
            type_percent = integer_percent(area_totals)

    return DailyAggregate(
        day=day,
        total_trays=total_trays,
        severity_counts=severity_counts,
        bowls=bowls,
        type_percent=type_percent,
        total_waste_g=total_waste_g,
        computed_at=computed_at,
    )


def monthly_aggregate(
    dailies: Sequence[DailyAggregate],
    year: int | None = None,
    month: int | None = None,
    computed_at: datetime | None = None,
) -> MonthlyAggregate:
    """Roll daily severity counts up into one month's trend payload.

    All dailies must share one calendar month (MixedMonths otherwise);
    days without a daily aggregate are simply absent from the entries.
    For an empty input the target (year, month) must be given explicitly.
    """
    months = {(d.day.year, d.day.month) for d in dailies}
    if len(months) > 1:
        raise MixedMonths(f"dailies span multiple months: {sorted(months)}")
    if months:
        found_year, found_month = months.pop()
        if year is not None and (year, month) != (found_year, found_month):
            raise MixedMonths(
                f"dailies belong to {found_year}-{found_month:02d}, not {year}-{month:02d}"
            )
        year, month = found_year, found_month
    elif year is None or month is None:
        raise ValueError("year and month are required when dailies is empty")

    entries = [
        MonthlyEntry(day=d.day, severity_counts=dict(d.severity_counts))
        for d in sorted(dailies, key=lambda d: d.day)
    ]
    return MonthlyAggregate(
        year=year,
        month=month,
        entries=entries,
        computed_at=computed_at if computed_at is not None else utc_now(),
    )


class Aggregator:
    """Computes and caches dashboard aggregates from stored observations.

    run_daily_job is single-flight per date: concurrent invocations for the
    same date serialize on a per-date lock, each reading a consistent
    observation snapshot. Rerunning on unchanged data stores an identical
    value (computed_at aside).
    """

    def __init__(
        self,
        store,
        model: LinearModel,
        thresholds: SeverityThresholds,
        clock: Callable[[], datetime] = utc_now,
    ):
        self._store = store
        self._model = model
        self._thresholds = thresholds
        self._clock = clock
        self._locks: dict[date, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _date_lock(self, day: date) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(day, threading.Lock())

    def run_daily_job(self, day: date) -> DailyAggregate:
        """Recompute and upsert the daily aggregate plus its month's rollup."""
        from wastenot import store as storage

        with self._date_lock(day):
            observations = storage.observations_for_day(self._store, day)
            daily = daily_aggregate(
                day, observations, self._model, self._thresholds, computed_at=self._clock()
            )
            storage.save_daily(self._store, daily)
            dailies = storage.dailies_for_month(self._store, day.year, day.month)
            monthly = monthly_aggregate(
                dailies, year=day.year, month=day.month, computed_at=self._clock()
            )
            storage.save_monthly(self._store, monthly)
            logger.info(
                "daily job %s: %d trays, %.0f g waste",
                day,
                daily.total_trays,
                daily.total_waste_g,
            )
            return daily


class DailyScheduler:
    """Background thread firing run_daily_job once per day.

    Fires at `run_at` local campaign time and aggregates the *previous*
    local day, so a full day of observations is in. Manual invocations via
    the admin endpoint share the Aggregator's per-date locks.
    """

    def __init__(
        self,
        aggregator: Aggregator,
        tz: ZoneInfo,
        run_at: time = time(0, 10),
    ):
        self._aggregator = aggregator
        self._tz = tz
        self._run_at = run_at
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None

    def next_fire(self, now: datetime) -> datetime:
        """First run_at in the campaign timezone strictly after `now`."""
        local_now = now.astimezone(self._tz)
        candidate = datetime.combine(local_now.date(), self._run_at, tzinfo=self._tz)
        if candidate <= local_now:
            candidate = datetime.combine(
                local_now.date() + timedelta(days=1), self._run_at, tzinfo=self._tz
            )
        return candidate

    def start(self):
        if self._thread is not None:
            raise RuntimeError("scheduler already started")
        self._thread = threading.Thread(target=self._loop, name="daily-scheduler", daemon=True)
        self._thread.start()

    def stop(self):
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=5)
            self._thread = None

    def _loop(self):
        while not self._stop.is_set():
            fire_at = self.next_fire(utc_now())
            wait_s = (fire_at - utc_now()).total_seconds()
            if self._stop.wait(timeout=max(0.0, wait_s)):
                return
            target_day = fire_at.astimezone(self._tz).date() - timedelta(days=1)
            try:
                self._aggregator.run_daily_job(target_day)
            except Exception:
                logger.exception("scheduled daily job failed for %s", target_day)
