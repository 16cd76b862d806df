"""Tray observation intake.

The canteen return-station feed posts one JSON document per tray with the
leftover pixel area measured for each food category. This module owns that
wire contract (parse + serialize) and a seeded synthetic generator that
stands in for the camera feed during development and simulations.

Wire schema (bit-exact): top-level object with "tray_id" (string),
"timestamp" (RFC 3339 UTC string) and "areas_px" (object with integer
fields "rice", "meat", "vegetables"). Batches are JSON arrays of that
object.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass
from datetime import date, datetime, time, timedelta, timezone
from typing import Mapping, Sequence
from zoneinfo import ZoneInfo

from wastenot.domain import CATEGORY_ORDER, FoodCategory, format_utc, local_date_of, parse_utc

UTC = timezone.utc


class IngestError(ValueError):
    """Base class for tray-feed validation failures."""


class MalformedDocument(IngestError):
    pass


class MissingField(IngestError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"missing field '{name}'")


class NegativeArea(IngestError):
    def __init__(self, category: FoodCategory, value: object):
        self.category = category
        self.value = value
        super().__init__(f"area for '{category.value}' must be >= 0, got {value!r}")


@dataclass
class TrayObservation:
    """One tray at the return station: per-category leftover pixel areas."""

    tray_id: str
    observed_at: datetime  # aware UTC
    local_date: date
    areas_px: dict[FoodCategory, int]

    @property
    def total_area_px(self) -> int:
        return sum(self.areas_px.values())

    def to_doc(self) -> dict:
        return {
            "tray_id": self.tray_id,
            "timestamp": format_utc(self.observed_at),
            "areas_px": {c.value: self.areas_px[c] for c in CATEGORY_ORDER},
        }

    @classmethod
    def from_doc(cls, doc: Mapping, tz: ZoneInfo) -> "TrayObservation":
        observed_at = parse_utc(doc["timestamp"])
        return cls(
            tray_id=doc["tray_id"],
            observed_at=observed_at,
            local_date=local_date_of(observed_at, tz),
            areas_px={c: int(doc["areas_px"][c.value]) for c in CATEGORY_ORDER},
        )


def parse_tray_observation(raw: bytes | str | Mapping, tz: ZoneInfo) -> TrayObservation:
    """Parse and validate one tray document from the camera feed.

    Accepts JSON text/bytes or an already-decoded object (the batch path).
    The local calendar date is derived from the timestamp in the campaign
    timezone `tz`.
    """
    if isinstance(raw, (bytes, str)):
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise MalformedDocument(f"invalid JSON: {exc}") from None
    else:
        doc = raw
    if not isinstance(doc, Mapping):
        raise MalformedDocument(f"expected a JSON object, got {type(doc).__name__}")

    if "tray_id" not in doc:
        raise MissingField("tray_id")
    tray_id = doc["tray_id"]
    if not isinstance(tray_id, str) or not tray_id:
        raise MalformedDocument("tray_id must be a non-empty string")

    if "timestamp" not in doc:
        raise MissingField("timestamp")
    try:
        observed_at = parse_utc(str(doc["timestamp"]))
    except ValueError as exc:
        raise MalformedDocument(f"unparseable timestamp: {exc}") from None

    if "areas_px" not in doc:
        raise MissingField("areas_px")
    areas_doc = doc["areas_px"]
    if not isinstance(areas_doc, Mapping):
        raise MalformedDocument("areas_px must be an object")
    areas: dict[FoodCategory, int] = {}
    for cat in CATEGORY_ORDER:
        if cat.value not in areas_doc:
            raise MissingField(f"areas_px.{cat.value}")
        value = areas_doc[cat.value]
        if isinstance(value, bool) or not isinstance(value, int):
            raise MalformedDocument(f"areas_px.{cat.value} must be an integer, got {value!r}")
        if value < 0:
            raise NegativeArea(cat, value)
        areas[cat] = value

    return TrayObservation(
        tray_id=tray_id,
        observed_at=observed_at,
        local_date=local_date_of(observed_at, tz),
        areas_px=areas,
    )


def serialize_tray_observation(obs: TrayObservation) -> str:
    """Render one observation back to its wire form."""
    return json.dumps(obs.to_doc(), separators=(",", ":"))


def serialize_tray_batch(observations: Sequence[TrayObservation]) -> str:
    return json.dumps([o.to_doc() for o in observations], separators=(",", ":"))


def parse_tray_batch(
    raw: bytes | str, tz: ZoneInfo
) -> tuple[list[TrayObservation], list[tuple[int, str]]]:
    """Parse a JSON array of tray documents, element by element.

    A malformed element rejects only itself: returns (accepted observations,
    [(index, error message), ...]). A document that is not an array at the
    top level raises MalformedDocument.
    """
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"invalid JSON: {exc}") from None
    if not isinstance(doc, list):
        raise MalformedDocument("batch must be a JSON array")
    accepted: list[TrayObservation] = []
    rejected: list[tuple[int, str]] = []
    for i, element in enumerate(doc):
        try:
            accepted.append(parse_tray_observation(element, tz))
        except IngestError as exc:
            rejected.append((i, str(exc)))
    return accepted, rejected


@dataclass(frozen=True)
class AreaDistribution:
    mean_px: float
    stddev_px: float

    def __post_init__(self):
        if self.mean_px < 0:
            raise ValueError("mean_px must be >= 0")
        if self.stddev_px < 0:
            raise ValueError("stddev_px must be >= 0")


@dataclass(frozen=True)
class SyntheticProfile:
    """Shape of a synthetic tray stream for one day.

    Areas are drawn per category from a normal distribution truncated at
    zero and rounded to whole pixels; with `clean_tray_probability` a tray
    is forced to zero in every category.
    """

    trays_per_day: int
    areas: Mapping[FoodCategory, AreaDistribution]
    clean_tray_probability: float

    def __post_init__(self):
        if self.trays_per_day < 0:
            raise ValueError("trays_per_day must be >= 0")
        missing = [c for c in CATEGORY_ORDER if c not in self.areas]
        if missing:
            raise ValueError(f"profile missing area distribution for {missing}")
        if not 0.0 <= self.clean_tray_probability <= 1.0:
            raise ValueError("clean_tray_probability must be in [0, 1]")

    def to_dict(self) -> dict:
        return {
            "trays_per_day": self.trays_per_day,
            "clean_tray_probability": self.clean_tray_probability,
            "areas": {
                c.value: {"mean_px": d.mean_px, "stddev_px": d.stddev_px}
                for c, d in ((c, self.areas[c]) for c in CATEGORY_ORDER)
            },
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "SyntheticProfile":
        try:
            areas = {
                FoodCategory(name): AreaDistribution(
                    mean_px=float(params["mean_px"]), stddev_px=float(params["stddev_px"])
                )
                for name, params in doc["areas"].items()
            }
            return cls(
                trays_per_day=int(doc["trays_per_day"]),
                areas=areas,
                clean_tray_probability=float(doc.get("clean_tray_probability", 0.0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedDocument(f"invalid synthetic profile: {exc}") from None


def default_profile(trays_per_day: int = 120) -> SyntheticProfile:
    """A plausible lunch-service mix: mostly rice-heavy leftovers, some clean trays."""
    return SyntheticProfile(
        trays_per_day=trays_per_day,
        areas={
            FoodCategory.RICE: AreaDistribution(mean_px=900.0, stddev_px=500.0),
            FoodCategory.MEAT: AreaDistribution(mean_px=500.0, stddev_px=300.0),
            FoodCategory.VEGETABLES: AreaDistribution(mean_px=400.0, stddev_px=250.0),
        },
        clean_tray_probability=0.15,
    )


# Service window for synthetic trays: 11:00 to 20:00 local time.
_SERVICE_OPEN_S = 11 * 3600
_SERVICE_CLOSE_S = 20 * 3600


def _day_seed(seed: int, day: date) -> int:
    # Stable across processes and Python versions, unlike hash().
    digest = hashlib.sha256(f"{seed}:{day.isoformat()}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def generate_synthetic_day(
    seed: int,
    day: date,
    profile: SyntheticProfile,
    tz: ZoneInfo = ZoneInfo("UTC"),
) -> list[TrayObservation]:
    """Generate one deterministic day of tray observations.

    Identical (seed, day, profile, tz) always produce an identical stream,
    across process restarts. Observations are ordered by time within the
    service window.
    """
    rng = random.Random(_day_seed(seed, day))
    n = profile.trays_per_day
    offsets = sorted(rng.uniform(_SERVICE_OPEN_S, _SERVICE_CLOSE_S) for _ in range(n))
    midnight = datetime.combine(day, time(0, 0), tzinfo=tz)

    observations: list[TrayObservation] = []
    for i, offset_s in enumerate(offsets):
        if rng.random() < profile.clean_tray_probability:
            areas = {c: 0 for c in CATEGORY_ORDER}
        else:
            areas = {}
            for cat in CATEGORY_ORDER:
                dist = profile.areas[cat]
                drawn = rng.gauss(dist.mean_px, dist.stddev_px)
                areas[cat] = max(0, round(drawn))
        observed_local = midnight + timedelta(seconds=round(offset_s))
        observations.append(
            TrayObservation(
                tray_id=f"{day.isoformat()}-{i:05d}",
                observed_at=observed_local.astimezone(UTC),
                local_date=day,
                areas_px=areas,
            )
        )
    return observations
