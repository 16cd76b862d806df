"""Desk-scale campaign replica.

Drives the real HTTP API in-process (through the ASGI test transport, not
direct function calls): registers a population, submits every food-saving
action over the campaign window, ingests synthetic trays, and runs the
daily aggregation job for each day. The run doubles as an integration
test of the full stack.

Behavior mix: "dedicated" participants follow a plan that earns all four
badges (a consecutive-day run at two high-score records per day until they
pass every threshold); "casual" participants submit a random number of
actions on random days with mixed scores. Everything is derived from the
seed, so a fixed spec reproduces the identical report (wall-clock runtime
aside).
"""

from __future__ import annotations

import json
import math
import threading
import time as time_mod
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import date, datetime, time, timedelta
from pathlib import Path
from random import Random
from typing import Mapping

from fastapi.testclient import TestClient

from wastenot import store as storage
from wastenot.config import DEFAULT_MODEL, AppConfig, default_campaign_config
from wastenot.domain import CampaignConfig
from wastenot.gamify import BADGE_ORDER, BadgeRuleConfig, badge_earner_counts
from wastenot.ingest import default_profile, generate_synthetic_day, serialize_tray_batch
from wastenot.service import create_app
from wastenot.store import Store


class BadSpec(ValueError):
    pass


@dataclass(frozen=True)
class SimulationSpec:
    seed: int = 7
    n_users: int = 220
    total_actions: int = 811
    dedicated_fraction: float = 0.25
    casual_fraction: float = 0.75
    start_date: date = date(2023, 3, 20)
    end_date: date = date(2023, 4, 3)
    trays_per_day: int = 120
    parallelism: int = 1

    def __post_init__(self):
        if self.n_users <= 0:
            raise BadSpec("n_users must be > 0")
        if self.total_actions <= 0:
            raise BadSpec("total_actions must be > 0")
        if abs(self.dedicated_fraction + self.casual_fraction - 1.0) > 1e-9:
            raise BadSpec("behavior mix fractions must sum to 1")
        if not 0.0 <= self.dedicated_fraction <= 1.0:
            raise BadSpec("dedicated_fraction must be in [0, 1]")
        if self.start_date >= self.end_date:
            raise BadSpec("start_date must be before end_date")
        if self.trays_per_day < 0:
            raise BadSpec("trays_per_day must be >= 0")
        if self.parallelism < 1:
            raise BadSpec("parallelism must be >= 1")

    @classmethod
    def from_dict(cls, doc: Mapping) -> "SimulationSpec":
        mix = doc.get("behavior_mix", {})
        unknown_mix = set(mix) - {"dedicated", "casual"}
        if unknown_mix:
            raise BadSpec(f"unknown behavior_mix fields: {sorted(unknown_mix)}")
        known = {
            "seed",
            "n_users",
            "total_actions",
            "behavior_mix",
            "start_date",
            "end_date",
            "trays_per_day",
            "parallelism",
        }
        unknown = set(doc) - known
        if unknown:
            raise BadSpec(f"unknown spec fields: {sorted(unknown)}")
        try:
            return cls(
                seed=int(doc.get("seed", 7)),
                n_users=int(doc.get("n_users", 220)),
                total_actions=int(doc.get("total_actions", 811)),
                dedicated_fraction=float(mix.get("dedicated", 0.25)),
                casual_fraction=float(mix.get("casual", 0.75)),
                start_date=date.fromisoformat(doc.get("start_date", "2023-03-20")),
                end_date=date.fromisoformat(doc.get("end_date", "2023-04-03")),
                trays_per_day=int(doc.get("trays_per_day", 120)),
                parallelism=int(doc.get("parallelism", 1)),
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, BadSpec):
                raise
            raise BadSpec(f"invalid simulation spec: {exc}") from None

    @classmethod
    def load(cls, path: str | Path) -> "SimulationSpec":
        try:
            with Path(path).open() as handle:
                doc = json.load(handle)
        except FileNotFoundError:
            raise BadSpec(f"spec file not found: {path}") from None
        except (OSError, json.JSONDecodeError) as exc:
            raise BadSpec(f"cannot parse {path}: {exc}") from None
        if not isinstance(doc, Mapping):
            raise BadSpec("simulation spec must be a JSON object")
        return cls.from_dict(doc)


class SimClock:
    """Settable clock injected into the service so the campaign days replay."""

    def __init__(self, start: datetime):
        self._now = start
        self._lock = threading.Lock()

    def __call__(self) -> datetime:
        with self._lock:
            return self._now

    def set(self, now: datetime) -> None:
        with self._lock:
            self._now = now


@dataclass(frozen=True)
class _PlannedAction:
    day_index: int
    user_index: int
    scores: dict[str, int]


def _plan_actions(
    spec: SimulationSpec, rng: Random, n_days: int, rules: BadgeRuleConfig
) -> list[_PlannedAction]:
    """Lay out every action before touching the service.

    Each dedicated user records on `persistence_days` consecutive days, at
    enough records per day (all scores at or above the quality bar) to
    clear the quantity and quality thresholds too. All remaining actions
    go to casual users on random days with mixed scores (or back to the
    dedicated pool when the whole population is dedicated).
    """
    n_dedicated = round(spec.n_users * spec.dedicated_fraction)
    run_days = rules.persistence_days
    needed = max(rules.quantity_records, rules.quality_min_records)
    per_day = math.ceil(needed / run_days)
    per_dedicated = per_day * run_days
    quality_floor = min(100, math.ceil(rules.quality_min_avg))
    if n_days < run_days and n_dedicated > 0:
        raise BadSpec(f"campaign window of {n_days} days is too short for a {run_days}-day run")
    if n_dedicated * per_dedicated > spec.total_actions:
        raise BadSpec(
            f"{n_dedicated} dedicated users need {n_dedicated * per_dedicated} actions, "
            f"but total_actions is {spec.total_actions}"
        )

    actions: list[_PlannedAction] = []
    for user_index in range(n_dedicated):
        first_day = rng.randrange(0, n_days - run_days + 1)
        for offset in range(run_days):
            for _ in range(per_day):
                scores = {
                    "rice": rng.randint(quality_floor, 100),
                    "meat": rng.randint(quality_floor, 100),
                    "vegetables": rng.randint(quality_floor, 100),
                }
                actions.append(_PlannedAction(first_day + offset, user_index, scores))

    remaining = spec.total_actions - len(actions)
    pool_start = n_dedicated if n_dedicated < spec.n_users else 0
    pool = list(range(pool_start, spec.n_users))
    for _ in range(remaining):
        user_index = rng.choice(pool)
        scores = {
            "rice": rng.randint(30, 100),
            "meat": rng.randint(30, 100),
            "vegetables": rng.randint(30, 100),
        }
        actions.append(_PlannedAction(rng.randrange(0, n_days), user_index, scores))

    actions.sort(key=lambda a: a.day_index)
    return actions


def _fake_photo(rng: Random, tag: str) -> bytes:
    """Small unique JPEG-looking payload; the service never decodes pixels."""
    body = f"{tag}:{rng.getrandbits(64):016x}".encode()
    return b"\xff\xd8\xff\xe0" + body + b"\xff\xd9"


def run_simulation(
    spec: SimulationSpec,
    app_config: AppConfig | None = None,
    store: Store | None = None,
) -> dict:
    """Run the campaign replica and return the report document.

    Pass an empty `store` to keep the simulated records and badge states
    around for inspection after the run.
    """
    started = time_mod.perf_counter()
    rng = Random(spec.seed)

    base = app_config.campaign if app_config else default_campaign_config()
    campaign = CampaignConfig(
        prereg_start=spec.start_date - timedelta(days=7),
        start_date=spec.start_date,
        end_date=spec.end_date,
        timezone=base.timezone,
        tips=base.tips,
        badge_rules=base.badge_rules,
        severity_thresholds=base.severity_thresholds,
    )
    admin_token = uuid.uuid4().hex
    # Tokens are issued once at pre-registration, so they must outlive the
    # replayed window.
    ttl_hours = 24 * ((campaign.end_date - campaign.prereg_start).days + 2)
    config = AppConfig(
        campaign=campaign,
        model=app_config.model if app_config else DEFAULT_MODEL,
        admin_token=admin_token,
        session_ttl_hours=ttl_hours,
        pbkdf2_iterations=app_config.pbkdf2_iterations if app_config else 100_000,
    )
    tz = campaign.tzinfo
    days = campaign.campaign_days()
    clock = SimClock(datetime.combine(campaign.prereg_start, time(9, 0), tzinfo=tz))
    if store is None:
        store = Store.memory(max_blob_bytes=config.max_photo_bytes)
    app = create_app(config, store=store, clock=clock)

    actions = _plan_actions(spec, rng, len(days), campaign.badge_rules)
    photo_rng = Random(rng.getrandbits(64))

    report_days: dict[str, int] = {d.isoformat(): 0 for d in days}
    with TestClient(app) as client:
        tokens: list[str] = []
        for i in range(spec.n_users):
            email = f"user{i:04d}@example.test"
            password = f"pw-{spec.seed}-{i:04d}-secret"
            response = client.post(
                "/api/register",
                json={"email": email, "display_name": f"Participant {i}", "password": password},
            )
            response.raise_for_status()
            response = client.post("/api/login", json={"email": email, "password": password})
            response.raise_for_status()
            tokens.append(response.json()["token"])

        by_day: dict[int, list[_PlannedAction]] = {}
        for action in actions:
            by_day.setdefault(action.day_index, []).append(action)

        def _submit(action: _PlannedAction, photo: bytes) -> None:
            response = client.post(
                "/api/records",
                headers={"Authorization": f"Bearer {tokens[action.user_index]}"},
                files={"photo": ("meal.jpg", photo, "image/jpeg")},
                data={str(k): str(v) for k, v in action.scores.items()},
            )
            response.raise_for_status()

        for day_index, day in enumerate(days):
            day_noon = datetime.combine(day, time(12, 0), tzinfo=tz)
            todays = by_day.get(day_index, [])
            # Pre-draw photo bytes so the RNG stream is independent of
            # submission concurrency.
            photos = [_fake_photo(photo_rng, f"{day_index}-{i}") for i in range(len(todays))]
            if spec.parallelism == 1:
                for i, action in enumerate(todays):
                    clock.set(day_noon + timedelta(seconds=5 * i))
                    _submit(action, photos[i])
            else:
                clock.set(day_noon)
                with ThreadPoolExecutor(max_workers=spec.parallelism) as pool:
                    for future in [
                        pool.submit(_submit, action, photos[i])
                        for i, action in enumerate(todays)
                    ]:
                        future.result()
            report_days[day.isoformat()] = len(todays)

            clock.set(datetime.combine(day, time(21, 0), tzinfo=tz))
            if spec.trays_per_day > 0:
                trays = generate_synthetic_day(
                    spec.seed, day, default_profile(spec.trays_per_day), tz
                )
                response = client.post(
                    "/api/admin/trays",
                    headers={"X-Admin-Token": admin_token},
                    content=serialize_tray_batch(trays),
                )
                response.raise_for_status()
                if response.json()["accepted"] != len(trays):
                    raise RuntimeError(f"tray ingestion rejected elements on {day}")
            response = client.post(
                "/api/admin/aggregate",
                headers={"X-Admin-Token": admin_token},
                json={"date": day.isoformat()},
            )
            response.raise_for_status()

    states = storage.all_badge_states(store)
    counts = badge_earner_counts(states)
    report = {
        "seed": spec.seed,
        "n_users": spec.n_users,
        "total_actions": sum(report_days.values()),
        "records_per_day": report_days,
        "badge_earner_counts": {kind.value: counts[kind] for kind in BADGE_ORDER},
        "reward_eligible_count": sum(1 for s in states if s.reward_eligible),
        "days_aggregated": len(days),
        "runtime_seconds": round(time_mod.perf_counter() - started, 3),
    }
    return report


def write_report(report: dict, path: str | Path) -> None:
    with Path(path).open("w") as handle:
        json.dump(report, handle, indent=2, sort_keys=True)
        handle.write("\n")
