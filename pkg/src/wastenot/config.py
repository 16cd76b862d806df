"""Service configuration: TOML file, env overrides, and sane defaults.

Environment overrides: WASTENOT_PORT for [service] port and
WASTENOT_DATA_DIR for [storage] data_dir.
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, replace
from datetime import date, time
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from wastenot import estimator
from wastenot.aggregate import SeverityThresholds
from wastenot.domain import CampaignConfig
from wastenot.gamify import BadgeRuleConfig
from wastenot.store import DEFAULT_MAX_BLOB_BYTES


class BadConfig(ValueError):
    pass


DEFAULT_TIPS = (
    "Order only what you can finish",
    "Ask for a smaller rice portion",
    "Tell the counter staff when a regular serving is too much",
    "Pack up leftovers instead of leaving them",
)


def default_campaign_config() -> CampaignConfig:
    """Two-week campus campaign with a one-week pre-registration run-up."""
    return CampaignConfig(
        prereg_start=date(2023, 3, 13),
        start_date=date(2023, 3, 20),
        end_date=date(2023, 4, 3),
        timezone="Asia/Hong_Kong",
        tips=DEFAULT_TIPS,
        badge_rules=BadgeRuleConfig(),
        severity_thresholds=SeverityThresholds(),
    )


@dataclass(frozen=True)
class AppConfig:
    campaign: CampaignConfig
    model: estimator.LinearModel
    data_dir: str | None = None  # None = in-memory store
    host: str = "127.0.0.1"
    port: int = 8000
    admin_token: str = "change-me"
    max_photo_bytes: int = DEFAULT_MAX_BLOB_BYTES
    session_ttl_hours: int = 168
    recent_records: int = 10
    pbkdf2_iterations: int = 100_000
    scheduler_enabled: bool = True
    scheduler_run_at: time = time(0, 10)


DEFAULT_MODEL = estimator.LinearModel(slope=0.06, intercept=0.0, r_squared=1.0, n_samples=2)


def default_app_config() -> AppConfig:
    return AppConfig(campaign=default_campaign_config(), model=DEFAULT_MODEL)


def load_config(path: str | Path | None = None, env: dict | None = None) -> AppConfig:
    """Build the AppConfig from an optional TOML file plus env overrides."""
    env = env if env is not None else dict(os.environ)
    raw: dict = {}
    if path is not None:
        path = Path(path)
        try:
            with path.open("rb") as handle:
                raw = tomllib.load(handle)
        except FileNotFoundError:
            raise BadConfig(f"config file not found: {path}") from None
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise BadConfig(f"cannot parse {path}: {exc}") from None
    try:
        config = _build(raw, base_dir=path.parent if path else Path.cwd())
    except BadConfig:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise BadConfig(f"invalid configuration: {exc}") from None

    if "WASTENOT_PORT" in env:
        try:
            config = replace(config, port=int(env["WASTENOT_PORT"]))
        except ValueError:
            raise BadConfig(f"WASTENOT_PORT is not an integer: {env['WASTENOT_PORT']!r}") from None
    if "WASTENOT_DATA_DIR" in env:
        config = replace(config, data_dir=env["WASTENOT_DATA_DIR"] or None)
    return config


def _as_date(value) -> date:
    if isinstance(value, date):
        return value
    return date.fromisoformat(str(value))


def _build(raw: dict, base_dir: Path) -> AppConfig:
    defaults = default_campaign_config()

    campaign_raw = raw.get("campaign", {})
    badges_raw = raw.get("badges", {})
    severity_raw = raw.get("severity", {})

    badge_rules = BadgeRuleConfig(
        persistence_days=int(badges_raw.get("persistence_days", 5)),
        quantity_records=int(badges_raw.get("quantity_records", 10)),
        quality_min_avg=float(badges_raw.get("quality_min_avg", 90.0)),
        quality_min_records=int(badges_raw.get("quality_min_records", 5)),
    )
    thresholds = SeverityThresholds(
        medium_min_g=float(severity_raw.get("medium_min_g", 50.0)),
        severe_min_g=float(severity_raw.get("severe_min_g", 150.0)),
    )
    tips = tuple(campaign_raw.get("tips", DEFAULT_TIPS))
    campaign = CampaignConfig(
        prereg_start=_as_date(campaign_raw.get("prereg_start", defaults.prereg_start)),
        start_date=_as_date(campaign_raw.get("start_date", defaults.start_date)),
        end_date=_as_date(campaign_raw.get("end_date", defaults.end_date)),
        timezone=str(campaign_raw.get("timezone", defaults.timezone)),
        tips=tips,
        badge_rules=badge_rules,
        severity_thresholds=thresholds,
    )

    estimator_raw = raw.get("estimator", {})
    if "calibration_csv" in estimator_raw:
        csv_path = Path(estimator_raw["calibration_csv"])
        if not csv_path.is_absolute():
            csv_path = base_dir / csv_path
        model = estimator.fit_from_csv(csv_path)
    else:
        model = estimator.LinearModel(
            slope=float(estimator_raw.get("slope_g_per_px", DEFAULT_MODEL.slope)),
            intercept=float(estimator_raw.get("intercept_g", DEFAULT_MODEL.intercept)),
            r_squared=1.0,
            n_samples=2,
        )

    service_raw = raw.get("service", {})
    scheduler_raw = raw.get("scheduler", {})
    storage_raw = raw.get("storage", {})

    run_at_raw = scheduler_raw.get("run_at", "00:10")
    run_at = run_at_raw if isinstance(run_at_raw, time) else time.fromisoformat(str(run_at_raw))

    data_dir = storage_raw.get("data_dir")
    if data_dir in (None, "", ":memory:"):
        data_dir = None
    else:
        data_path = Path(str(data_dir))
        if not data_path.is_absolute():
            data_path = base_dir / data_path
        data_dir = str(data_path)

    return AppConfig(
        campaign=campaign,
        model=model,
        data_dir=data_dir,
        host=str(service_raw.get("host", "127.0.0.1")),
        port=int(service_raw.get("port", 8000)),
        admin_token=str(service_raw.get("admin_token", "change-me")),
        max_photo_bytes=int(service_raw.get("max_photo_bytes", DEFAULT_MAX_BLOB_BYTES)),
        session_ttl_hours=int(service_raw.get("session_ttl_hours", 168)),
        recent_records=int(service_raw.get("recent_records", 10)),
        pbkdf2_iterations=int(service_raw.get("pbkdf2_iterations", 100_000)),
        scheduler_enabled=bool(scheduler_raw.get("enabled", True)),
        scheduler_run_at=run_at,
    )
