"""HTTP API tying the campaign together.

Participant surface: register/login, record submission (multipart photo +
scores), history, overview, badges. Public surface: the cached daily and
monthly dashboard payloads plus the configured tips. Operator surface:
batch tray ingestion and a manual aggregation trigger, both behind the
admin token.

Auth is a server-side session table keyed by random bearer tokens. Record
submission and badge evaluation run inside a per-user critical section so
concurrent submissions cannot interleave into a lost badge award.
"""

from __future__ import annotations

import hashlib
import hmac
import secrets
import threading
import uuid
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta
from typing import Callable

from fastapi import Depends, FastAPI, File, Form, Query, Request, UploadFile
from fastapi.responses import JSONResponse, PlainTextResponse, Response
from pydantic import BaseModel

from wastenot import store as storage
from wastenot.aggregate import Aggregator
from wastenot.config import AppConfig
from wastenot.domain import (
    MealRecord,
    ScoreError,
    User,
    format_utc,
    local_date_of,
    normalize_email,
    parse_utc,
    utc_now,
    validate_scores,
)
from wastenot.gamify import (
    BADGE_ORDER,
    BadgeState,
    badge_earner_counts,
    community_averages,
    evaluate_badges,
)
from wastenot.ingest import MalformedDocument, parse_tray_batch
from wastenot.store import Store

MIN_PASSWORD_LENGTH = 8
ALLOWED_PHOTO_TYPES = {"image/jpeg", "image/png", "image/webp"}

_SALT_BYTES = 16


def hash_password(password: str, iterations: int) -> bytes:
    """Salted PBKDF2-HMAC-SHA256; salt is stored in the leading bytes."""
    salt = secrets.token_bytes(_SALT_BYTES)
    digest = hashlib.pbkdf2_hmac("sha256", password.encode(), salt, iterations)
    return salt + digest


def verify_password(password: str, stored: bytes, iterations: int) -> bool:
    salt, digest = stored[:_SALT_BYTES], stored[_SALT_BYTES:]
    candidate = hashlib.pbkdf2_hmac("sha256", password.encode(), salt, iterations)
    return hmac.compare_digest(candidate, digest)


class ApiError(Exception):
    def __init__(self, status_code: int, code: str, message: str):
        self.status_code = status_code
        self.code = code
        self.message = message
        super().__init__(message)


class RegisterRequest(BaseModel):
    email: str
    display_name: str
    password: str


class LoginRequest(BaseModel):
    email: str
    password: str


class AggregateRequest(BaseModel):
    date: str


@dataclass
class ServiceContext:
    """Everything the endpoints need, bound once at app construction."""

    config: AppConfig
    store: Store
    clock: Callable[[], datetime]
    aggregator: Aggregator
    registration_lock: threading.Lock = field(default_factory=threading.Lock)
    _user_locks: dict[str, threading.Lock] = field(default_factory=dict)
    _user_locks_guard: threading.Lock = field(default_factory=threading.Lock)
    # Fallback hash keeps unknown-email logins on the same code path as
    # wrong-password logins (no account enumeration via timing).
    dummy_hash: bytes = b""

    def user_lock(self, user_id: str) -> threading.Lock:
        with self._user_locks_guard:
            return self._user_locks.setdefault(user_id, threading.Lock())


def create_app(
    config: AppConfig,
    store: Store | None = None,
    clock: Callable[[], datetime] = utc_now,
) -> FastAPI:
    """Build the application; callers own the store and clock for testability."""
    if store is None:
        store = (
            Store.open(config.data_dir, max_blob_bytes=config.max_photo_bytes)
            if config.data_dir
            else Store.memory(max_blob_bytes=config.max_photo_bytes)
        )
    aggregator = Aggregator(
        store, config.model, config.campaign.severity_thresholds, clock=clock
    )
    ctx = ServiceContext(
        config=config,
        store=store,
        clock=clock,
        aggregator=aggregator,
        dummy_hash=hash_password("wastenot-placeholder", config.pbkdf2_iterations),
    )

    app = FastAPI(title="wastenot", version="0.1.0", docs_url=None, redoc_url=None)
    app.state.ctx = ctx

    @app.exception_handler(ApiError)
    async def _api_error(request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status_code, content={"error": exc.code, "message": exc.message}
        )

    @app.exception_handler(storage.StorageUnavailable)
    async def _storage_error(request: Request, exc: storage.StorageUnavailable):
        return JSONResponse(
            status_code=503, content={"error": "storage_unavailable", "message": str(exc)}
        )

    def _ctx(request: Request) -> ServiceContext:
        return request.app.state.ctx

    def _current_user(request: Request) -> User:
        ctx = _ctx(request)
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            raise ApiError(401, "unauthorized", "missing bearer token")
        token = header[7:].strip()
        session = storage.get_session(ctx.store, token)
        if session is None:
            raise ApiError(401, "unauthorized", "unknown or revoked token")
        if parse_utc(session["expires_at"]) <= ctx.clock():
            raise ApiError(401, "unauthorized", "token expired")
        try:
            return storage.get_user(ctx.store, session["user_id"])
        except storage.NotFound:
            raise ApiError(401, "unauthorized", "user no longer exists") from None

    def _require_admin(request: Request) -> None:
        ctx = _ctx(request)
        supplied = request.headers.get("x-admin-token", "")
        if not hmac.compare_digest(supplied.encode(), ctx.config.admin_token.encode()):
            raise ApiError(403, "forbidden", "admin token required")

    # -- health ---------------------------------------------------------

    @app.get("/healthz")
    def healthz() -> PlainTextResponse:
        return PlainTextResponse("ok")

    # -- auth -------------------------------------------------------------

    @app.post("/api/register", status_code=201)
    def register(body: RegisterRequest, request: Request):
        ctx = _ctx(request)
        if len(body.password) < MIN_PASSWORD_LENGTH:
            raise ApiError(
                400,
                "weak_password",
                f"password must be at least {MIN_PASSWORD_LENGTH} characters",
            )
        try:
            email = normalize_email(body.email)
        except ValueError as exc:
            raise ApiError(400, "bad_email", str(exc)) from None
        display_name = body.display_name.strip()
        if not display_name:
            raise ApiError(400, "bad_display_name", "display_name must not be blank")
        with ctx.registration_lock:
            if storage.find_user_by_email(ctx.store, email) is not None:
                raise ApiError(409, "email_taken", "an account with this email already exists")
            user = User(
                user_id=uuid.uuid4().hex,
                email=email,
                display_name=display_name,
                password_hash=hash_password(body.password, ctx.config.pbkdf2_iterations),
                registered_at=ctx.clock(),
            )
            storage.save_user(ctx.store, user)
        return {"user_id": user.user_id}

    @app.post("/api/login")
    def login(body: LoginRequest, request: Request):
        ctx = _ctx(request)
        try:
            email = normalize_email(body.email)
        except ValueError:
            email = ""
        user = storage.find_user_by_email(ctx.store, email) if email else None
        stored = user.password_hash if user else ctx.dummy_hash
        valid = verify_password(body.password, stored, ctx.config.pbkdf2_iterations)
        if user is None or not valid:
            # One message for unknown email and wrong password alike.
            raise ApiError(401, "invalid_credentials", "email or password is incorrect")
        token = secrets.token_urlsafe(32)
        expires_at = ctx.clock() + timedelta(hours=ctx.config.session_ttl_hours)
        storage.save_session(ctx.store, token, user.user_id, expires_at)
        return {"token": token, "user_id": user.user_id, "display_name": user.display_name}

    # -- records -----------------------------------------------------------

    def _campaign_records(ctx: ServiceContext, user_id: str) -> list[MealRecord]:
        campaign = ctx.config.campaign
        return [
            r
            for r in storage.records_for_user(ctx.store, user_id)
            if campaign.in_window(r.local_date)
        ]

    def _evaluate_and_store_badges(ctx: ServiceContext, user_id: str) -> BadgeState:
        as_of = local_date_of(ctx.clock(), ctx.config.campaign.tzinfo)
        state = evaluate_badges(
            _campaign_records(ctx, user_id), ctx.config.campaign.badge_rules, as_of
        )
        storage.save_badge_state(ctx.store, user_id, state)
        return state

    def _record_to_api(record: MealRecord) -> dict:
        return {
            "record_id": record.record_id,
            "date": record.local_date.isoformat(),
            "submitted_at": format_utc(record.submitted_at),
            "scores": record.scores.as_dict(),
            "overall": record.overall,
            "photo_url": f"/api/media/{record.photo_ref}",
        }

    @app.post("/api/records", status_code=201)
    def submit_record(
        request: Request,
        photo: UploadFile = File(...),
        rice: str = Form(...),
        meat: str = Form(...),
        vegetables: str = Form(...),
        user: User = Depends(_current_user),
    ):
        ctx = _ctx(request)
        content_type = (photo.content_type or "").split(";")[0].strip().lower()
        if content_type not in ALLOWED_PHOTO_TYPES:
            raise ApiError(
                422,
                "unsupported_media_type",
                f"photo must be one of {sorted(ALLOWED_PHOTO_TYPES)}, got '{content_type}'",
            )
        raw_scores = {}
        for name, value in (("rice", rice), ("meat", meat), ("vegetables", vegetables)):
            try:
                raw_scores[name] = int(value)
            except ValueError:
                raise ApiError(400, "bad_scores", f"score '{name}' is not an integer") from None
        try:
            scores = validate_scores(raw_scores)
        except ScoreError as exc:
            raise ApiError(400, "bad_scores", str(exc)) from None

        data = photo.file.read()
        if len(data) > ctx.config.max_photo_bytes:
            raise ApiError(
                413,
                "photo_too_large",
                f"photo is {len(data)} bytes; the limit is {ctx.config.max_photo_bytes}",
            )

        with ctx.user_lock(user.user_id):
            previous = storage.get_badge_state(ctx.store, user.user_id) or BadgeState.fresh()
            try:
                blob = ctx.store.put_blob(data, content_type)
            except storage.BlobTooLarge as exc:
                raise ApiError(413, "photo_too_large", str(exc)) from None
            submitted_at = ctx.clock()
            record = MealRecord(
                record_id=uuid.uuid4().hex,
                user_id=user.user_id,
                submitted_at=submitted_at,
                local_date=local_date_of(submitted_at, ctx.config.campaign.tzinfo),
                scores=scores,
                photo_ref=blob.key,
            )
            storage.save_record(ctx.store, record)
            state = _evaluate_and_store_badges(ctx, user.user_id)
        newly_earned = [
            kind.value
            for kind in BADGE_ORDER
            if state.badges[kind].earned and not previous.badges[kind].earned
        ]
        return {
            "record_id": record.record_id,
            "badge_state": state.to_doc(),
            "newly_earned": newly_earned,
        }

    @app.get("/api/records")
    def list_records(
        request: Request,
        user: User = Depends(_current_user),
        from_date: str | None = Query(default=None, alias="from"),
        to_date: str | None = Query(default=None, alias="to"),
    ):
        ctx = _ctx(request)
        bounds = {}
        for name, value in (("from", from_date), ("to", to_date)):
            if value is None:
                bounds[name] = None
                continue
            try:
                bounds[name] = date.fromisoformat(value)
            except ValueError:
                raise ApiError(400, "bad_date", f"'{name}' must be YYYY-MM-DD") from None
        try:
            records = storage.query_records(
                ctx.store, user.user_id, bounds["from"], bounds["to"]
            )
        except storage.InvalidRange as exc:
            raise ApiError(400, "invalid_range", str(exc)) from None
        return [_record_to_api(r) for r in records]

    @app.get("/api/overview")
    def overview(request: Request, user: User = Depends(_current_user)):
        ctx = _ctx(request)
        own = storage.records_for_user(ctx.store, user.user_id)
        user_avg = community_averages(own)  # same unweighted mean, one user's records
        community = community_averages(storage.all_records(ctx.store))
        state = _evaluate_and_store_badges(ctx, user.user_id)
        recent = storage.query_records(ctx.store, user.user_id)[: ctx.config.recent_records]
        return {
            "user": {
                "display_name": user.display_name,
                "record_count": len(own),
                "averages": user_avg.to_doc(),
            },
            "community": community.to_doc(),
            "badge_state": state.to_doc(),
            "recent_records": [_record_to_api(r) for r in recent],
        }

    @app.get("/api/badges")
    def badges(request: Request, user: User = Depends(_current_user)):
        ctx = _ctx(request)
        state = _evaluate_and_store_badges(ctx, user.user_id)
        counts = badge_earner_counts(storage.all_badge_states(ctx.store))
        return {
            "badge_state": state.to_doc(),
            "earner_counts": {kind.value: counts[kind] for kind in BADGE_ORDER},
        }

    # -- media ---------------------------------------------------------------

    @app.get("/api/media/{key}")
    def media(key: str, request: Request, user: User = Depends(_current_user)):
        ctx = _ctx(request)
        owns = any(
            r.photo_ref == key for r in storage.records_for_user(ctx.store, user.user_id)
        )
        if not owns or not ctx.store.has_blob(key):
            # Same answer for "not yours" and "does not exist".
            raise ApiError(404, "not_found", "no such media")
        data, content_type = ctx.store.get_blob(key)
        return Response(content=data, media_type=content_type)

    # -- public dashboard ------------------------------------------------------

    @app.get("/api/dashboard/daily")
    def dashboard_daily(request: Request, date: str | None = Query(default=None)):
        ctx = _ctx(request)
        day = _parse_day(date, ctx)
        aggregate = storage.get_daily(ctx.store, day)
        if aggregate is None:
            raise ApiError(404, "not_computed", f"no daily aggregate for {day}")
        return aggregate.to_doc()

    @app.get("/api/dashboard/monthly")
    def dashboard_monthly(request: Request, month: str | None = None):
        ctx = _ctx(request)
        if month is None:
            today = local_date_of(ctx.clock(), ctx.config.campaign.tzinfo)
            year, month_no = today.year, today.month
        else:
            try:
                year_s, month_s = month.split("-")
                year, month_no = int(year_s), int(month_s)
                if not 1 <= month_no <= 12:
                    raise ValueError(month)
            except ValueError:
                raise ApiError(400, "bad_date", "month must be YYYY-MM") from None
        aggregate = storage.get_monthly(ctx.store, year, month_no)
        if aggregate is None:
            raise ApiError(404, "not_computed", f"no monthly aggregate for {year}-{month_no:02d}")
        return aggregate.to_doc()

    @app.get("/api/dashboard/tips")
    def dashboard_tips(request: Request):
        return {"tips": list(_ctx(request).config.campaign.tips)}

    # -- admin -------------------------------------------------------------

    @app.post("/api/admin/trays")
    async def ingest_trays(request: Request):
        _require_admin(request)
        ctx = _ctx(request)
        body = await request.body()
        try:
            observations, rejected = parse_tray_batch(body, ctx.config.campaign.tzinfo)
        except MalformedDocument as exc:
            raise ApiError(400, "malformed_batch", str(exc)) from None
        # Remap parse indexes and add store-level rejections (duplicates).
        rejections = [{"index": i, "error": message} for i, message in rejected]
        accepted = 0
        parse_ok_indexes = [
            i for i in range(len(observations) + len(rejected))
            if i not in {r["index"] for r in rejections}
        ]
        for obs, original_index in zip(observations, parse_ok_indexes):
            try:
                storage.save_observation(ctx.store, obs)
                accepted += 1
            except storage.DuplicateTray as exc:
                rejections.append({"index": original_index, "error": str(exc)})
        rejections.sort(key=lambda r: r["index"])
        return {"accepted": accepted, "rejected": rejections}

    @app.post("/api/admin/aggregate")
    def trigger_aggregate(body: AggregateRequest, request: Request):
        _require_admin(request)
        ctx = _ctx(request)
        try:
            day = date.fromisoformat(body.date)
        except ValueError:
            raise ApiError(400, "bad_date", "date must be YYYY-MM-DD") from None
        aggregate = ctx.aggregator.run_daily_job(day)
        return aggregate.to_doc()

    return app


def _parse_day(raw: str | None, ctx: ServiceContext) -> date:
    if raw is None:
        return local_date_of(ctx.clock(), ctx.config.campaign.tzinfo)
    try:
        return date.fromisoformat(raw)
    except ValueError:
        raise ApiError(400, "bad_date", "date must be YYYY-MM-DD") from None
