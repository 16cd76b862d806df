"""Persistence: a document store plus a content-addressed blob store.

The default backend is an embedded on-disk store (one JSON file per
document, atomic tmp+rename writes) so a campaign runs with zero external
services and survives restarts; the in-memory variant backs tests and
simulations. Single-document operations are atomic and thread-safe; there
are no multi-document transactions — the few read-modify-write flows
(registration, record submission) serialize in the service layer.

Typed repository helpers for each collection live here too, so callers
never touch raw documents.
"""

from __future__ import annotations

import hashlib
import json
import threading
import urllib.parse
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Iterator, Mapping

from wastenot.aggregate import DailyAggregate, MonthlyAggregate
from wastenot.domain import (
    FoodCategory,
    MealRecord,
    User,
    format_utc,
    normalize_email,
    parse_utc,
)
from wastenot.gamify import BadgeState
from wastenot.ingest import TrayObservation


class StorageUnavailable(Exception):
    pass


class NotFound(KeyError):
    def __init__(self, collection: str, key: str):
        self.collection = collection
        self.key = key
        super().__init__(f"{collection}/{key}")


class InvalidRange(ValueError):
    pass


class BlobTooLarge(ValueError):
    def __init__(self, size: int, limit: int):
        self.size = size
        self.limit = limit
        super().__init__(f"blob of {size} bytes exceeds the {limit} byte limit")


class DuplicateTray(ValueError):
    def __init__(self, tray_id: str, day: date):
        self.tray_id = tray_id
        self.day = day
        super().__init__(f"tray '{tray_id}' already ingested for {day}")


@dataclass(frozen=True)
class BlobRef:
    key: str
    content_type: str
    size_bytes: int


DEFAULT_MAX_BLOB_BYTES = 5 * 1024 * 1024  # photo uploads; the UI compresses well below this


class Store:
    """Handle bundling document collections and the blob store.

    Use Store.memory() for ephemeral storage or Store.open(path) for the
    durable on-disk backend.
    """

    def __init__(self, backend: "_Backend", max_blob_bytes: int = DEFAULT_MAX_BLOB_BYTES):
        self._backend = backend
        self.max_blob_bytes = max_blob_bytes

    @classmethod
    def memory(cls, max_blob_bytes: int = DEFAULT_MAX_BLOB_BYTES) -> "Store":
        return cls(_MemoryBackend(), max_blob_bytes)

    @classmethod
    def open(cls, path: str | Path, max_blob_bytes: int = DEFAULT_MAX_BLOB_BYTES) -> "Store":
        return cls(_FileBackend(Path(path)), max_blob_bytes)

    # -- documents ---------------------------------------------------------

    def put_document(self, collection: str, key: str, value: Mapping) -> int:
        """Upsert one document; returns the stored version (1 for a create)."""
        return self._backend.put(collection, key, value)

    def put_document_if_absent(self, collection: str, key: str, value: Mapping) -> bool:
        """Atomically create a document; False if the key already exists."""
        return self._backend.put_if_absent(collection, key, value)

    def get_document(self, collection: str, key: str) -> dict:
        value = self._backend.get(collection, key)
        if value is None:
            raise NotFound(collection, key)
        return value

    def has_document(self, collection: str, key: str) -> bool:
        return self._backend.get(collection, key) is not None

    def delete_document(self, collection: str, key: str) -> None:
        self._backend.delete(collection, key)

    def documents(self, collection: str) -> Iterator[tuple[str, dict]]:
        """All (key, value) pairs in a collection; order unspecified."""
        return self._backend.items(collection)

    # -- blobs --------------------------------------------------------------

    def put_blob(self, data: bytes, content_type: str) -> BlobRef:
        """Store bytes content-addressed by SHA-256; idempotent per content."""
        if len(data) > self.max_blob_bytes:
            raise BlobTooLarge(len(data), self.max_blob_bytes)
        key = hashlib.sha256(data).hexdigest()
        self._backend.put_blob(key, data)
        self.put_document(
            "blob_meta", key, {"content_type": content_type, "size_bytes": len(data)}
        )
        return BlobRef(key=key, content_type=content_type, size_bytes=len(data))

    def get_blob(self, key: str) -> tuple[bytes, str]:
        """Fetch (bytes, content_type) for a blob key."""
        data = self._backend.get_blob(key)
        if data is None:
            raise NotFound("blobs", key)
        meta = self.get_document("blob_meta", key)
        return data, meta["content_type"]

    def has_blob(self, key: str) -> bool:
        return self._backend.get_blob(key) is not None


class _MemoryBackend:
    def __init__(self):
        self._collections: dict[str, dict[str, dict]] = {}
        self._versions: dict[tuple[str, str], int] = {}
        self._blobs: dict[str, bytes] = {}
        self._lock = threading.RLock()

    def put(self, collection: str, key: str, value: Mapping) -> int:
        with self._lock:
            # round-trip through JSON so memory and file backends agree on types
            stored = json.loads(json.dumps(value))
            self._collections.setdefault(collection, {})[key] = stored
            version = self._versions.get((collection, key), 0) + 1
            self._versions[(collection, key)] = version
            return version

    def put_if_absent(self, collection: str, key: str, value: Mapping) -> bool:
        with self._lock:
            if key in self._collections.get(collection, {}):
                return False
            self.put(collection, key, value)
            return True

    def get(self, collection: str, key: str) -> dict | None:
        with self._lock:
            value = self._collections.get(collection, {}).get(key)
            return json.loads(json.dumps(value)) if value is not None else None

    def delete(self, collection: str, key: str) -> None:
        with self._lock:
            self._collections.get(collection, {}).pop(key, None)

    def items(self, collection: str) -> Iterator[tuple[str, dict]]:
        with self._lock:
            snapshot = list(self._collections.get(collection, {}).items())
        return iter([(k, json.loads(json.dumps(v))) for k, v in snapshot])

    def put_blob(self, key: str, data: bytes) -> None:
        with self._lock:
            self._blobs[key] = bytes(data)

    def get_blob(self, key: str) -> bytes | None:
        with self._lock:
            return self._blobs.get(key)


class _FileBackend:
    """One JSON file per document under root/collections/<name>/<quoted-key>.json.

    Writes go to a temp file then rename, so a crash never leaves a torn
    document. Keys are percent-encoded for filesystem safety.
    """

    def __init__(self, root: Path):
        self._root = root
        self._lock = threading.RLock()
        try:
            (root / "collections").mkdir(parents=True, exist_ok=True)
            (root / "blobs").mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StorageUnavailable(f"cannot initialize store at {root}: {exc}") from None

    def _doc_path(self, collection: str, key: str) -> Path:
        safe_key = urllib.parse.quote(key, safe="")
        return self._root / "collections" / collection / f"{safe_key}.json"

    def put(self, collection: str, key: str, value: Mapping) -> int:
        path = self._doc_path(collection, key)
        with self._lock:
            try:
                path.parent.mkdir(parents=True, exist_ok=True)
                version = 1
                if path.exists():
                    with path.open() as handle:
                        version = json.load(handle).get("version", 0) + 1
                tmp = path.with_suffix(".json.tmp")
                with tmp.open("w") as handle:
                    json.dump({"version": version, "value": value}, handle)
                tmp.replace(path)
                return version
            except OSError as exc:
                raise StorageUnavailable(f"write failed for {collection}/{key}: {exc}") from None

    def put_if_absent(self, collection: str, key: str, value: Mapping) -> bool:
        with self._lock:
            if self._doc_path(collection, key).exists():
                return False
            self.put(collection, key, value)
            return True

    def get(self, collection: str, key: str) -> dict | None:
        path = self._doc_path(collection, key)
        with self._lock:
            if not path.exists():
                return None
            try:
                with path.open() as handle:
                    return json.load(handle)["value"]
            except OSError as exc:
                raise StorageUnavailable(f"read failed for {collection}/{key}: {exc}") from None

    def delete(self, collection: str, key: str) -> None:
        path = self._doc_path(collection, key)
        with self._lock:
            path.unlink(missing_ok=True)

    def items(self, collection: str) -> Iterator[tuple[str, dict]]:
        directory = self._root / "collections" / collection
        with self._lock:
            if not directory.is_dir():
                return iter([])
            pairs = []
            try:
                for path in sorted(directory.glob("*.json")):
                    key = urllib.parse.unquote(path.stem)
                    with path.open() as handle:
                        pairs.append((key, json.load(handle)["value"]))
            except OSError as exc:
                raise StorageUnavailable(f"scan failed for {collection}: {exc}") from None
        return iter(pairs)

    def _blob_path(self, key: str) -> Path:
        return self._root / "blobs" / key[:2] / key

    def put_blob(self, key: str, data: bytes) -> None:
        path = self._blob_path(key)
        with self._lock:
            try:
                path.parent.mkdir(parents=True, exist_ok=True)
                if path.exists():  # content-addressed: identical bytes already stored
                    return
                tmp = path.with_name(path.name + ".tmp")
                tmp.write_bytes(data)
                tmp.replace(path)
            except OSError as exc:
                raise StorageUnavailable(f"blob write failed for {key}: {exc}") from None

    def get_blob(self, key: str) -> bytes | None:
        path = self._blob_path(key)
        with self._lock:
            if not path.exists():
                return None
            try:
                return path.read_bytes()
            except OSError as exc:
                raise StorageUnavailable(f"blob read failed for {key}: {exc}") from None


_Backend = _MemoryBackend | _FileBackend


# -- typed repositories ------------------------------------------------------

USERS = "users"
EMAILS = "emails"
SESSIONS = "sessions"
RECORDS = "records"
OBSERVATIONS = "observations"
DAILY = "daily_aggregates"
MONTHLY = "monthly_aggregates"
BADGES = "badge_states"


def save_user(store: Store, user: User) -> None:
    store.put_document(USERS, user.user_id, user.to_doc())
    store.put_document(EMAILS, normalize_email(user.email), {"user_id": user.user_id})


def get_user(store: Store, user_id: str) -> User:
    return User.from_doc(store.get_document(USERS, user_id))


def find_user_by_email(store: Store, email: str) -> User | None:
    try:
        pointer = store.get_document(EMAILS, normalize_email(email))
    except (NotFound, ValueError):
        return None
    return get_user(store, pointer["user_id"])


def save_session(store: Store, token: str, user_id: str, expires_at) -> None:
    store.put_document(SESSIONS, token, {"user_id": user_id, "expires_at": format_utc(expires_at)})


def get_session(store: Store, token: str) -> dict | None:
    try:
        return store.get_document(SESSIONS, token)
    except NotFound:
        return None


def save_record(store: Store, record: MealRecord) -> None:
    store.put_document(RECORDS, record.record_id, record.to_doc())


def records_for_user(store: Store, user_id: str) -> list[MealRecord]:
    """All of one user's records, oldest submission first."""
    records = [
        MealRecord.from_doc(doc)
        for _, doc in store.documents(RECORDS)
        if doc["user_id"] == user_id
    ]
    records.sort(key=lambda r: (r.submitted_at, r.record_id))
    return records


def all_records(store: Store) -> list[MealRecord]:
    return [MealRecord.from_doc(doc) for _, doc in store.documents(RECORDS)]


def query_records(
    store: Store,
    user_id: str,
    date_from: date | None = None,
    date_to: date | None = None,
) -> list[MealRecord]:
    """One user's records with local_date in [date_from, date_to], newest first."""
    if date_from is not None and date_to is not None and date_from > date_to:
        raise InvalidRange(f"empty range: {date_from} > {date_to}")
    matches = []
    for record in records_for_user(store, user_id):
        if date_from is not None and record.local_date < date_from:
            continue
        if date_to is not None and record.local_date > date_to:
            continue
        matches.append(record)
    matches.sort(key=lambda r: (r.submitted_at, r.record_id), reverse=True)
    return matches


def _observation_key(day: date, tray_id: str) -> str:
    return f"{day.isoformat()}:{tray_id}"


def save_observation(store: Store, obs: TrayObservation) -> None:
    """Append one tray observation; re-ingesting the same tray+date is rejected."""
    key = _observation_key(obs.local_date, obs.tray_id)
    doc = obs.to_doc()
    doc["local_date"] = obs.local_date.isoformat()
    if not store.put_document_if_absent(OBSERVATIONS, key, doc):
        raise DuplicateTray(obs.tray_id, obs.local_date)


def observations_for_day(store: Store, day: date) -> list[TrayObservation]:
    day_iso = day.isoformat()
    observations = []
    for _, doc in store.documents(OBSERVATIONS):
        if doc["local_date"] != day_iso:
            continue
        observations.append(
            TrayObservation(
                tray_id=doc["tray_id"],
                observed_at=parse_utc(doc["timestamp"]),
                local_date=day,
                areas_px={FoodCategory(c): int(v) for c, v in doc["areas_px"].items()},
            )
        )
    observations.sort(key=lambda o: (o.observed_at, o.tray_id))
    return observations


def save_daily(store: Store, aggregate: DailyAggregate) -> None:
    store.put_document(DAILY, aggregate.day.isoformat(), aggregate.to_doc())


def get_daily(store: Store, day: date) -> DailyAggregate | None:
    try:
        return DailyAggregate.from_doc(store.get_document(DAILY, day.isoformat()))
    except NotFound:
        return None


def dailies_for_month(store: Store, year: int, month: int) -> list[DailyAggregate]:
    prefix = f"{year:04d}-{month:02d}-"
    dailies = [
        DailyAggregate.from_doc(doc)
        for key, doc in store.documents(DAILY)
        if key.startswith(prefix)
    ]
    dailies.sort(key=lambda d: d.day)
    return dailies


def save_monthly(store: Store, aggregate: MonthlyAggregate) -> None:
    key = f"{aggregate.year:04d}-{aggregate.month:02d}"
    store.put_document(MONTHLY, key, aggregate.to_doc())


def get_monthly(store: Store, year: int, month: int) -> MonthlyAggregate | None:
    try:
        return MonthlyAggregate.from_doc(
            store.get_document(MONTHLY, f"{year:04d}-{month:02d}")
        )
    except NotFound:
        return None


def save_badge_state(store: Store, user_id: str, state: BadgeState) -> None:
    store.put_document(BADGES, user_id, state.to_doc())


def get_badge_state(store: Store, user_id: str) -> BadgeState | None:
    try:
        return BadgeState.from_doc(store.get_document(BADGES, user_id))
    except NotFound:
        return None


def all_badge_states(store: Store) -> list[BadgeState]:
    return [BadgeState.from_doc(doc) for _, doc in store.documents(BADGES)]
