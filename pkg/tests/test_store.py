from __future__ import annotations

import threading
import uuid
from datetime import date, datetime, time, timezone

import pytest

from wastenot import store as storage
from wastenot.domain import CompletionScores, MealRecord, User
from wastenot.ingest import TrayObservation, default_profile, generate_synthetic_day
from wastenot.store import (
    BlobTooLarge,
    DuplicateTray,
    InvalidRange,
    NotFound,
    Store,
)


def make_record(user_id, day, hour=12, scores=(80, 80, 80)):
    return MealRecord(
        record_id=uuid.uuid4().hex,
        user_id=user_id,
        submitted_at=datetime.combine(day, time(hour), tzinfo=timezone.utc),
        local_date=day,
        scores=CompletionScores(*scores),
        photo_ref="ph",
    )


@pytest.fixture(params=["memory", "file"])
def any_store(request, tmp_path):
    if request.param == "memory":
        return Store.memory()
    return Store.open(tmp_path / "data")


class TestDocuments:
    def test_put_get_round_trip(self, any_store):
        any_store.put_document("things", "k", {"a": 1, "b": [1, 2, 3]})
        assert any_store.get_document("things", "k") == {"a": 1, "b": [1, 2, 3]}

    def test_last_write_wins(self, any_store):
        v1 = any_store.put_document("things", "k", {"n": 1})
        v2 = any_store.put_document("things", "k", {"n": 2})
        assert v2 > v1
        assert any_store.get_document("things", "k") == {"n": 2}

    def test_unknown_key(self, any_store):
        with pytest.raises(NotFound):
            any_store.get_document("things", "missing")

    def test_keys_with_awkward_characters(self, any_store):
        key = "user@example.test/../{weird} key"
        any_store.put_document("things", key, {"ok": True})
        assert any_store.get_document("things", key) == {"ok": True}
        assert dict(any_store.documents("things"))[key] == {"ok": True}

    def test_delete(self, any_store):
        any_store.put_document("things", "k", {"n": 1})
        any_store.delete_document("things", "k")
        assert not any_store.has_document("things", "k")

    def test_stored_value_is_isolated(self, any_store):
        value = {"nested": {"n": 1}}
        any_store.put_document("things", "k", value)
        value["nested"]["n"] = 999
        assert any_store.get_document("things", "k") == {"nested": {"n": 1}}


class TestDurability:
    def test_survives_reopen(self, tmp_path):
        path = tmp_path / "data"
        first = Store.open(path)
        first.put_document("users", "u1", {"name": "A"})
        ref = first.put_blob(b"photo-bytes", "image/jpeg")

        second = Store.open(path)
        assert second.get_document("users", "u1") == {"name": "A"}
        data, content_type = second.get_blob(ref.key)
        assert data == b"photo-bytes" and content_type == "image/jpeg"

    def test_domain_round_trip_through_file_store(self, tmp_path):
        store = Store.open(tmp_path / "data")
        user = User(
            user_id="u1",
            email="a@b.test",
            display_name="A",
            password_hash=b"\x00\x01\xff",
            registered_at=datetime(2023, 3, 20, 4, tzinfo=timezone.utc),
        )
        storage.save_user(store, user)
        assert storage.get_user(store, "u1") == user
        assert storage.find_user_by_email(store, "A@B.test") == user

        record = make_record("u1", date(2023, 3, 20))
        storage.save_record(store, record)
        assert storage.records_for_user(store, "u1") == [record]


class TestBlobs:
    def test_round_trip(self, any_store):
        payload = bytes(range(256)) * 4
        ref = any_store.put_blob(payload, "image/png")
        data, content_type = any_store.get_blob(ref.key)
        assert data == payload
        assert content_type == "image/png"
        assert ref.size_bytes == len(payload)

    def test_too_large(self, tmp_path):
        store = Store.open(tmp_path / "data", max_blob_bytes=10)
        with pytest.raises(BlobTooLarge):
            store.put_blob(b"x" * 11, "image/jpeg")

    def test_unknown_key(self, any_store):
        with pytest.raises(NotFound):
            any_store.get_blob("0" * 64)

    def test_content_addressing_dedupes(self, any_store):
        ref1 = any_store.put_blob(b"same-bytes", "image/jpeg")
        ref2 = any_store.put_blob(b"same-bytes", "image/jpeg")
        assert ref1.key == ref2.key


class TestQueryRecords:
    def test_empty(self, any_store):
        assert storage.query_records(any_store, "u1") == []

    def test_range_filter_and_order(self, any_store):
        r1 = make_record("u1", date(2023, 3, 20), hour=9)
        r2 = make_record("u1", date(2023, 3, 21), hour=9)
        r3 = make_record("u1", date(2023, 3, 25), hour=9)
        other = make_record("u2", date(2023, 3, 21), hour=10)
        for r in (r1, r2, r3, other):
            storage.save_record(any_store, r)
        got = storage.query_records(any_store, "u1", date(2023, 3, 20), date(2023, 3, 21))
        assert got == [r2, r1]  # newest first

    def test_newest_first_within_day(self, any_store):
        early = make_record("u1", date(2023, 3, 20), hour=8)
        late = make_record("u1", date(2023, 3, 20), hour=20)
        storage.save_record(any_store, early)
        storage.save_record(any_store, late)
        assert storage.query_records(any_store, "u1") == [late, early]

    def test_inverted_range(self, any_store):
        with pytest.raises(InvalidRange):
            storage.query_records(any_store, "u1", date(2023, 3, 22), date(2023, 3, 20))


class TestObservations:
    def test_duplicate_tray_same_day_rejected(self, any_store):
        obs = generate_synthetic_day(1, date(2023, 3, 20), default_profile(1))[0]
        storage.save_observation(any_store, obs)
        with pytest.raises(DuplicateTray):
            storage.save_observation(any_store, obs)

    def test_same_tray_id_next_day_allowed(self, any_store):
        day1 = generate_synthetic_day(1, date(2023, 3, 20), default_profile(1))[0]
        storage.save_observation(any_store, day1)
        day2 = TrayObservation(
            tray_id=day1.tray_id,
            observed_at=day1.observed_at,
            local_date=date(2023, 3, 21),
            areas_px=day1.areas_px,
        )
        storage.save_observation(any_store, day2)
        assert len(storage.observations_for_day(any_store, date(2023, 3, 21))) == 1

    def test_observations_for_day_filters(self, any_store):
        for day in (date(2023, 3, 20), date(2023, 3, 21)):
            for obs in generate_synthetic_day(3, day, default_profile(4)):
                storage.save_observation(any_store, obs)
        got = storage.observations_for_day(any_store, date(2023, 3, 20))
        assert len(got) == 4
        assert all(o.local_date == date(2023, 3, 20) for o in got)


class TestConcurrency:
    def test_parallel_writers_distinct_keys(self, tmp_path):
        store = Store.open(tmp_path / "data")
        errors = []

        def write(i):
            try:
                store.put_document("bulk", f"k{i}", {"i": i})
            except Exception as exc:  # pragma: no cover
                errors.append(exc)

        threads = [threading.Thread(target=write, args=(i,)) for i in range(50)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert errors == []
        assert len(list(store.documents("bulk"))) == 50

    def test_put_if_absent_admits_exactly_one_writer(self, any_store):
        results = []

        def attempt(i):
            results.append(any_store.put_document_if_absent("claims", "k", {"i": i}))

        threads = [threading.Thread(target=attempt, args=(i,)) for i in range(20)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert sum(results) == 1

    def test_parallel_writers_one_key(self, any_store):
        def write(i):
            any_store.put_document("contended", "k", {"i": i})

        threads = [threading.Thread(target=write, args=(i,)) for i in range(20)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        value = any_store.get_document("contended", "k")
        assert value["i"] in range(20)
