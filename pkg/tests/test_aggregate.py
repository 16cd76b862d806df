from __future__ import annotations

import random
from datetime import date, datetime, time, timezone
from zoneinfo import ZoneInfo

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import daily_oracle, largest_remainder_oracle
from wastenot import store as storage
from wastenot.aggregate import (
    AllZero,
    Aggregator,
    DailyAggregate,
    DailyScheduler,
    MixedMonths,
    SEVERITY_ORDER,
    SeverityLevel,
    SeverityThresholds,
    allocate_bowls,
    classify_severity,
    daily_aggregate,
    integer_percent,
    monthly_aggregate,
)
from wastenot.domain import CATEGORY_ORDER, FoodCategory
from wastenot.estimator import LinearModel
from wastenot.ingest import TrayObservation
from wastenot.store import Store

DEFAULTS = SeverityThresholds()  # medium >= 50 g, severe >= 150 g
HK = ZoneInfo("Asia/Hong_Kong")


def tray(day, tray_id, rice=0, meat=0, vegetables=0, hour=12):
    observed = datetime.combine(day, time(hour, 0), tzinfo=HK).astimezone(timezone.utc)
    return TrayObservation(
        tray_id=tray_id,
        observed_at=observed,
        local_date=day,
        areas_px={
            FoodCategory.RICE: rice,
            FoodCategory.MEAT: meat,
            FoodCategory.VEGETABLES: vegetables,
        },
    )


class TestClassifySeverity:
    @pytest.mark.parametrize(
        "grams,expected",
        [
            (0.0, SeverityLevel.LIGHT),
            (49.999, SeverityLevel.LIGHT),
            (50.0, SeverityLevel.MEDIUM),
            (149.999, SeverityLevel.MEDIUM),
            (150.0, SeverityLevel.SEVERE),
            (10_000.0, SeverityLevel.SEVERE),
        ],
    )
    def test_boundaries(self, grams, expected):
        assert classify_severity(grams, DEFAULTS) is expected

    @given(w1=st.floats(0, 1000), w2=st.floats(0, 1000))
    def test_monotone(self, w1, w2):
        if w1 > w2:
            w1, w2 = w2, w1
        assert classify_severity(w1, DEFAULTS).rank <= classify_severity(w2, DEFAULTS).rank

    def test_threshold_validation(self):
        with pytest.raises(ValueError):
            SeverityThresholds(medium_min_g=100, severe_min_g=50)
        with pytest.raises(ValueError):
            SeverityThresholds(medium_min_g=0, severe_min_g=50)


class TestAllocateBowls:
    def test_single_level(self):
        bowls = allocate_bowls({SeverityLevel.LIGHT: 42}, 42)
        assert len(bowls) == 100
        assert all(cell is SeverityLevel.LIGHT for cell in bowls)

    def test_equal_thirds_tie_break(self):
        bowls = allocate_bowls(
            {SeverityLevel.SEVERE: 1, SeverityLevel.MEDIUM: 1, SeverityLevel.LIGHT: 1}, 3
        )
        assert bowls.count(SeverityLevel.SEVERE) == 34  # tie goes to worst first
        assert bowls.count(SeverityLevel.MEDIUM) == 33
        assert bowls.count(SeverityLevel.LIGHT) == 33

    def test_exact_quarters(self):
        bowls = allocate_bowls(
            {SeverityLevel.SEVERE: 1, SeverityLevel.MEDIUM: 0, SeverityLevel.LIGHT: 3}, 4
        )
        assert bowls.count(SeverityLevel.SEVERE) == 25
        assert bowls.count(SeverityLevel.MEDIUM) == 0
        assert bowls.count(SeverityLevel.LIGHT) == 75

    def test_grouped_worst_first(self):
        bowls = allocate_bowls(
            {SeverityLevel.SEVERE: 2, SeverityLevel.MEDIUM: 1, SeverityLevel.LIGHT: 1}, 4
        )
        severe_cells = bowls.count(SeverityLevel.SEVERE)
        medium_cells = bowls.count(SeverityLevel.MEDIUM)
        assert all(cell is SeverityLevel.SEVERE for cell in bowls[:severe_cells])
        assert all(
            cell is SeverityLevel.MEDIUM
            for cell in bowls[severe_cells : severe_cells + medium_cells]
        )

    def test_count_mismatch_rejected(self):
        with pytest.raises(ValueError):
            allocate_bowls({SeverityLevel.LIGHT: 1}, 2)

    def test_matches_oracle_and_deviation_bound(self):
        rng = random.Random(31337)
        for _ in range(500):
            counts = [rng.randint(0, 400) for _ in range(3)]
            if sum(counts) == 0:
                counts[rng.randrange(3)] = 1
            total = sum(counts)
            bowls = allocate_bowls(
                dict(zip(SEVERITY_ORDER, counts)), total
            )
            assert len(bowls) == 100
            expected = largest_remainder_oracle(counts, 100)
            for level, count, want in zip(SEVERITY_ORDER, counts, expected):
                got = bowls.count(level)
                assert got == want
                assert abs(got - count / total * 100) < 1.0


class TestIntegerPercent:
    def test_single_category(self):
        assert integer_percent({FoodCategory.RICE: 1000, FoodCategory.MEAT: 0, FoodCategory.VEGETABLES: 0}) == {
            FoodCategory.RICE: 100,
            FoodCategory.MEAT: 0,
            FoodCategory.VEGETABLES: 0,
        }

    def test_equal_thirds_tie_break_category_order(self):
        percent = integer_percent(
            {FoodCategory.RICE: 1, FoodCategory.MEAT: 1, FoodCategory.VEGETABLES: 1}
        )
        assert percent[FoodCategory.RICE] == 34  # rice first on remainder ties
        assert percent[FoodCategory.MEAT] == 33
        assert percent[FoodCategory.VEGETABLES] == 33

    def test_all_zero(self):
        with pytest.raises(AllZero):
            integer_percent({c: 0 for c in CATEGORY_ORDER})

    @given(
        rice=st.floats(0, 1e9),
        meat=st.floats(0, 1e9),
        vegetables=st.floats(0, 1e9),
    )
    def test_sums_to_100(self, rice, meat, vegetables):
        if rice + meat + vegetables == 0:
            return
        percent = integer_percent(
            {FoodCategory.RICE: rice, FoodCategory.MEAT: meat, FoodCategory.VEGETABLES: vegetables}
        )
        assert sum(percent.values()) == 100


MODEL_TENTH = LinearModel(slope=0.1, intercept=0.0, r_squared=1.0, n_samples=2)


class TestDailyAggregate:
    def test_empty_day(self):
        agg = daily_aggregate(date(2023, 3, 20), [], MODEL_TENTH, DEFAULTS)
        assert agg.total_trays == 0
        assert agg.bowls == []
        assert agg.type_percent == {c: 0 for c in CATEGORY_ORDER}
        assert agg.total_waste_g == 0.0

    def test_three_trays_compose(self):
        # 400/1000/2000 px at 0.1 g/px -> 40/100/200 g -> light/medium/severe.
        day = date(2023, 3, 20)
        observations = [
            tray(day, "a", rice=400),
            tray(day, "b", rice=1000),
            tray(day, "c", rice=2000),
        ]
        agg = daily_aggregate(day, observations, MODEL_TENTH, DEFAULTS)
        assert agg.severity_counts == {
            SeverityLevel.SEVERE: 1,
            SeverityLevel.MEDIUM: 1,
            SeverityLevel.LIGHT: 1,
        }
        assert agg.bowls.count(SeverityLevel.SEVERE) == 34
        assert agg.bowls.count(SeverityLevel.MEDIUM) == 33
        assert agg.bowls.count(SeverityLevel.LIGHT) == 33
        assert agg.total_waste_g == pytest.approx(340.0)

    def test_type_percent_single_source(self):
        day = date(2023, 3, 20)
        agg = daily_aggregate(day, [tray(day, "a", rice=1000)], MODEL_TENTH, DEFAULTS)
        assert agg.type_percent == {
            FoodCategory.RICE: 100,
            FoodCategory.MEAT: 0,
            FoodCategory.VEGETABLES: 0,
        }

    def test_zero_area_day_keeps_zero_percents(self):
        day = date(2023, 3, 20)
        agg = daily_aggregate(day, [tray(day, "a")], MODEL_TENTH, DEFAULTS)
        assert agg.total_trays == 1
        assert agg.type_percent == {c: 0 for c in CATEGORY_ORDER}
        assert agg.bowls.count(SeverityLevel.LIGHT) == 100

    def test_wrong_date_rejected(self):
        day = date(2023, 3, 20)
        with pytest.raises(ValueError):
            daily_aggregate(day, [tray(date(2023, 3, 21), "a")], MODEL_TENTH, DEFAULTS)

    def test_counts_sum_to_total(self):
        rng = random.Random(5)
        day = date(2023, 3, 20)
        for _ in range(50):
            observations = [
                tray(day, f"t{i}", rice=rng.randint(0, 3000), meat=rng.randint(0, 1500))
                for i in range(rng.randint(0, 20))
            ]
            agg = daily_aggregate(day, observations, MODEL_TENTH, DEFAULTS)
            assert sum(agg.severity_counts.values()) == agg.total_trays == len(observations)

    def test_matches_brute_force(self):
        rng = random.Random(20230320)
        day = date(2023, 3, 20)
        for _ in range(200):
            observations = [
                tray(
                    day,
                    f"t{i}",
                    rice=rng.randint(0, 4000),
                    meat=rng.randint(0, 2000),
                    vegetables=rng.randint(0, 1500),
                )
                for i in range(rng.randint(0, 20))
            ]
            agg = daily_aggregate(day, observations, MODEL_TENTH, DEFAULTS)
            want = daily_oracle(observations, 0.1, 0.0, 50.0, 150.0)
            assert agg.total_trays == want["total_trays"]
            assert {l.value: n for l, n in agg.severity_counts.items()} == want["severity_counts"]
            assert [b.value for b in agg.bowls] == want["bowls"]
            assert {c.value: p for c, p in agg.type_percent.items()} == want["type_percent"]
            assert agg.total_waste_g == pytest.approx(want["total_waste_g"], rel=1e-12)

    def test_doc_round_trip(self):
        day = date(2023, 3, 20)
        agg = daily_aggregate(day, [tray(day, "a", rice=1200, meat=300)], MODEL_TENTH, DEFAULTS)
        assert DailyAggregate.from_doc(agg.to_doc()) == agg


class TestMonthlyAggregate:
    def make_daily(self, day, severe=0, medium=0, light=0):
        counts = {
            SeverityLevel.SEVERE: severe,
            SeverityLevel.MEDIUM: medium,
            SeverityLevel.LIGHT: light,
        }
        total = severe + medium + light
        return DailyAggregate(
            day=day,
            total_trays=total,
            severity_counts=counts,
            bowls=allocate_bowls(counts, total) if total else [],
            type_percent={c: 0 for c in CATEGORY_ORDER},
            total_waste_g=0.0,
            computed_at=datetime(2023, 3, 31, tzinfo=timezone.utc),
        )

    def test_empty(self):
        monthly = monthly_aggregate([], year=2023, month=3)
        assert monthly.entries == []
        assert (monthly.year, monthly.month) == (2023, 3)

    def test_pass_through(self):
        dailies = [
            self.make_daily(date(2023, 3, 20), severe=1, medium=1, light=1),
            self.make_daily(date(2023, 3, 21), light=5),
        ]
        monthly = monthly_aggregate(dailies)
        assert len(monthly.entries) == 2
        assert monthly.entries[0].severity_counts[SeverityLevel.SEVERE] == 1
        assert monthly.entries[1].severity_counts[SeverityLevel.LIGHT] == 5

    def test_mixed_months_rejected(self):
        dailies = [self.make_daily(date(2023, 3, 31)), self.make_daily(date(2023, 4, 1))]
        with pytest.raises(MixedMonths):
            monthly_aggregate(dailies)

    def test_entries_sorted_by_date(self):
        dailies = [
            self.make_daily(date(2023, 3, 25), light=1),
            self.make_daily(date(2023, 3, 20), light=1),
        ]
        monthly = monthly_aggregate(dailies)
        assert [e.day for e in monthly.entries] == [date(2023, 3, 20), date(2023, 3, 25)]


class TestRunDailyJob:
    def make_aggregator(self, store):
        return Aggregator(store, MODEL_TENTH, DEFAULTS)

    def seed_observations(self, store, day, specs):
        for i, areas in enumerate(specs):
            storage.save_observation(store, tray(day, f"t{i}", **areas))

    def test_idempotent(self):
        store = Store.memory()
        day = date(2023, 3, 20)
        self.seed_observations(store, day, [{"rice": 400}, {"rice": 1000}, {"rice": 2000}])
        aggregator = self.make_aggregator(store)
        first = aggregator.run_daily_job(day)
        second = aggregator.run_daily_job(day)
        first_doc, second_doc = first.to_doc(), second.to_doc()
        first_doc.pop("computed_at"), second_doc.pop("computed_at")
        assert first_doc == second_doc
        stored = storage.get_daily(store, day)
        stored_doc = stored.to_doc()
        stored_doc.pop("computed_at")
        assert stored_doc == second_doc

    def test_empty_day_stored(self):
        store = Store.memory()
        aggregator = self.make_aggregator(store)
        day = date(2023, 3, 20)
        aggregator.run_daily_job(day)
        stored = storage.get_daily(store, day)
        assert stored is not None and stored.total_trays == 0

    def test_extra_tray_reflected(self):
        store = Store.memory()
        day = date(2023, 3, 20)
        self.seed_observations(store, day, [{"rice": 400}])
        aggregator = self.make_aggregator(store)
        before = aggregator.run_daily_job(day)
        storage.save_observation(store, tray(day, "extra", rice=2500))
        after = aggregator.run_daily_job(day)
        assert after.total_trays == before.total_trays + 1
        want = daily_oracle(storage.observations_for_day(store, day), 0.1, 0.0, 50.0, 150.0)
        assert after.total_trays == want["total_trays"]
        assert [b.value for b in after.bowls] == want["bowls"]

    def test_monthly_refreshed(self):
        store = Store.memory()
        aggregator = self.make_aggregator(store)
        self.seed_observations(store, date(2023, 3, 20), [{"rice": 400}])
        self.seed_observations(store, date(2023, 3, 21), [{"rice": 2000}])
        aggregator.run_daily_job(date(2023, 3, 20))
        aggregator.run_daily_job(date(2023, 3, 21))
        monthly = storage.get_monthly(store, 2023, 3)
        assert [e.day.day for e in monthly.entries] == [20, 21]

    def test_single_flight_under_concurrency(self):
        import threading

        store = Store.memory()
        day = date(2023, 3, 20)
        self.seed_observations(store, day, [{"rice": r} for r in range(0, 3000, 150)])
        aggregator = self.make_aggregator(store)
        errors = []

        def run():
            try:
                aggregator.run_daily_job(day)
            except Exception as exc:  # pragma: no cover - failure reporting
                errors.append(exc)

        threads = [threading.Thread(target=run) for _ in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert errors == []
        stored = storage.get_daily(store, day)
        assert stored.total_trays == 20


class TestScheduler:
    def test_next_fire_same_day(self):
        aggregator = Aggregator(Store.memory(), MODEL_TENTH, DEFAULTS)
        scheduler = DailyScheduler(aggregator, HK, run_at=time(0, 10))
        now = datetime(2023, 3, 20, 15, 0, tzinfo=timezone.utc)  # 23:00 HK
        fire = scheduler.next_fire(now)
        assert fire.astimezone(HK).date() == date(2023, 3, 21)
        assert fire.astimezone(HK).time() == time(0, 10)

    def test_next_fire_rolls_to_tomorrow(self):
        aggregator = Aggregator(Store.memory(), MODEL_TENTH, DEFAULTS)
        scheduler = DailyScheduler(aggregator, HK, run_at=time(0, 10))
        now = datetime(2023, 3, 20, 0, 15, tzinfo=HK)
        fire = scheduler.next_fire(now)
        assert fire.astimezone(HK).date() == date(2023, 3, 21)

    def test_start_stop(self):
        aggregator = Aggregator(Store.memory(), MODEL_TENTH, DEFAULTS)
        scheduler = DailyScheduler(aggregator, HK)
        scheduler.start()
        scheduler.stop()  # must not hang
