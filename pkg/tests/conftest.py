from __future__ import annotations

from dataclasses import replace
from datetime import date, datetime, time

import pytest

from wastenot.config import default_app_config
from wastenot.service import create_app
from wastenot.simulate import SimClock
from wastenot.store import Store

#: Mid-campaign instant (campaign timezone is Asia/Hong_Kong).
CAMPAIGN_DAY_ONE = date(2023, 3, 20)


@pytest.fixture
def app_config():
    # Few hash iterations keep the suite fast; production default is 100k.
    return replace(default_app_config(), pbkdf2_iterations=1_000, admin_token="test-admin")


@pytest.fixture
def sim_clock(app_config):
    tz = app_config.campaign.tzinfo
    return SimClock(datetime.combine(CAMPAIGN_DAY_ONE, time(12, 0), tzinfo=tz))


@pytest.fixture
def store():
    return Store.memory()


@pytest.fixture
def client(app_config, store, sim_clock):
    from fastapi.testclient import TestClient

    app = create_app(app_config, store=store, clock=sim_clock)
    with TestClient(app) as test_client:
        yield test_client


def register_and_login(client, email="user@example.test", password="hunter2hunter2", name="User"):
    response = client.post(
        "/api/register", json={"email": email, "display_name": name, "password": password}
    )
    assert response.status_code == 201, response.text
    user_id = response.json()["user_id"]
    response = client.post("/api/login", json={"email": email, "password": password})
    assert response.status_code == 200, response.text
    return user_id, response.json()["token"]


def auth(token: str) -> dict:
    return {"Authorization": f"Bearer {token}"}


JPEG_BYTES = b"\xff\xd8\xff\xe0" + b"fixture-photo" * 10 + b"\xff\xd9"


def submit_record(client, token, scores=(100, 90, 80), photo=JPEG_BYTES, name="meal.jpg"):
    rice, meat, vegetables = scores
    return client.post(
        "/api/records",
        headers=auth(token),
        files={"photo": (name, photo, "image/jpeg")},
        data={"rice": str(rice), "meat": str(meat), "vegetables": str(vegetables)},
    )
