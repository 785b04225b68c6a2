import math

import pytest
from httpx import ASGITransport, AsyncClient

from main import app
from app.db import csv_store
from app.services.asdm_service import encode_meds
from app.services.experiment_service import build_signal

BASE_URL = "http://test"
IN_RANGE = "seed=3\nsignal.amplitude=3\nsignal.duration=0.1\n"


def client():
    return AsyncClient(transport=ASGITransport(app=app), base_url=BASE_URL)


def trigger_csv_text(config, tmp_path):
    _, _, triggers = encode_meds(build_signal(config), config.modulo, config.asdm)
    return csv_store.write_triggers(tmp_path / "triggers.csv", triggers).read_bytes()


@pytest.mark.asyncio
async def test_root():
    async with client() as ac:
        response = await ac.get("/")
    assert response.status_code == 200
    assert response.json()["message"].startswith("Welcome to")


@pytest.mark.asyncio
async def test_dynamic_range():
    async with client() as ac:
        response = await ac.get("/api/v1/signals/dynamic-range",
                                params={"delta": 2.5e-3, "b": 9.0, "omega": 150.0})
        missing = await ac.get("/api/v1/signals/dynamic-range", params={"delta": 2.5e-3, "b": 9.0})
        negative = await ac.get("/api/v1/signals/dynamic-range",
                                params={"delta": -1.0, "b": 9.0, "omega": 150.0})
    assert response.status_code == 200
    assert response.json()["g_max"] == pytest.approx(9.0 - 0.75 / math.pi)
    assert missing.status_code == 422
    assert negative.status_code == 422


@pytest.mark.asyncio
async def test_signal_summary():
    async with client() as ac:
        response = await ac.post("/api/v1/signals/summary", json={"seed": 0})
    assert response.status_code == 200
    data = response.json()
    assert data["peak"] == pytest.approx(34.6, rel=1e-2)
    assert data["coefficient_count"] > 0


@pytest.mark.asyncio
async def test_check_conditions():
    async with client() as ac:
        response = await ac.post("/api/v1/experiments/check", json={"g_sup": 34.6})
    assert response.status_code == 200
    data = response.json()
    assert data["order"] == 3
    assert data["g_sup"] == 34.6
    assert data["C"] == pytest.approx(13.38 / 4.62)


@pytest.mark.asyncio
async def test_invalid_config_is_rejected():
    async with client() as ac:
        response = await ac.post("/api/v1/experiments/simulate", json={"threshold": 8.9})
    assert response.status_code == 422


@pytest.mark.asyncio
async def test_simulate_in_range(in_range_config, output_dir):
    async with client() as ac:
        response = await ac.post("/api/v1/experiments/simulate", json=in_range_config.model_dump())
    assert response.status_code == 200
    data = response.json()
    assert data["fold_count"] == 0
    assert data["failure"] is None
    assert data["output_dir"] is None
    assert not any(output_dir.iterdir())


@pytest.mark.asyncio
async def test_sweep_rejects_inverted_range(in_range_config):
    request = {"config": in_range_config.model_dump(), "delta_min": 3e-3, "delta_max": 1e-3, "count": 3}
    async with client() as ac:
        response = await ac.post("/api/v1/experiments/sweep", json=request)
    assert response.status_code == 422


@pytest.mark.asyncio
async def test_recover_upload(in_range_config, output_dir, tmp_path):
    content = trigger_csv_text(in_range_config, tmp_path)
    async with client() as ac:
        response = await ac.post(
            "/api/v1/recover/",
            files={"triggers": ("triggers.csv", content, "text/csv")},
            data={"config": IN_RANGE},
        )
    assert response.status_code == 200, response.text
    data = response.json()
    assert data["source"] == "upload"
    assert data["report"]["trigger_count"] > 100
    assert data["report"]["detection"]["folds"] == []
    assert not any((output_dir / "uploads" / "triggers").iterdir())


@pytest.mark.asyncio
async def test_recover_upload_errors(output_dir):
    corrupted = b"k,t\n0,0.1\n1,0.05\n"
    async with client() as ac:
        bad_file = await ac.post("/api/v1/recover/", files={"triggers": ("t.csv", corrupted, "text/csv")})
        bad_type = await ac.post("/api/v1/recover/", files={"triggers": ("t.png", corrupted, "image/png")})
        bad_config = await ac.post(
            "/api/v1/recover/",
            files={"triggers": ("t.csv", corrupted, "text/csv")},
            data={"config": "modulo.colour=red\n"},
        )
    assert bad_file.status_code == 400
    assert "not strictly increasing" in bad_file.json()["detail"]
    assert bad_type.status_code == 400
    assert bad_config.status_code == 422
