import asyncio
import json

import pytest
from fastapi.testclient import TestClient

from services.aggregation import StrategyId
from services.app_settings import AppSettings, ConfigManager, config_manager
from services.harness import RunConfig
from services.imaging import save_png
from services.slicing import EdgeMode

from .conftest import noise_image


def test_defaults_when_file_missing(tmp_path):
    manager = ConfigManager(str(tmp_path / "missing.json"))
    settings = asyncio.run(manager.load())
    assert settings.slicing.patch_size == 500
    assert settings.slicing.strategy is StrategyId.RGB_VAR
    assert settings.plan.batch_size == 16


def test_update_persists_and_reloads(tmp_path):
    path = tmp_path / "cfg.json"
    manager = ConfigManager(str(path))
    manager.load_sync()
    asyncio.run(manager.update({"slicing": {"patch_size": 1250}, "scorer": {"calibration": {"midpoint": 3.0}}}))
    on_disk = json.loads(path.read_text())
    assert on_disk["slicing"]["patch_size"] == 1250
    assert on_disk["slicing"]["strategy"] == "rgb_var"

    reloaded = ConfigManager(str(path)).load_sync()
    assert reloaded.slicing.patch_size == 1250
    assert reloaded.scorer.calibration.midpoint == 3.0
    assert reloaded.scorer.calibration.scale == 1.0


def test_corrupt_file_falls_back_to_defaults(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text("{not json")
    assert ConfigManager(str(path)).load_sync() == AppSettings()


def test_environment_overrides(monkeypatch, tmp_path):
    monkeypatch.setenv("CYTOGATE_HARNESS__WORKERS", "8")
    settings = ConfigManager(str(tmp_path / "none.json")).load_sync()
    assert settings.harness.workers == 8


def test_run_config_from_settings():
    settings = AppSettings(slicing={"patch_size": 300, "strategy": "sum_size"}, harness={"seed": 4})
    config = RunConfig.from_settings(settings, threshold=None, seed=9)
    assert (config.patch_size, config.strategy, config.seed, config.threshold) == (300, StrategyId.SUM_SIZE, 9, 0.5)
    assert config.resolved_edge_mode() is EdgeMode.PAD_PARTIAL


@pytest.fixture
def client(monkeypatch, tmp_path):
    from main import app

    monkeypatch.setattr(config_manager, "_file", tmp_path / "app_config.json")
    with TestClient(app) as test_client:
        yield test_client


def test_config_endpoints(client, tmp_path):
    assert client.get("/api/config/").json()["slicing"]["patch_size"] == 500

    response = client.patch("/api/config/", json={"slicing": {"patch_size": 40, "strategy": "sum"}})
    assert response.status_code == 200
    assert response.json()["slicing"] == {"patch_size": 40, "edge_mode": None, "strategy": "sum"}
    assert json.loads((tmp_path / "app_config.json").read_text())["slicing"]["patch_size"] == 40

    assert client.patch("/api/config/", json={"harness": {"threshold": 5}}).status_code == 400


def test_score_endpoint(client, tmp_path):
    png = save_png(noise_image(200, 200, seed=3), tmp_path / "upload.png").read_bytes()
    uncalibrated = client.post("/api/gate/score", content=png, params={"patch_size": 40})
    assert uncalibrated.status_code == 400
    assert "uncalibrated" in uncalibrated.json()["detail"]

    client.patch("/api/config/", json={"scorer": {"calibration": {"midpoint": 0.01, "scale": 0.005}}})
    response = client.post("/api/gate/score", content=png, params={"patch_size": 40, "strategy": "sum"})
    assert response.status_code == 200
    body = response.json()
    assert body["success"] is True
    assert body["data"]["edge_mode"] == "drop_partial"
    assert len(body["data"]["fragments"]) == 25
    assert 0.0 <= body["data"]["probability"] <= 1.0
    assert body["data"]["decision"] in ("positive", "negative")

    assert client.post("/api/gate/score", content=b"not an image").status_code == 400
    assert client.post("/api/gate/score", content=png, params={"patch_size": 400}).status_code == 400


def test_strategies_and_plan_endpoints(client):
    strategies = client.get("/api/gate/strategies").json()["data"]["strategies"]
    assert {s["id"] for s in strategies} == {s.value for s in StrategyId}

    plan = client.post("/api/gate/plan", json={"batch_size": 32}).json()["data"]
    assert plan["batch_size"] == 32 and plan["momentum"] == 0.9
    assert client.post("/api/gate/plan", json={"batch_size": 0}).status_code == 400
