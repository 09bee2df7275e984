import asyncio
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

import aiofiles
from pydantic import BaseModel, Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from services.aggregation import StrategyId
from services.classifier import LogisticCalibration
from services.datasets import ExperimentPlan
from services.imaging import VignetteParams
from services.slicing import EdgeMode

logger = logging.getLogger(__name__)


# --- Nested Config Models ---

class SlicingConfig(BaseModel):
    patch_size: int = Field(default=500, ge=1)
    edge_mode: Optional[EdgeMode] = None  # None: the strategy's own edge mode
    strategy: StrategyId = StrategyId.RGB_VAR


class ScorerConfig(BaseModel):
    kind: str = "baseline"  # baseline | onnx
    model_path: Optional[str] = None
    calibration: Optional[LogisticCalibration] = None  # None: fit from the labeled manifest being scored


class HarnessConfig(BaseModel):
    threshold: float = Field(default=0.5, ge=0.0, le=1.0)
    workers: int = Field(default=4, ge=1)
    seed: int = 0
    crop_size: Optional[int] = Field(default=None, ge=1)
    input_size: Optional[int] = Field(default=None, ge=1)
    output_dir: str = "reports"


# --- Root Settings Model ---

class AppSettings(BaseSettings):
    """ The main settings object, nesting all configurations """
    model_config = SettingsConfigDict(
        env_prefix="CYTOGATE_",
        env_nested_delimiter='__',  # e.g., CYTOGATE_HARNESS__WORKERS=8
        env_file=None
    )
    imaging: VignetteParams = Field(default_factory=VignetteParams)
    slicing: SlicingConfig = Field(default_factory=SlicingConfig)
    scorer: ScorerConfig = Field(default_factory=ScorerConfig)
    harness: HarnessConfig = Field(default_factory=HarnessConfig)
    plan: ExperimentPlan = Field(default_factory=ExperimentPlan)


def _merge(a: Dict[str, Any], b: Dict[str, Any]) -> Dict[str, Any]:
    for key, value in b.items():
        if isinstance(value, dict) and key in a and isinstance(a[key], dict):
            a[key] = _merge(a[key], value)
        else:
            a[key] = value
    return a


# --- Config Manager to handle persistence ---

class ConfigManager:
    def __init__(self, storage_file: str = "data/app_config.json"):
        self._file = Path(storage_file)
        self.settings: AppSettings = AppSettings()
        self._save_lock = asyncio.Lock()

    @property
    def path(self) -> Path:
        return self._file

    def _parse(self, content: str) -> Dict[str, Any]:
        try:
            return json.loads(content) if content.strip() else {}
        except json.JSONDecodeError as e:
            logger.error(f"[ConfigManager] Error parsing config file {self._file}: {e}")
            return {}

    def _apply(self, config_from_file: Dict[str, Any]) -> AppSettings:
        # file values take precedence over CYTOGATE_* variables and defaults
        self.settings = AppSettings(**config_from_file)
        logger.info(f"[ConfigManager] Settings loaded from {self._file}")
        return self.settings

    async def load(self) -> AppSettings:
        config_from_file = {}
        if self._file.exists():
            try:
                async with aiofiles.open(self._file, "r") as f:
                    config_from_file = self._parse(await f.read())
            except OSError as e:
                logger.error(f"[ConfigManager] Error loading config file: {e}")
        return self._apply(config_from_file)

    def load_sync(self) -> AppSettings:
        """Blocking variant for the CLI, which runs outside an event loop"""
        config_from_file = {}
        if self._file.exists():
            try:
                config_from_file = self._parse(self._file.read_text(encoding="utf-8"))
            except OSError as e:
                logger.error(f"[ConfigManager] Error loading config file: {e}")
        return self._apply(config_from_file)

    async def save(self):
        async with self._save_lock:
            try:
                self._file.parent.mkdir(parents=True, exist_ok=True)
                tmp = self._file.with_suffix(".tmp.json")
                async with aiofiles.open(tmp, "w") as f:
                    await f.write(self.settings.model_dump_json(indent=2))
                tmp.replace(self._file)
            except OSError as e:
                logger.error(f"[ConfigManager] Error saving config file: {e}")

    async def update(self, data: Dict[str, Any]) -> AppSettings:
        merged_data = _merge(self.settings.model_dump(mode="json"), data)

        # Re-validate the entire structure
        self.settings = AppSettings.model_validate(merged_data)

        await self.save()
        return self.settings


config_manager = ConfigManager()
