from typing import Callable, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from services.aggregation import StrategyId, default_edge_mode
from services.classifier import LogisticCalibration
from services.imaging import ImageRgb
from services.slicing import EdgeMode


ImageLoader = Callable[[str], ImageRgb]


class RunConfig(BaseModel):
    """One gate run: which images, which scorer, and how fragments are made and combined"""

    model_config = ConfigDict(frozen=True)

    manifest: Optional[str] = None
    scorer: Literal["baseline", "onnx"] = "baseline"
    model: Optional[str] = None
    calibration: Optional[LogisticCalibration] = None
    strategy: StrategyId = StrategyId.RGB_VAR
    patch_size: int = Field(default=500, ge=1)
    edge_mode: Optional[EdgeMode] = None
    crop_size: Optional[int] = Field(default=None, ge=1)
    input_size: Optional[int] = Field(default=None, ge=1)
    seed: int = 0
    threshold: float = Field(default=0.5, ge=0.0, le=1.0)
    workers: int = Field(default=1, ge=1)
    gate: Literal["quality", "validity"] = "quality"

    def needs_calibration(self) -> bool:
        return self.scorer == "baseline" and self.calibration is None

    def resolved_edge_mode(self) -> EdgeMode:
        return self.edge_mode or default_edge_mode(self.strategy) or EdgeMode.DROP_PARTIAL

    def with_(self, **changes) -> "RunConfig":
        return self.model_copy(update=changes)

    @classmethod
    def from_settings(cls, settings, **overrides) -> "RunConfig":
        """Defaults from ``AppSettings``; overrides that are None fall back to the settings"""
        data = {
            "scorer": settings.scorer.kind,
            "model": settings.scorer.model_path,
            "calibration": settings.scorer.calibration,
            "strategy": settings.slicing.strategy,
            "patch_size": settings.slicing.patch_size,
            "edge_mode": settings.slicing.edge_mode,
            "crop_size": settings.harness.crop_size,
            "input_size": settings.harness.input_size,
            "seed": settings.harness.seed,
            "threshold": settings.harness.threshold,
            "workers": settings.harness.workers,
        }
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls.model_validate(data)
