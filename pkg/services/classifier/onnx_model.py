import json
import logging
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
import onnxruntime
from pydantic import BaseModel, Field, ValidationError, field_validator

from services.errors import ModelLoadError, ShapeMismatchError
from services.imaging import ImageRgb, resize_bilinear

from .base import LogisticCalibration, logistic_map

logger = logging.getLogger(__name__)

MODEL_INPUT_SIZE = 224
_IDENTITY = LogisticCalibration()


class ModelMetadata(BaseModel):
    """Normalization metadata; keys match the model's custom metadata or sidecar JSON"""

    channel_mean: List[float] = Field(min_length=3, max_length=3)
    channel_std: List[float] = Field(min_length=3, max_length=3)
    output_arity: Optional[int] = None

    @field_validator("channel_std")
    @classmethod
    def _positive_std(cls, v: List[float]) -> List[float]:
        if any(s <= 0 for s in v):
            raise ValueError("channel_std entries must be positive")
        return v

    @field_validator("output_arity")
    @classmethod
    def _arity(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and v not in (1, 2):
            raise ValueError("output_arity must be 1 or 2")
        return v


def _read_metadata(session: onnxruntime.InferenceSession, model_path: Path) -> ModelMetadata:
    embedded = session.get_modelmeta().custom_metadata_map or {}
    raw = {}
    for key in ("channel_mean", "channel_std", "output_arity"):
        if key in embedded:
            raw[key] = json.loads(embedded[key])

    sidecar = model_path.with_suffix(".json")
    if not {"channel_mean", "channel_std"} <= raw.keys() and sidecar.exists():
        logger.info(f"Reading model metadata from sidecar {sidecar}")
        try:
            raw = {**json.loads(sidecar.read_text(encoding="utf-8")), **raw}
        except (OSError, json.JSONDecodeError) as e:
            raise ModelLoadError(f"unreadable metadata sidecar {sidecar}: {e}") from e
    try:
        return ModelMetadata.model_validate(raw)
    except ValidationError as e:
        raise ModelLoadError(f"invalid or missing normalization metadata for {model_path}: {e}") from e


class OnnxModelScorer:
    """
    Adapter for an externally trained network serialized as ONNX.

    The network takes a (1, 3, 224, 224) float32 tensor and returns 1 logit
    (sigmoid) or 2 logits (softmax, index 1 is the positive class).
    """

    # onnxruntime sessions support concurrent run() calls
    thread_safe = True

    def __init__(self, model_path: Union[str, Path], intra_op_threads: int = 1):
        self.model_path = Path(model_path)
        options = onnxruntime.SessionOptions()
        options.intra_op_num_threads = intra_op_threads
        try:
            self.session = onnxruntime.InferenceSession(
                str(self.model_path), sess_options=options, providers=["CPUExecutionProvider"]
            )
        except Exception as e:
            raise ModelLoadError(f"cannot load model {self.model_path}: {e}") from e

        self.metadata = _read_metadata(self.session, self.model_path)
        model_input = self.session.get_inputs()[0]
        self.input_name = model_input.name
        self._check_input_shape(model_input.shape)
        self.output_arity = self.metadata.output_arity or self._infer_arity()
        self._mean = np.asarray(self.metadata.channel_mean, dtype=np.float32).reshape(3, 1, 1)
        self._std = np.asarray(self.metadata.channel_std, dtype=np.float32).reshape(3, 1, 1)
        logger.info(f"Loaded model {self.model_path.name} (input {self.input_name}, arity {self.output_arity})")

    def _check_input_shape(self, shape) -> None:
        expected = (1, 3, MODEL_INPUT_SIZE, MODEL_INPUT_SIZE)
        if len(shape) != 4:
            raise ShapeMismatchError(f"model input rank {len(shape)} != 4")
        for got, want in zip(shape, expected):
            if isinstance(got, int) and got != want:
                raise ShapeMismatchError(f"model input shape {shape} incompatible with {expected}")

    def _infer_arity(self) -> Optional[int]:
        shape = self.session.get_outputs()[0].shape
        last = shape[-1] if shape else 1
        return last if isinstance(last, int) else None

    def preprocess(self, img: ImageRgb) -> np.ndarray:
        resized = resize_bilinear(img, MODEL_INPUT_SIZE, MODEL_INPUT_SIZE)
        chw = resized.normalized().astype(np.float32).transpose(2, 0, 1)
        return ((chw - self._mean) / self._std)[np.newaxis, ...]

    def logits(self, img: ImageRgb) -> np.ndarray:
        try:
            out = self.session.run(None, {self.input_name: self.preprocess(img)})[0]
        except Exception as e:
            raise ShapeMismatchError(f"model rejected preprocessed tensor: {e}") from e
        return np.asarray(out, dtype=np.float64).reshape(-1)

    def score(self, img: ImageRgb) -> float:
        out = self.logits(img)
        if self.output_arity not in (1, 2) or out.size != self.output_arity:
            raise ShapeMismatchError(f"model returned {out.size} outputs, metadata says {self.output_arity}")
        if self.output_arity == 1:
            return logistic_map(float(out[0]), _IDENTITY)
        # two-way softmax reduces to a sigmoid of the logit difference
        return logistic_map(float(out[1] - out[0]), _IDENTITY)

    def __repr__(self) -> str:
        return f"OnnxModelScorer({self.model_path.name})"


def external_model_score(model_handle: OnnxModelScorer, img: ImageRgb) -> float:
    return model_handle.score(img)
