import asyncio
import logging
from datetime import datetime
from typing import Any, Dict, List, Optional

from fastapi import APIRouter, Body, HTTPException, Query, Request
from pydantic import BaseModel, ValidationError

from services.aggregation import StrategyId, aggregate, decide, default_edge_mode
from services.app_settings import config_manager
from services.classifier import create_scorer, ensure_concurrent
from services.datasets import emit_experiment_plan
from services.errors import CytogateError
from services.harness import RunConfig, score_fragments
from services.imaging import decode_image
from services.slicing import EdgeMode

logger = logging.getLogger(__name__)

router = APIRouter(
    prefix="/api/gate",
    tags=["gate"],
    responses={404: {"description": "Not found"}},
)


class ApiResponse(BaseModel):
    success: bool
    message: str
    data: Optional[Dict[str, Any]] = None
    timestamp: str


@router.get("/strategies")
async def list_strategies():
    """Aggregation strategies and the edge mode each one slices with by default"""
    strategies: List[Dict[str, Any]] = []
    for strategy in StrategyId:
        mode = default_edge_mode(strategy)
        strategies.append({"id": strategy.value, "edge_mode": mode.value if mode else None})
    return ApiResponse(
        success=True,
        message=f"{len(strategies)} strategies",
        data={"strategies": strategies},
        timestamp=datetime.now().isoformat(),
    )


@router.post("/score")
async def score_image_bytes(
    request: Request,
    strategy: Optional[StrategyId] = Query(None),
    patch_size: Optional[int] = Query(None, ge=1),
    edge_mode: Optional[EdgeMode] = Query(None),
    threshold: Optional[float] = Query(None, ge=0.0, le=1.0),
    seed: Optional[int] = Query(None),
):
    """
    Score one image sent as the raw request body (PNG or JPEG).
    Returns every fragment's score, the aggregated probability and the decision.
    """
    try:
        settings = config_manager.settings
        config = RunConfig.from_settings(
            settings, strategy=strategy, patch_size=patch_size, edge_mode=edge_mode,
            threshold=threshold, seed=seed,
        )
        img = decode_image(await request.body())
        scorer = create_scorer(config.scorer, config.model, config.calibration)
        if config.workers > 1:
            scorer = ensure_concurrent(scorer)
        scores = await score_fragments(img, "upload", config, scorer, asyncio.Semaphore(config.workers))
        probability = aggregate(config.strategy, scores)
        decision = decide(probability, config.threshold)
        logger.info(f"Scored upload {img.width}x{img.height}: {len(scores)} fragments, "
                    f"{config.strategy.value} p={probability:.4f} -> {decision.value}")
        return ApiResponse(
            success=True,
            message=f"Image is {decision.value}",
            data={
                "strategy": config.strategy.value,
                "edge_mode": config.resolved_edge_mode().value,
                "probability": probability,
                "decision": decision.value,
                "fragments": [s.model_dump() for s in scores],
            },
            timestamp=datetime.now().isoformat(),
        )
    except (CytogateError, ValidationError) as e:
        logger.error(f"Error scoring upload: {e}")
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"Unexpected error scoring upload: {e}")
        raise HTTPException(status_code=500, detail=str(e))


@router.post("/plan")
async def experiment_plan(overrides: Dict[str, Any] = Body(default={})):
    """Hyperparameter plan: persisted defaults with the posted overrides applied"""
    try:
        plan = emit_experiment_plan(overrides, base=config_manager.settings.plan)
        return ApiResponse(
            success=True,
            message="Experiment plan emitted",
            data=plan.model_dump(mode="json"),
            timestamp=datetime.now().isoformat(),
        )
    except (CytogateError, ValidationError) as e:
        logger.error(f"Error emitting plan: {e}")
        raise HTTPException(status_code=400, detail=str(e))
