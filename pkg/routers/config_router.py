import logging
from typing import Any, Dict

from fastapi import APIRouter, Body, HTTPException
from pydantic import ValidationError

from services.app_settings import AppSettings, config_manager

logger = logging.getLogger(__name__)

router = APIRouter(
    prefix="/api/config",
    tags=["config"],
    responses={404: {"description": "Not found"}},
)


@router.get("/", response_model=AppSettings)
async def get_current_config():
    """
    Retrieve the current application configuration.
    Values may be from the config file or overridden by CYTOGATE_* environment variables.
    """
    return config_manager.settings


@router.patch("/", response_model=AppSettings)
async def update_config(updates: Dict[str, Any] = Body(...)):
    """
    Update and persist configuration settings.
    Provide a JSON object with the keys and values to update.
    Example:
    {
        "slicing": {"patch_size": 1250, "strategy": "rgb_var"},
        "scorer": {"calibration": {"midpoint": 0.004, "scale": 0.001}}
    }
    """
    try:
        old_strategy = config_manager.settings.slicing.strategy
        updated_settings = await config_manager.update(updates)
        if updated_settings.slicing.strategy != old_strategy:
            logger.info(f"Default strategy changed: {old_strategy.value} -> {updated_settings.slicing.strategy.value}")
        return updated_settings
    except ValidationError as e:
        logger.error(f"Rejected config update: {e}")
        raise HTTPException(status_code=400, detail=str(e))
