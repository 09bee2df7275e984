import logging

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

# --- Config and Routers ---
from services.app_settings import config_manager
from routers import config_router, gate_router

logger = logging.getLogger(__name__)

app = FastAPI(title="cytogate", description="Quality and validity gates for cytology images")


# ----------------------------------------------------
# Application lifecycle hooks for config management
# ----------------------------------------------------
@app.on_event("startup")
async def startup_event():
    try:
        logger.info("🔄 Starting application initialization...")
        settings = await config_manager.load()
        logger.info(f"✅ Configuration loaded: scorer={settings.scorer.kind}, "
                    f"strategy={settings.slicing.strategy.value}, patch={settings.slicing.patch_size}")
        logger.info("🚀 Application startup completed successfully")
    except Exception as e:
        # keep serving with defaults; the config endpoints can repair the file
        logger.error(f"❌ Application startup failed: {e}", exc_info=True)


# Add CORS middleware
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Include routers
app.include_router(config_router)
app.include_router(gate_router)


@app.get("/")
async def root():
    return {"service": "cytogate", "docs": "/docs"}
