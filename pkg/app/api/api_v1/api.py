from fastapi import APIRouter
from app.api.api_v1.endpoints import experiments, recovery, signals

router = APIRouter()

router.include_router(experiments.router, prefix="/experiments", tags=["Experiments"])
router.include_router(recovery.router, prefix="/recover", tags=["Recovery"])
router.include_router(signals.router, prefix="/signals", tags=["Signals"])
