"""V1 API router aggregation."""

from fastapi import APIRouter

from app.api.v1.detection import router as detection_router
from app.api.v1.efficiency import router as efficiency_router
from app.api.v1.sessions import router as sessions_router
from app.api.v1.sweeps import router as sweeps_router

v1_router = APIRouter(prefix="/v1")
v1_router.include_router(sessions_router)
v1_router.include_router(detection_router)
v1_router.include_router(sweeps_router)
v1_router.include_router(efficiency_router)
