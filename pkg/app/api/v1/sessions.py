"""Single protocol sessions."""

from fastapi import APIRouter
from pydantic import BaseModel, Field

from app.services.adversaries import AdversaryConfig
from app.services.harness import SessionReport, run_session
from app.services.protocol import SessionConfig

router = APIRouter(prefix="/sessions", tags=["sessions"])


class SessionRequest(BaseModel):
    config: SessionConfig = Field(default_factory=SessionConfig)
    adversary: AdversaryConfig = Field(default_factory=AdversaryConfig)


@router.post("", response_model=SessionReport)
def create_session(body: SessionRequest) -> SessionReport:
    """Run one session and return its report (same key order as the CLI)."""
    return run_session(body.config, body.adversary)
