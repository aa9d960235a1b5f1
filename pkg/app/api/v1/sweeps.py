"""Detection sweeps over (adversary × K × trials) grids; results are cached."""

import logging

from fastapi import APIRouter
from pydantic import BaseModel, Field

from app.core import cache
from app.core.config import get_settings
from app.core.errors import InvalidArgumentError
from app.services.adversaries import AdversaryConfig
from app.services.harness import SweepRow, run_sweep

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/sweeps", tags=["sweeps"])


class SweepRequest(BaseModel):
    adversaries: list[AdversaryConfig] = Field(min_length=1)
    decoys: list[int] = Field(min_length=1)
    trials: list[int] = Field(default=[1000], min_length=1)
    participants: int = Field(default=3, ge=2, le=16)
    secret_len: int = Field(default=16, ge=1)
    abort_threshold: float = Field(default=0.0, ge=0.0, lt=1.0)
    seed: int = Field(default=7, ge=0, le=2**64 - 1)


class SweepPoint(BaseModel):
    model: str
    participants: int
    secret_len: int
    decoys: int
    pairs: int
    trials: int
    detected_fraction: float
    standard_error: float
    exact: float
    paper_formula: float


def _point(row: SweepRow) -> SweepPoint:
    return SweepPoint.model_validate(row, from_attributes=True)


@router.post("", response_model=list[SweepPoint])
def create_sweep(body: SweepRequest) -> list[SweepPoint]:
    if any(k < 1 for k in body.decoys) or any(t < 1 for t in body.trials):
        raise InvalidArgumentError("decoy counts and trial counts must be at least 1")

    cache_key = ("sweep", body.model_dump_json())
    cached = cache.get(cache_key)
    if cached is not None:
        logger.debug("Sweep served from cache")
        return cached

    rows = run_sweep(
        body.adversaries,
        body.decoys,
        body.trials,
        participants=body.participants,
        secret_len=body.secret_len,
        seed=body.seed,
        abort_threshold=body.abort_threshold,
        workers=get_settings().sweep_workers,
    )
    result = [_point(r) for r in rows]
    cache.put(cache_key, result)
    return result
