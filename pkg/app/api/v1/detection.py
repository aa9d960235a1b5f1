"""Detection probabilities: Monte Carlo estimates and exact oracles."""

from fastapi import APIRouter, Query
from pydantic import BaseModel, Field

from app.core.config import get_settings
from app.services.adversaries import AdversaryConfig, AdversaryKind
from app.services.harness import (
    DetectionEstimate,
    detection_by_op,
    exact_detection_probability,
    monte_carlo_detection,
    per_pair_detection,
    published_detection_formula,
)
from app.services.protocol import SessionConfig

router = APIRouter(prefix="/detection", tags=["detection"])

# ── Schemas ──────────────────────────────────────────────────


class EstimateRequest(BaseModel):
    config: SessionConfig = Field(default_factory=SessionConfig)
    adversary: AdversaryConfig = Field(default_factory=AdversaryConfig)
    trials: int = Field(default=1000, ge=1, le=100_000)


class ExactDetection(BaseModel):
    adversary: AdversaryKind
    pairs: int
    per_pair: float
    by_op: dict[str, float]
    exact_value: float
    paper_formula_value: float


# ── Endpoints ────────────────────────────────────────────────


@router.post("/estimate", response_model=DetectionEstimate)
def estimate_detection(body: EstimateRequest) -> DetectionEstimate:
    return monte_carlo_detection(
        body.config, body.adversary, body.trials, get_settings().sweep_workers
    )


@router.get("/exact", response_model=ExactDetection)
def exact_detection(
    adversary: AdversaryKind = Query(...),  # noqa: B008
    pairs: int = Query(1, ge=0, le=10_000),  # noqa: B008
) -> ExactDetection:
    """Exact oracle for the non-parametric attacks; ``pairs`` is also the K of the closed form."""
    by_op = detection_by_op(adversary)
    return ExactDetection(
        adversary=adversary,
        pairs=pairs,
        per_pair=per_pair_detection(adversary),
        by_op={str(op): value for op, value in by_op.items()},
        exact_value=exact_detection_probability(adversary, pairs),
        paper_formula_value=published_detection_formula(pairs),
    )
