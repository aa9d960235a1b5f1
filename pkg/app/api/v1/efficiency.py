"""Qubit-efficiency comparison table."""

from fastapi import APIRouter, Query
from pydantic import BaseModel

from app.services.efficiency import efficiency_table

router = APIRouter(prefix="/efficiency", tags=["efficiency"])


class EfficiencyEntry(BaseModel):
    protocol: str
    quantum_resources: list[str]
    participant_abilities: list[str]
    mitigates_trojan_horse: bool
    mitigates_dcna: bool
    specific_secret: bool
    formula: str
    efficiency: str  # "p/q"


@router.get("", response_model=list[EfficiencyEntry])
def get_efficiency(
    participants: int = Query(3, ge=2, le=64),  # noqa: B008
) -> list[EfficiencyEntry]:
    return [
        EfficiencyEntry(
            protocol=str(row.protocol),
            quantum_resources=list(row.features.quantum_resources),
            participant_abilities=list(row.features.participant_abilities),
            mitigates_trojan_horse=row.features.mitigates_trojan_horse,
            mitigates_dcna=row.features.mitigates_dcna,
            specific_secret=row.features.specific_secret,
            formula=row.formula,
            efficiency=f"{row.efficiency.numerator}/{row.efficiency.denominator}",
        )
        for row in efficiency_table(participants)
    ]
