"""Qubit efficiency η = c/q of multi-party SQSS schemes, in exact rationals.

c is the length of the shared classical secret and q the number of qubits
generated for it.  Figures for the other schemes are their published
closed forms; the feature columns are transcribed as data.
"""

import csv
import io
import logging
from collections.abc import Callable, Iterable
from dataclasses import dataclass
from enum import StrEnum
from fractions import Fraction

from app.core.errors import InvalidArgumentError

logger = logging.getLogger(__name__)


class ProtocolId(StrEnum):
    LI2010 = "Li2010"
    LI2013 = "Li2013"
    YANG2013 = "Yang2013"
    XIE2015 = "Xie2015"
    YU2017 = "Yu2017"
    LI2020 = "Li2020"
    YE2024 = "Ye2024"
    YOUNES2024 = "Younes2024"
    THIS_WORK = "ThisWork"


_FORMULAS: dict[ProtocolId, tuple[str, Callable[[int], Fraction]]] = {
    ProtocolId.LI2010: ("1/(2^M(3M+2))", lambda m: Fraction(1, 2**m * (3 * m + 2))),
    ProtocolId.LI2013: ("1/(2^M(3M))", lambda m: Fraction(1, 2**m * 3 * m)),
    ProtocolId.YANG2013: ("1/(6M)", lambda m: Fraction(1, 6 * m)),
    ProtocolId.XIE2015: ("1/(2^(M-1)(3M+2))", lambda m: Fraction(1, 2 ** (m - 1) * (3 * m + 2))),
    ProtocolId.YU2017: ("1/(6M+4)", lambda m: Fraction(1, 6 * m + 4)),
    ProtocolId.LI2020: ("1/(5M)", lambda m: Fraction(1, 5 * m)),
    ProtocolId.YE2024: ("1/(3M+1)", lambda m: Fraction(1, 3 * m + 1)),
    ProtocolId.YOUNES2024: ("1/(3M)", lambda m: Fraction(1, 3 * m)),
    ProtocolId.THIS_WORK: ("1/(4M)", lambda m: Fraction(1, 4 * m)),
}


@dataclass(frozen=True)
class ProtocolFeatures:
    """Comparison columns other than η."""

    quantum_resources: tuple[str, ...]
    participant_abilities: tuple[str, ...]
    mitigates_trojan_horse: bool
    mitigates_dcna: bool
    specific_secret: bool


_REFLECTING = ("Generate |0> or |1>", "Measure in Z", "Reflect")
_ENTANGLED = "Multi-qubit entangled states"
_SINGLE = "Single qubits"

_FEATURES: dict[ProtocolId, ProtocolFeatures] = {
    ProtocolId.LI2010: ProtocolFeatures((_ENTANGLED,), _REFLECTING, False, True, False),
    ProtocolId.LI2013: ProtocolFeatures((_SINGLE,), _REFLECTING, False, True, False),
    ProtocolId.YANG2013: ProtocolFeatures((_SINGLE,), _REFLECTING, False, True, False),
    ProtocolId.XIE2015: ProtocolFeatures((_ENTANGLED,), _REFLECTING, False, True, True),
    ProtocolId.YU2017: ProtocolFeatures((_ENTANGLED,), _REFLECTING, False, True, False),
    ProtocolId.LI2020: ProtocolFeatures(("Bell states",), _REFLECTING, False, True, False),
    ProtocolId.YE2024: ProtocolFeatures((_ENTANGLED, _SINGLE), _REFLECTING, False, True, True),
    ProtocolId.YOUNES2024: ProtocolFeatures(
        (_ENTANGLED, _SINGLE), _REFLECTING, True, False, True
    ),
    ProtocolId.THIS_WORK: ProtocolFeatures(
        (_ENTANGLED, "Bell states"), ("Measure in Z", "Perform H"), True, True, True
    ),
}


def _check_participants(participants: int) -> None:
    if participants < 2:
        raise InvalidArgumentError(f"need at least 2 participants, got {participants}")


def qubit_efficiency(protocol: ProtocolId | str, participants: int) -> Fraction:
    """η for ``protocol`` with M = ``participants``."""
    try:
        protocol = ProtocolId(protocol)
    except ValueError:
        raise InvalidArgumentError(f"unknown protocol id: {protocol!r}") from None
    _check_participants(participants)
    return _FORMULAS[protocol][1](participants)


def this_work_qubit_count(secret_len: int, decoys: int, participants: int) -> int:
    """q = (2N + 2K)·M: 2N message slots and K decoy pairs per participant."""
    if secret_len < 1 or decoys < 1:
        raise InvalidArgumentError("secret length and decoy count must be at least 1")
    _check_participants(participants)
    return (2 * secret_len + 2 * decoys) * participants


@dataclass(frozen=True)
class EfficiencyRow:
    protocol: ProtocolId
    formula: str
    efficiency: Fraction
    features: ProtocolFeatures


def efficiency_table(participants: int) -> list[EfficiencyRow]:
    """Every compared scheme, in publication order, ending with this one."""
    _check_participants(participants)
    rows = [
        EfficiencyRow(p, _FORMULAS[p][0], qubit_efficiency(p, participants), _FEATURES[p])
        for p in ProtocolId
    ]
    logger.debug("Efficiency table for M=%d: %d schemes", participants, len(rows))
    return rows


# ── Rendering ────────────────────────────────────────────────

CSV_COLUMNS = (
    "protocol",
    "quantum_resources",
    "participant_abilities",
    "mitigates_trojan_horse",
    "mitigates_dcna",
    "secret",
    "formula",
    "efficiency",
)


def _yes_no(flag: bool) -> str:
    return "Yes" if flag else "No"


def render_row(row: EfficiencyRow) -> list[str]:
    f = row.features
    return [
        str(row.protocol),
        "; ".join(f.quantum_resources),
        "; ".join(f.participant_abilities),
        _yes_no(f.mitigates_trojan_horse),
        _yes_no(f.mitigates_dcna),
        "Specific" if f.specific_secret else "Unspecific",
        row.formula,
        f"{row.efficiency.numerator}/{row.efficiency.denominator}",
    ]


def render_csv(rows: Iterable[EfficiencyRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    writer.writerows(render_row(r) for r in rows)
    return buffer.getvalue()


def render_text(rows: Iterable[EfficiencyRow]) -> str:
    """Aligned plain-text table; one line per scheme."""
    table = [list(CSV_COLUMNS), *(render_row(r) for r in rows)]
    widths = [max(len(line[i]) for line in table) for i in range(len(CSV_COLUMNS))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(line, widths, strict=True)).rstrip()
             for line in table]
    return "\n".join(lines) + "\n"


def parse_efficiency_csv(text: str) -> dict[ProtocolId, Fraction]:
    """Read η back from ``render_csv`` output."""
    reader = csv.DictReader(io.StringIO(text))
    missing = set(CSV_COLUMNS) - set(reader.fieldnames or ())
    if missing:
        raise InvalidArgumentError(f"efficiency CSV lacks columns: {sorted(missing)}")
    return {ProtocolId(r["protocol"]): Fraction(r["efficiency"]) for r in reader}
