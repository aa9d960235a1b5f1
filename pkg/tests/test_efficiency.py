"""Tests for the qubit-efficiency table."""

from fractions import Fraction

import pytest

from app.core.errors import InvalidArgumentError
from app.services.efficiency import (
    ProtocolId,
    efficiency_table,
    parse_efficiency_csv,
    qubit_efficiency,
    render_csv,
    render_text,
    this_work_qubit_count,
)


@pytest.mark.parametrize("participants", range(2, 11))
def test_this_work_is_one_over_four_m(participants):
    assert qubit_efficiency(ProtocolId.THIS_WORK, participants) == Fraction(1, 4 * participants)


@pytest.mark.parametrize(
    ("protocol", "participants", "expected"),
    [
        ("ThisWork", 3, Fraction(1, 12)),
        ("Li2010", 2, Fraction(1, 32)),
        ("Li2013", 2, Fraction(1, 24)),
        ("Yang2013", 4, Fraction(1, 24)),
        ("Xie2015", 3, Fraction(1, 44)),
        ("Yu2017", 5, Fraction(1, 34)),
        ("Li2020", 3, Fraction(1, 15)),
        ("Ye2024", 2, Fraction(1, 7)),
        ("Younes2024", 2, Fraction(1, 6)),
    ],
)
def test_published_formulas(protocol, participants, expected):
    assert qubit_efficiency(protocol, participants) == expected


def test_unknown_protocol_rejected():
    with pytest.raises(InvalidArgumentError):
        qubit_efficiency("Smith1999", 3)


def test_too_few_participants_rejected():
    with pytest.raises(InvalidArgumentError):
        qubit_efficiency(ProtocolId.THIS_WORK, 1)


def test_qubit_count():
    assert this_work_qubit_count(4, 4, 3) == 48
    assert this_work_qubit_count(1, 1, 2) == 8
    assert Fraction(4, this_work_qubit_count(4, 4, 3)) == qubit_efficiency("ThisWork", 3)


def test_this_work_decreases_with_m():
    values = [qubit_efficiency(ProtocolId.THIS_WORK, m) for m in range(2, 12)]
    assert all(a > b for a, b in zip(values, values[1:], strict=False))


def test_table_order_and_features():
    rows = efficiency_table(2)
    assert [r.protocol for r in rows] == list(ProtocolId)
    assert rows[-1].protocol is ProtocolId.THIS_WORK
    assert rows[-1].efficiency == Fraction(1, 8)
    trojan = {r.protocol for r in rows if r.features.mitigates_trojan_horse}
    assert trojan == {ProtocolId.YOUNES2024, ProtocolId.THIS_WORK}
    no_dcna = {r.protocol for r in rows if not r.features.mitigates_dcna}
    assert no_dcna == {ProtocolId.YOUNES2024}


def test_csv_parses_back():
    rows = efficiency_table(5)
    parsed = parse_efficiency_csv(render_csv(rows))
    assert parsed == {r.protocol: r.efficiency for r in rows}


def test_text_rendering_shows_rationals():
    text = render_text(efficiency_table(3))
    this_work = next(line for line in text.splitlines() if line.startswith("ThisWork"))
    assert this_work.endswith("1/12")


def test_parse_rejects_foreign_csv():
    with pytest.raises(InvalidArgumentError):
        parse_efficiency_csv("a,b\n1,2\n")
