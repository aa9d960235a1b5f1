"""Tests for sessions, exact oracles, Monte Carlo estimates and Holevo information."""

import io

import numpy as np
import pytest

from app.core.errors import InvalidArgumentError
from app.services.adversaries import AdversaryConfig, AdversaryKind, CollectiveSpec
from app.services.efficiency import this_work_qubit_count
from app.services.harness import (
    SWEEP_COLUMNS,
    SessionStage,
    collective_sweep,
    decoy_ancilla_ensemble,
    detection_by_op,
    exact_detection_probability,
    exact_session_detection,
    holevo_information,
    key_bit_ancilla_ensemble,
    load_replay,
    max_decoy_information,
    message_ancilla_ensemble,
    monte_carlo_detection,
    monte_carlo_pair_detection,
    per_pair_detection,
    published_detection_formula,
    run_session,
    run_sweep,
    verify_replay,
    write_replay,
    write_sweep_csv,
)
from app.services.protocol import BellLabel, CheckOp, SessionConfig

# ── Sessions ─────────────────────────────────────────────────


def test_honest_session_recovers_secret(small_config):
    report = run_session(small_config)
    assert report.stage is SessionStage.COMPLETED
    assert not report.aborted
    assert report.error_rate == 0.0
    assert report.validity
    assert report.recovered == report.secret
    assert report.eve_secret_guess is None
    assert len(report.per_pair_check_log) == 3 * 8


def test_honest_completeness_over_random_configs():
    rng = np.random.default_rng(99)
    for _ in range(100):
        config = SessionConfig(
            participants=int(rng.integers(2, 7)),
            secret_len=int(rng.integers(1, 33)),
            decoys=int(rng.integers(1, 17)),
            seed=int(rng.integers(0, 2**63)),
        )
        report = run_session(config)
        assert report.error_rate == 0.0
        assert report.validity
        assert report.recovered == report.secret


def test_given_secret_is_shared():
    config = SessionConfig(participants=2, secret_len=4, decoys=2, secret="1001")
    assert run_session(config).recovered == "1001"


def test_session_is_deterministic(small_config):
    adversary = AdversaryConfig(kind="dcna")
    first = run_session(small_config, adversary).model_dump_json()
    second = run_session(small_config, adversary).model_dump_json()
    assert first == second


def test_report_key_order(small_config):
    keys = list(run_session(small_config).model_dump())
    assert keys[:6] == ["config", "adversary", "stage", "aborted", "error_rate", "validity"]
    assert keys[-1] == "rng_streams"


def test_transfers_are_dealer_to_participant(small_config):
    report = run_session(small_config)
    assert [t.receiver for t in report.quantum_transfers] == [
        "participant-0",
        "participant-1",
        "participant-2",
    ]
    assert {t.sender for t in report.quantum_transfers} == {"dealer"}


def test_dealer_qubits_match_closed_form():
    rng = np.random.default_rng(17)
    for _ in range(20):
        config = SessionConfig(
            participants=int(rng.integers(2, 6)),
            secret_len=int(rng.integers(1, 12)),
            decoys=int(rng.integers(1, 12)),
            seed=int(rng.integers(0, 2**32)),
        )
        report = run_session(config)
        expected = this_work_qubit_count(config.secret_len, config.decoys, config.participants)
        assert report.dealer_qubits == expected


def test_undetected_dcna_learns_secret():
    adversary = AdversaryConfig(kind="dcna")
    undetected = 0
    for seed in range(300):
        config = SessionConfig(participants=2, secret_len=4, decoys=1, seed=seed)
        report = run_session(config, adversary)
        if not report.aborted:
            undetected += 1
            assert report.eve_key_guess == report.dealer_key
            assert report.eve_guess_correct
    assert undetected > 0


def test_validity_failure_under_ir_fake():
    """Fake qubits scramble the shares; the test bits catch it."""
    config = SessionConfig(participants=2, secret_len=16, decoys=1, seed=3)
    outcomes = {
        run_session(config.model_copy(update={"seed": s}), AdversaryConfig(kind="ir_fake")).stage
        for s in range(40)
    }
    assert SessionStage.ABORTED_VALIDITY in outcomes
    assert SessionStage.COMPLETED not in outcomes


def test_out_of_range_dishonest_rejected(small_config):
    with pytest.raises(InvalidArgumentError):
        run_session(small_config, AdversaryConfig(kind="collusion", dishonest=[5]))


def test_register_limit_checked_before_running():
    with pytest.raises(InvalidArgumentError, match="dcna attack on M=11"):
        run_session(
            SessionConfig(participants=11, secret_len=1, decoys=1), AdversaryConfig(kind="dcna")
        )
    wide = AdversaryConfig(kind="collective", collective=CollectiveSpec.orthogonal_register())
    with pytest.raises(InvalidArgumentError, match="collective attack on M=7"):
        monte_carlo_detection(SessionConfig(participants=7, secret_len=1, decoys=1), wide, 1)


def test_narrow_targets_fit_the_register_limit():
    config = SessionConfig(participants=11, secret_len=1, decoys=1, seed=2)
    report = run_session(config, AdversaryConfig(kind="dcna", targets=[0]))
    assert report.adversary_qubits == 2 * 1 + 1


def test_full_collusion_through_session(small_config):
    report = run_session(small_config, AdversaryConfig(kind="collusion", dishonest=[0, 1, 2]))
    assert report.completed
    assert report.eve_key_guess == report.dealer_key
    assert report.eve_guess_correct


def test_collusion_through_sessions_at_chance():
    """M−1 colluders guess a one-bit secret half of the time."""
    adversary = AdversaryConfig(kind="collusion")
    trials = 2000
    wins = sum(
        run_session(
            SessionConfig(participants=2, secret_len=1, decoys=1, seed=seed), adversary
        ).eve_guess_correct
        for seed in range(trials)
    )
    assert abs(wins / trials - 0.5) <= 5 * (0.25 / trials) ** 0.5


def test_replay_roundtrip(tmp_path, small_config):
    adversary = AdversaryConfig(kind="ir_measure")
    report = run_session(small_config, adversary)
    path = tmp_path / "replay.json"
    write_replay(path, report, adversary)
    replay = load_replay(path)
    assert replay.rng_streams == report.rng_streams
    assert verify_replay(replay)


# ── Exact oracles ────────────────────────────────────────────


def test_published_formula_values():
    assert published_detection_formula(0) == 0.0
    assert published_detection_formula(1) == pytest.approx(0.75)
    assert published_detection_formula(3) == pytest.approx(1 - 1 / 64)


def test_dcna_per_pair_detection():
    by_op = detection_by_op(AdversaryKind.DCNA)
    assert by_op[CheckOp.M] == pytest.approx(0.0, abs=1e-12)
    assert by_op[CheckOp.MH] == pytest.approx(0.5, abs=1e-12)
    assert per_pair_detection(AdversaryKind.DCNA) == pytest.approx(0.25, abs=1e-12)


def test_dcna_exact_detection():
    assert exact_detection_probability(AdversaryKind.DCNA, 0) == 0.0
    assert exact_detection_probability(AdversaryKind.DCNA, 2) == pytest.approx(0.4375)


def test_intercept_resend_oracles():
    assert per_pair_detection(AdversaryKind.IR_MEASURE) == pytest.approx(0.25, abs=1e-12)
    assert per_pair_detection(AdversaryKind.IR_FAKE) == pytest.approx(0.5, abs=1e-12)


def test_no_attack_is_never_detected():
    assert exact_detection_probability(AdversaryKind.NONE, 10) == 0.0


def test_transparent_coupling_is_never_detected():
    spec = CollectiveSpec.transparent()
    for pairs in (1, 4, 16):
        assert exact_detection_probability(AdversaryKind.COLLECTIVE, pairs, spec) == pytest.approx(
            0.0, abs=1e-12
        )


def test_cnot_coupling_matches_dcna():
    spec = CollectiveSpec.cnot_equivalent()
    assert detection_by_op(AdversaryKind.COLLECTIVE, spec)[CheckOp.MH] == pytest.approx(0.5)
    assert exact_detection_probability(AdversaryKind.COLLECTIVE, 2, spec) == pytest.approx(0.4375)


def test_session_detection_threshold_zero_matches_pairs():
    exact = exact_session_detection(AdversaryKind.DCNA, 3, 2)
    assert exact == pytest.approx(exact_detection_probability(AdversaryKind.DCNA, 6))


def test_session_detection_binomial_tail():
    # 2 pairs at p = 1/4; threshold 0.5 needs both to fail
    assert exact_session_detection(AdversaryKind.DCNA, 2, 1, 0.5) == pytest.approx(1 / 16)


def test_session_detection_counts_only_targeted_pairs():
    exact = exact_session_detection(AdversaryKind.DCNA, 3, 2, targets=[0])
    assert exact == pytest.approx(exact_detection_probability(AdversaryKind.DCNA, 2))


def test_collective_oracle_needs_spec():
    with pytest.raises(InvalidArgumentError):
        detection_by_op(AdversaryKind.COLLECTIVE)


# ── Monte Carlo ──────────────────────────────────────────────


_NON_PARAMETRIC = [AdversaryKind.DCNA, AdversaryKind.IR_MEASURE, AdversaryKind.IR_FAKE]


@pytest.mark.parametrize("kind", _NON_PARAMETRIC)
@pytest.mark.parametrize("pairs", [1, 2, 4])
def test_pair_level_monte_carlo_matches_oracle(kind, pairs):
    rng = np.random.default_rng(1000 * pairs + len(kind))
    estimate = monte_carlo_pair_detection(kind, pairs, 10_000, rng)
    assert abs(estimate.detected_fraction - estimate.exact_value) <= 5 * estimate.standard_error


def test_pair_level_monte_carlo_collective():
    rng = np.random.default_rng(5)
    spec = CollectiveSpec.random(rng)
    estimate = monte_carlo_pair_detection(AdversaryKind.COLLECTIVE, 2, 4000, rng, spec)
    assert abs(estimate.detected_fraction - estimate.exact_value) <= 5 * estimate.standard_error


def test_session_monte_carlo_dcna():
    config = SessionConfig(participants=2, secret_len=1, decoys=1, seed=11)
    estimate = monte_carlo_detection(config, AdversaryConfig(kind="dcna"), 2000)
    assert estimate.pairs == 2
    assert estimate.exact_value == pytest.approx(1 - 0.75**2)
    assert estimate.paper_formula_value == pytest.approx(0.75)
    assert abs(estimate.detected_fraction - estimate.exact_value) <= 5 * estimate.standard_error


def test_session_monte_carlo_ir_fake():
    config = SessionConfig(participants=2, secret_len=1, decoys=2, seed=12)
    estimate = monte_carlo_detection(config, AdversaryConfig(kind="ir_fake"), 2000)
    assert estimate.exact_value == pytest.approx(1 - 0.5**4)
    assert abs(estimate.detected_fraction - estimate.exact_value) <= 5 * estimate.standard_error


def test_session_monte_carlo_no_attack():
    config = SessionConfig(participants=2, secret_len=2, decoys=4, seed=1)
    estimate = monte_carlo_detection(config, AdversaryConfig(), 200)
    assert estimate.detected_fraction == 0.0
    assert estimate.standard_error == 0.0


def test_monte_carlo_rejects_zero_trials(small_config):
    with pytest.raises(InvalidArgumentError):
        monte_carlo_detection(small_config, AdversaryConfig(), 0)


# ── Holevo information ───────────────────────────────────────


def test_holevo_identical_states():
    rho = np.eye(2) / 2
    assert holevo_information([(0.5, rho), (0.5, rho)]) == pytest.approx(0.0, abs=1e-12)


def test_holevo_orthogonal_pure_states():
    zero, one = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    assert holevo_information([(0.5, zero), (0.5, one)]) == pytest.approx(1.0)


def test_holevo_rejects_bad_ensemble():
    with pytest.raises(InvalidArgumentError):
        holevo_information([(0.7, np.eye(2) / 2)])
    with pytest.raises(InvalidArgumentError):
        holevo_information([(1.0, np.eye(2))])
    with pytest.raises(InvalidArgumentError):
        holevo_information([])


@pytest.mark.parametrize("participants", [2, 3, 5])
def test_dcna_message_ancilla_carries_one_bit(participants):
    for bit in (0, 1):
        ensemble = message_ancilla_ensemble(participants, AdversaryKind.DCNA, bit=bit)
        assert holevo_information(ensemble) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("participants", [2, 3, 4])
def test_dcna_ancillas_reveal_key_bit(participants):
    ensemble = key_bit_ancilla_ensemble(participants, AdversaryKind.DCNA)
    assert holevo_information(ensemble) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("label", list(BellLabel))
@pytest.mark.parametrize("op", list(CheckOp))
def test_dcna_decoy_ancilla_is_uniform(label, op):
    """Averaged over the check outcome, Eve's decoy ancilla is I/2."""
    ensemble = decoy_ancilla_ensemble(AdversaryKind.DCNA, label, op)
    assert sum(p for p, _ in ensemble) == pytest.approx(1.0, abs=1e-12)
    average = sum(p * rho for p, rho in ensemble)
    assert np.allclose(average, np.eye(2) / 2, atol=1e-9)


def test_dcna_decoy_ancilla_information():
    assert max_decoy_information(AdversaryKind.DCNA) == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(InvalidArgumentError):
        max_decoy_information(AdversaryKind.IR_MEASURE)


def test_transparent_coupling_learns_nothing():
    spec = CollectiveSpec.transparent()
    for label in BellLabel:
        for op in CheckOp:
            ensemble = decoy_ancilla_ensemble(AdversaryKind.COLLECTIVE, label, op, spec)
            assert holevo_information(ensemble) < 1e-6


def test_zero_error_implies_zero_information():
    rows = collective_sweep(200, np.random.default_rng(2024))
    assert len(rows) == 203
    for row in rows:
        if row.per_pair_detection < 1e-12:
            assert row.max_information < 1e-6
        if row.max_information > 0.01:
            assert row.per_pair_detection > 0.0
    by_name = {row.name: row for row in rows}
    assert by_name["cnot_equivalent"].per_pair_detection == pytest.approx(0.25)


# ── Sweeps ───────────────────────────────────────────────────


def test_sweep_rows_and_csv():
    rows = run_sweep(
        [AdversaryConfig(kind="none"), AdversaryConfig(kind="dcna")],
        decoys=[1, 2],
        trials=[50],
        participants=2,
        secret_len=1,
        seed=3,
    )
    assert [(r.model, r.decoys) for r in rows] == [
        ("none", 1), ("none", 2), ("dcna", 1), ("dcna", 2),
    ]
    assert all(r.detected_fraction == 0.0 for r in rows if r.model == "none")
    assert rows[2].exact == pytest.approx(1 - 0.75**2)
    assert rows[2].paper_formula == pytest.approx(0.75)

    buffer = io.StringIO()
    write_sweep_csv(rows, buffer)
    lines = buffer.getvalue().splitlines()
    assert lines[0] == ",".join(SWEEP_COLUMNS)
    assert len(lines) == 5
