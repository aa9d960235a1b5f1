"""Session orchestration, detection estimates, exact oracles and Eve's information.

The Monte Carlo path runs full sessions (or single decoy pairs) through the
same register code the protocol uses.  The exact oracles never sample: they
enumerate check operations and measurement branches with ``project_z`` and
``outcome_distribution``.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from enum import StrEnum
from pathlib import Path
from typing import IO

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.core.config import get_settings
from app.core.errors import InvalidArgumentError
from app.services.adversaries import (
    ADVERSARY,
    TAPPING_KINDS,
    AdversaryConfig,
    AdversaryKind,
    CollectiveSpec,
    PublicAnnouncement,
    build_adversary,
    build_collective_unitary,
    collective_tap,
    dcna_tap,
    ir_fake_tap,
    ir_measure_tap,
)
from app.services.protocol import (
    DEALER,
    BellLabel,
    Channel,
    CheckOp,
    DealerLedger,
    SessionConfig,
    SessionRandom,
    build_sequences,
    check_passes,
    derive_seed,
    encode_secret,
    measure_shares,
    prepare_decoy_pair,
    prepare_message_state,
    random_bits,
    recover_secret,
    run_decoy_check,
    strip_decoys,
    validity_check,
)
from app.services.qsim import (
    ATOL,
    H_MATRIX,
    RegisterPool,
    StateVector,
    apply_cnot_with_fresh_ancilla,
    apply_gate,
    hadamard,
    is_density_matrix,
    outcome_distribution,
    partial_trace,
    prepare_basis_state,
    project_z,
    tensor,
    unitary,
    von_neumann_entropy,
)

logger = logging.getLogger(__name__)


# ── Session reports ──────────────────────────────────────────


class SessionStage(StrEnum):
    COMPLETED = "completed"
    ABORTED_CHECK = "aborted_check"
    ABORTED_VALIDITY = "aborted_validity"


class CheckLogEntry(BaseModel):
    participant: int
    pair: int
    label: BellLabel
    op: CheckOp
    passed: bool


class TransferLogEntry(BaseModel):
    sender: str
    receiver: str
    qubits: int


class SessionReport(BaseModel):
    """Outcome of one session; field order is the JSON key order."""

    model_config = ConfigDict(frozen=True)

    config: SessionConfig
    adversary: AdversaryKind
    stage: SessionStage
    aborted: bool
    error_rate: float = Field(ge=0.0, le=1.0)
    validity: bool
    secret: str
    dealer_key: str
    recovered: str | None
    eve_key_guess: str | None
    eve_secret_guess: str | None
    eve_guess_correct: bool | None
    per_pair_check_log: list[CheckLogEntry]
    quantum_transfers: list[TransferLogEntry]
    dealer_qubits: int
    adversary_qubits: int
    rng_streams: list[str]

    @property
    def completed(self) -> bool:
        return self.stage is SessionStage.COMPLETED


def check_register_limit(config: SessionConfig, adversary: AdversaryConfig) -> None:
    """Reject a run whose tapped message registers would outgrow the dense limit."""
    limit = get_settings().max_register_qubits
    needed = adversary.message_register_qubits(config.participants)
    if needed > limit:
        raise InvalidArgumentError(
            f"the {adversary.kind} attack on M={config.participants} needs {needed}-qubit "
            f"message registers; the dense register limit is {limit}"
        )


def run_session(
    config: SessionConfig,
    adversary: AdversaryConfig | None = None,
    *,
    quiet: bool = False,
) -> SessionReport:
    """Encode, build, transmit with taps, check decoys, measure shares, validate, recover.

    Args:
        config: Session parameters; ``config.seed`` fixes every random choice.
        adversary: Attack to mount; no attack when omitted.
        quiet: Log start and finish at DEBUG instead of INFO (Monte Carlo trials).

    Returns:
        The session report.  ``aborted`` refers to the Step 03 decoy check;
        a failed test-bit relation is reported as ``validity=False`` with
        stage ``aborted_validity``.
    """
    adversary = adversary or AdversaryConfig()
    adversary.check_participants(config.participants)
    check_register_limit(config, adversary)
    level = logging.DEBUG if quiet else logging.INFO
    logger.log(
        level,
        "Session start: M=%d N=%d K=%d seed=%d adversary=%s",
        config.participants, config.secret_len, config.decoys, config.seed, adversary.kind,
    )

    random = SessionRandom(config.seed)
    dealer_rng = random.stream(DEALER)
    secret = config.secret if config.secret is not None else random_bits(
        dealer_rng, config.secret_len
    )
    ledger = DealerLedger.from_encoding(secret, encode_secret(secret, dealer_rng))

    pool = RegisterPool()
    sequences = build_sequences(config, ledger, dealer_rng, pool)

    eve = build_adversary(adversary, random.stream(ADVERSARY), pool)
    channel = Channel(tap=eve.tap if eve.taps_channel else None)
    received = [channel.send(sequence) for sequence in sequences]

    check = run_decoy_check(ledger, received, random, config.abort_threshold)

    validity = False
    recovered: str | None = None
    guess = None
    if check.aborted:
        stage = SessionStage.ABORTED_CHECK
    else:
        shares = measure_shares(strip_decoys(ledger, received), random)
        validity = validity_check(ledger, shares)
        if validity:
            stage = SessionStage.COMPLETED
            recovered = recover_secret(ledger, shares)
        else:
            stage = SessionStage.ABORTED_VALIDITY
            logger.warning("Validity check failed at the test positions, aborting")
        guess = eve.guess_secret(PublicAnnouncement.from_ledger(ledger), shares)

    report = SessionReport(
        config=config,
        adversary=adversary.kind,
        stage=stage,
        aborted=check.aborted,
        error_rate=check.error_rate,
        validity=validity,
        secret=secret,
        dealer_key=ledger.k_a,
        recovered=recovered,
        eve_key_guess=guess.k_a if guess else None,
        eve_secret_guess=guess.secret if guess else None,
        eve_guess_correct=(guess.secret == secret) if guess else None,
        per_pair_check_log=[
            CheckLogEntry(
                participant=e.participant, pair=e.pair, label=e.label, op=e.op, passed=e.passed
            )
            for e in check.entries
        ],
        quantum_transfers=[
            TransferLogEntry(sender=t.sender, receiver=t.receiver, qubits=t.qubits)
            for t in channel.transfers
        ],
        dealer_qubits=pool.allocated[DEALER],
        adversary_qubits=pool.allocated[ADVERSARY],
        rng_streams=random.labels,
    )
    logger.log(level, "Session finish: stage=%s error_rate=%.4f", report.stage, report.error_rate)
    return report


# ── Replay files ─────────────────────────────────────────────


class SessionReplay(BaseModel):
    config: SessionConfig
    adversary: AdversaryConfig
    rng_streams: list[str]
    transcript: SessionReport


def write_replay(
    path: str | Path, report: SessionReport, adversary: AdversaryConfig | None = None
) -> None:
    replay = SessionReplay(
        config=report.config,
        adversary=adversary or AdversaryConfig(kind=report.adversary),
        rng_streams=report.rng_streams,
        transcript=report,
    )
    Path(path).write_text(replay.model_dump_json(indent=2), encoding="utf-8")


def load_replay(path: str | Path) -> SessionReplay:
    return SessionReplay.model_validate_json(Path(path).read_text(encoding="utf-8"))


def verify_replay(replay: SessionReplay) -> bool:
    """Re-run the recorded session and compare the transcripts."""
    rerun = run_session(replay.config, replay.adversary)
    return rerun.model_dump_json() == replay.transcript.model_dump_json()


# ── Exact oracles ────────────────────────────────────────────


def published_detection_formula(decoys: int) -> float:
    """Closed form 1 − (1/4)^K as stated for the CNOT attack."""
    if decoys < 0:
        raise InvalidArgumentError("decoy count must be non-negative")
    return 1.0 - 0.25**decoys


def _require_spec(kind: AdversaryKind, spec: CollectiveSpec | None) -> None:
    if kind is AdversaryKind.COLLECTIVE and spec is None:
        raise InvalidArgumentError("the collective oracle needs a CollectiveSpec")


def _attacked_pair_branches(
    kind: AdversaryKind, label: BellLabel, spec: CollectiveSpec | None = None
) -> list[tuple[float, StateVector, int]]:
    """(weight, joint state, index of the qubit the participant receives)."""
    pair = prepare_decoy_pair(label)
    if kind is AdversaryKind.DCNA:
        return [(1.0, apply_cnot_with_fresh_ancilla(pair, 1), 1)]
    if kind is AdversaryKind.IR_MEASURE:
        branches = []
        for bit in (0, 1):
            probability, post = project_z(pair, 1, bit)
            if post is not None:
                branches.append((probability, post, 1))
        return branches
    if kind is AdversaryKind.IR_FAKE:
        return [(0.5, tensor(pair, prepare_basis_state(bit)), 2) for bit in ("0", "1")]
    if kind is AdversaryKind.COLLECTIVE:
        _require_spec(kind, spec)
        assert spec is not None
        ancillas = spec.ancilla_qubits
        joint = tensor(pair, prepare_basis_state("0" * ancillas))
        gate = build_collective_unitary(spec)
        targets = [1, *range(2, 2 + ancillas)]
        return [(1.0, apply_gate(joint, unitary(gate.matrix, targets, "U_E")), 1)]
    return [(1.0, pair, 1)]


def pair_failure_probability(
    kind: AdversaryKind,
    label: BellLabel,
    op: CheckOp,
    spec: CollectiveSpec | None = None,
) -> float:
    """Exact probability that one decoy pair fails its parity check."""
    failure = 0.0
    for weight, state, received in _attacked_pair_branches(kind, label, spec):
        if op is CheckOp.MH:
            state = apply_gate(apply_gate(state, hadamard(0)), hadamard(received))
        for outcome, probability in outcome_distribution(state, [0, received]).items():
            if not check_passes(label, op, int(outcome[0]), int(outcome[1])):
                failure += weight * probability
    return failure


def detection_by_op(
    kind: AdversaryKind, spec: CollectiveSpec | None = None
) -> dict[CheckOp, float]:
    """Per-pair detection conditional on the check operation, labels uniform."""
    kind = AdversaryKind(kind)
    _require_spec(kind, spec)
    return {
        op: sum(pair_failure_probability(kind, label, op, spec) for label in BellLabel)
        / len(BellLabel)
        for op in CheckOp
    }


def per_pair_detection(kind: AdversaryKind, spec: CollectiveSpec | None = None) -> float:
    by_op = detection_by_op(kind, spec)
    return sum(by_op.values()) / len(by_op)


def exact_detection_probability(
    kind: AdversaryKind, pairs: int, spec: CollectiveSpec | None = None
) -> float:
    """1 − escape^pairs with the per-pair escape probability from enumeration."""
    if pairs < 0:
        raise InvalidArgumentError("pair count must be non-negative")
    if pairs == 0:
        return 0.0
    return 1.0 - (1.0 - per_pair_detection(kind, spec)) ** pairs


def exact_session_detection(
    kind: AdversaryKind,
    participants: int,
    decoys: int,
    abort_threshold: float = 0.0,
    spec: CollectiveSpec | None = None,
    targets: Sequence[int] | None = None,
) -> float:
    """Exact abort probability of one session: binomial tail over M·K pairs.

    Only the tapped participants' pairs can fail; untouched pairs still count
    towards the error-rate denominator.
    """
    total = participants * decoys
    tapped = decoys * (len(set(targets)) if targets is not None else participants)
    p = per_pair_detection(kind, spec)
    first_abort = next((f for f in range(total + 1) if f / total > abort_threshold), None)
    if first_abort is None or first_abort > tapped:
        return 0.0
    if first_abort == 1 and tapped == total:
        return 1.0 - (1.0 - p) ** total
    return math.fsum(
        math.comb(tapped, f) * p**f * (1.0 - p) ** (tapped - f)
        for f in range(first_abort, tapped + 1)
    )


# ── Eve's information ────────────────────────────────────────

Ensemble = list[tuple[float, np.ndarray]]


def holevo_information(ensemble: Sequence[tuple[float, np.ndarray]]) -> float:
    """χ = S(Σ p ρ) − Σ p S(ρ), in bits."""
    if not ensemble:
        raise InvalidArgumentError("empty ensemble")
    probabilities = np.array([p for p, _ in ensemble], dtype=float)
    if np.any(probabilities < -ATOL) or abs(probabilities.sum() - 1.0) > ATOL:
        raise InvalidArgumentError("ensemble probabilities must be non-negative and sum to 1")
    shape = ensemble[0][1].shape
    for _, rho in ensemble:
        if rho.shape != shape or not is_density_matrix(rho):
            raise InvalidArgumentError("ensemble members must be density matrices of one size")

    average = sum(p * rho for p, rho in ensemble)
    chi = von_neumann_entropy(average) - sum(p * von_neumann_entropy(rho) for p, rho in ensemble)
    return float(min(max(chi, 0.0), math.log2(shape[0])))


def _conditional_ensemble(
    state: StateVector, measured: int, ancillas: Sequence[int]
) -> Ensemble:
    ensemble: Ensemble = []
    for bit in (0, 1):
        probability, post = project_z(state, measured, bit)
        if post is not None:
            ensemble.append((probability, partial_trace(post, ancillas)))
    return ensemble


def decoy_ancilla_ensemble(
    kind: AdversaryKind,
    label: BellLabel,
    op: CheckOp,
    spec: CollectiveSpec | None = None,
) -> Ensemble:
    """Eve's ancilla on one decoy pair, conditioned on the participant's check bit."""
    kind = AdversaryKind(kind)
    if kind not in (AdversaryKind.DCNA, AdversaryKind.COLLECTIVE):
        raise InvalidArgumentError(f"{kind} leaves no ancilla")
    ((_, state, received),) = _attacked_pair_branches(kind, label, spec)
    if op is CheckOp.MH:
        state = apply_gate(state, hadamard(received))
    return _conditional_ensemble(state, received, range(2, state.num_qubits))


def _tap_message_qubits(
    state: StateVector,
    qubits: Sequence[int],
    kind: AdversaryKind,
    spec: CollectiveSpec | None,
) -> StateVector:
    for qubit in qubits:
        if kind is AdversaryKind.DCNA:
            state = apply_cnot_with_fresh_ancilla(state, qubit)
        elif kind is AdversaryKind.COLLECTIVE:
            _require_spec(kind, spec)
            assert spec is not None
            first = state.num_qubits
            state = tensor(state, prepare_basis_state("0" * spec.ancilla_qubits))
            targets = [qubit, *range(first, state.num_qubits)]
            matrix = build_collective_unitary(spec).matrix
            state = apply_gate(state, unitary(matrix, targets, "U_E"))
        else:
            raise InvalidArgumentError(f"{kind} leaves no ancilla")
    return state


def message_ancilla_ensemble(
    participants: int,
    kind: AdversaryKind = AdversaryKind.DCNA,
    spec: CollectiveSpec | None = None,
    bit: int = 0,
) -> Ensemble:
    """Eve's ancilla on participant 0's message qubit, conditioned on that share bit."""
    kind = AdversaryKind(kind)
    state = _tap_message_qubits(prepare_message_state(bit, participants), [0], kind, spec)
    return _conditional_ensemble(state, 0, range(participants, state.num_qubits))


def key_bit_ancilla_ensemble(
    participants: int,
    kind: AdversaryKind = AdversaryKind.DCNA,
    spec: CollectiveSpec | None = None,
) -> Ensemble:
    """Eve's ancillas on every qubit of one message slot, for K_A bit 0 and 1."""
    kind = AdversaryKind(kind)
    ensemble: Ensemble = []
    for bit in (0, 1):
        state = prepare_message_state(bit, participants)
        state = _tap_message_qubits(state, range(participants), kind, spec)
        ensemble.append((0.5, partial_trace(state, range(participants, state.num_qubits))))
    return ensemble


def max_decoy_information(kind: AdversaryKind, spec: CollectiveSpec | None = None) -> float:
    return max(
        holevo_information(decoy_ancilla_ensemble(kind, label, op, spec))
        for label in BellLabel
        for op in CheckOp
    )


@dataclass(frozen=True)
class CollectiveSweepRow:
    name: str
    per_pair_detection: float
    max_information: float
    spec: CollectiveSpec


def collective_sweep(draws: int, rng: np.random.Generator) -> list[CollectiveSweepRow]:
    """Structured corner cases followed by ``draws`` Haar-random couplings."""
    specs = [
        ("transparent", CollectiveSpec.transparent()),
        ("cnot_equivalent", CollectiveSpec.cnot_equivalent()),
        ("orthogonal_register", CollectiveSpec.orthogonal_register()),
    ]
    specs += [(f"random-{i}", CollectiveSpec.random(rng)) for i in range(draws)]
    rows = []
    for name, spec in specs:
        rows.append(
            CollectiveSweepRow(
                name=name,
                per_pair_detection=per_pair_detection(AdversaryKind.COLLECTIVE, spec),
                max_information=max_decoy_information(AdversaryKind.COLLECTIVE, spec),
                spec=spec,
            )
        )
    logger.info("Collective sweep evaluated %d couplings", len(rows))
    return rows


# ── Monte Carlo ──────────────────────────────────────────────


class DetectionEstimate(BaseModel):
    model: AdversaryKind
    participants: int
    secret_len: int
    decoys: int
    pairs: int
    trials: int
    detected_fraction: float = Field(ge=0.0, le=1.0)
    standard_error: float = Field(ge=0.0)
    per_pair_detection: float = Field(ge=0.0, le=1.0)
    exact_value: float = Field(ge=0.0, le=1.0)
    exact_per_participant: float = Field(ge=0.0, le=1.0)
    paper_formula_value: float = Field(ge=0.0, le=1.0)


def standard_error(fraction: float, trials: int) -> float:
    return math.sqrt(fraction * (1.0 - fraction) / trials)


def _count_aborts(
    config: SessionConfig, adversary: AdversaryConfig, trial_range: tuple[int, int]
) -> int:
    aborts = 0
    for trial in range(*trial_range):
        trial_config = config.model_copy(update={"seed": derive_seed(config.seed, trial)})
        aborts += run_session(trial_config, adversary, quiet=True).aborted
    return aborts


def _chunks(trials: int, workers: int) -> list[tuple[int, int]]:
    size = math.ceil(trials / workers)
    return [(start, min(start + size, trials)) for start in range(0, trials, size)]


def monte_carlo_detection(
    config: SessionConfig,
    adversary: AdversaryConfig,
    trials: int,
    workers: int = 1,
) -> DetectionEstimate:
    """Fraction of ``trials`` independent sessions that abort at the decoy check.

    Trial ``t`` runs with seed ``derive_seed(config.seed, t)``, so the estimate
    does not depend on ``workers``.
    """
    if trials < 1:
        raise InvalidArgumentError("trials must be at least 1")
    if workers < 1:
        raise InvalidArgumentError("workers must be at least 1")
    adversary.check_participants(config.participants)
    check_register_limit(config, adversary)

    if workers == 1:
        aborts = _count_aborts(config, adversary, (0, trials))
    else:
        chunks = _chunks(trials, workers)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            aborts = sum(
                pool.map(
                    _count_aborts,
                    [config] * len(chunks),
                    [adversary] * len(chunks),
                    chunks,
                )
            )

    fraction = aborts / trials
    kind = adversary.kind
    spec = adversary.collective
    if kind in TAPPING_KINDS:
        per_pair = per_pair_detection(kind, spec)
        exact = exact_session_detection(
            kind, config.participants, config.decoys, config.abort_threshold, spec,
            adversary.targets,
        )
        per_participant = exact_detection_probability(kind, config.decoys, spec)
    else:
        per_pair = exact = per_participant = 0.0

    estimate = DetectionEstimate(
        model=kind,
        participants=config.participants,
        secret_len=config.secret_len,
        decoys=config.decoys,
        pairs=config.participants * config.decoys,
        trials=trials,
        detected_fraction=fraction,
        standard_error=standard_error(fraction, trials),
        per_pair_detection=per_pair,
        exact_value=exact,
        exact_per_participant=per_participant,
        paper_formula_value=published_detection_formula(config.decoys),
    )
    logger.info(
        "Monte Carlo %s M=%d K=%d: detected %.4f ± %.4f (exact %.4f)",
        kind, config.participants, config.decoys, fraction, estimate.standard_error, exact,
    )
    return estimate


def _sample_pair_failure(
    kind: AdversaryKind, rng: np.random.Generator, spec: CollectiveSpec | None
) -> bool:
    labels = list(BellLabel)
    label = labels[int(rng.integers(0, len(labels)))]
    op = CheckOp.MH if rng.integers(0, 2) else CheckOp.M

    pool = RegisterPool()
    register = pool.allocate(prepare_decoy_pair(label), DEALER)
    retained, received = register.handle(0), register.handle(1)
    if kind is AdversaryKind.DCNA:
        dcna_tap(received)
    elif kind is AdversaryKind.IR_MEASURE:
        ir_measure_tap(received, rng)
    elif kind is AdversaryKind.IR_FAKE:
        received = ir_fake_tap(received, rng, pool)
    elif kind is AdversaryKind.COLLECTIVE:
        assert spec is not None
        collective_tap(received, spec)

    if op is CheckOp.MH:
        received.apply(H_MATRIX, "H")
        retained.apply(H_MATRIX, "H")
    participant_bit = received.measure(rng)
    dealer_bit = retained.measure(rng)
    return not check_passes(label, op, dealer_bit, participant_bit)


def monte_carlo_pair_detection(
    kind: AdversaryKind,
    pairs: int,
    trials: int,
    rng: np.random.Generator,
    spec: CollectiveSpec | None = None,
) -> DetectionEstimate:
    """Detection over ``pairs`` tapped decoy pairs, without the rest of a session."""
    kind = AdversaryKind(kind)
    _require_spec(kind, spec)
    if trials < 1 or pairs < 1:
        raise InvalidArgumentError("trials and pairs must be at least 1")
    detected = 0
    for _ in range(trials):
        failures = [_sample_pair_failure(kind, rng, spec) for _ in range(pairs)]
        detected += any(failures)
    fraction = detected / trials
    exact = (
        exact_detection_probability(kind, pairs, spec) if kind in TAPPING_KINDS else 0.0
    )
    return DetectionEstimate(
        model=kind,
        participants=1,
        secret_len=0,
        decoys=pairs,
        pairs=pairs,
        trials=trials,
        detected_fraction=fraction,
        standard_error=standard_error(fraction, trials),
        per_pair_detection=per_pair_detection(kind, spec) if kind in TAPPING_KINDS else 0.0,
        exact_value=exact,
        exact_per_participant=exact,
        paper_formula_value=published_detection_formula(pairs),
    )


# ── Sweeps ───────────────────────────────────────────────────

SWEEP_COLUMNS = (
    "model",
    "M",
    "N",
    "K",
    "pairs",
    "trials",
    "detected_fraction",
    "standard_error",
    "exact",
    "paper_formula",
)


@dataclass(frozen=True)
class SweepRow:
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

    @classmethod
    def from_estimate(cls, estimate: DetectionEstimate) -> SweepRow:
        return cls(
            model=str(estimate.model),
            participants=estimate.participants,
            secret_len=estimate.secret_len,
            decoys=estimate.decoys,
            pairs=estimate.pairs,
            trials=estimate.trials,
            detected_fraction=estimate.detected_fraction,
            standard_error=estimate.standard_error,
            exact=estimate.exact_value,
            paper_formula=estimate.paper_formula_value,
        )

    def as_csv_row(self) -> list[str]:
        return [
            self.model,
            str(self.participants),
            str(self.secret_len),
            str(self.decoys),
            str(self.pairs),
            str(self.trials),
            repr(self.detected_fraction),
            repr(self.standard_error),
            repr(self.exact),
            repr(self.paper_formula),
        ]


def run_sweep(
    adversaries: Iterable[AdversaryConfig],
    decoys: Iterable[int],
    trials: Iterable[int],
    participants: int = 3,
    secret_len: int = 16,
    seed: int = 7,
    abort_threshold: float = 0.0,
    workers: int = 1,
) -> list[SweepRow]:
    """One row per (adversary, K, trials) grid point, in grid order."""
    rows = []
    decoys, trials = list(decoys), list(trials)
    for adversary in adversaries:
        for k in decoys:
            for t in trials:
                config = SessionConfig(
                    participants=participants,
                    secret_len=secret_len,
                    decoys=k,
                    abort_threshold=abort_threshold,
                    seed=seed,
                )
                logger.info("Sweep point %s K=%d trials=%d", adversary.kind, k, t)
                estimate = monte_carlo_detection(config, adversary, t, workers)
                rows.append(SweepRow.from_estimate(estimate))
    return rows


def write_sweep_csv(rows: Iterable[SweepRow], stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow(row.as_csv_row())


def sweep_rows_json(rows: Iterable[SweepRow]) -> str:
    return json.dumps([asdict(r) for r in rows], indent=2)
