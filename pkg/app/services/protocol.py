"""The four-step secret sharing scheme as a deterministic state machine.

Flow:
  1. Encode: embed the secret S with N random test bits at random positions → K_A
  2. Prepare: one M-qubit parity state per K_A bit, split across participants,
     plus K decoy Bell pairs per participant inserted at random positions
  3. Check: participants pick M or MH per decoy, the dealer mirrors, parities
     are compared against the Bell/Hadamard correlation table
  4. Share: participants Z-measure the message slots, the test bits validate
     the XOR relation, the remaining bits recover S

Every random choice is drawn from a named substream of a SessionRandom so a
session replays bit-exactly from its seed.
"""

from __future__ import annotations

import logging
import zlib
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from enum import StrEnum
from functools import lru_cache

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.errors import InvalidArgumentError, ProtocolViolationError
from app.services.qsim import (
    H_MATRIX,
    QubitHandle,
    RegisterPool,
    StateVector,
)

logger = logging.getLogger(__name__)

MIN_PARTICIPANTS = 2
MAX_PARTICIPANTS = 16
DEALER = "dealer"


class BellLabel(StrEnum):
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"


class CheckOp(StrEnum):
    M = "M"    # Z measurement
    MH = "MH"  # Hadamard, then Z measurement


class Parity(StrEnum):
    EQUAL = "equal"
    OPPOSITE = "opposite"


class SlotKind(StrEnum):
    MESSAGE = "message"
    DECOY = "decoy"


_S = 1 / np.sqrt(2)

BELL_AMPLITUDES: dict[BellLabel, tuple[complex, complex, complex, complex]] = {
    BellLabel.PHI_PLUS: (_S, 0, 0, _S),
    BellLabel.PHI_MINUS: (_S, 0, 0, -_S),
    BellLabel.PSI_PLUS: (0, _S, _S, 0),
    BellLabel.PSI_MINUS: (0, _S, -_S, 0),
}

# (H ⊗ H) maps phi+ → phi+, phi- → psi+, psi+ → phi-, psi- → -psi-
HADAMARD_PARTNER: dict[BellLabel, BellLabel] = {
    BellLabel.PHI_PLUS: BellLabel.PHI_PLUS,
    BellLabel.PHI_MINUS: BellLabel.PSI_PLUS,
    BellLabel.PSI_PLUS: BellLabel.PHI_MINUS,
    BellLabel.PSI_MINUS: BellLabel.PSI_MINUS,
}

CORRELATION_RULES: dict[tuple[BellLabel, CheckOp], Parity] = {
    (BellLabel.PHI_PLUS, CheckOp.M): Parity.EQUAL,
    (BellLabel.PHI_PLUS, CheckOp.MH): Parity.EQUAL,
    (BellLabel.PHI_MINUS, CheckOp.M): Parity.EQUAL,
    (BellLabel.PHI_MINUS, CheckOp.MH): Parity.OPPOSITE,
    (BellLabel.PSI_PLUS, CheckOp.M): Parity.OPPOSITE,
    (BellLabel.PSI_PLUS, CheckOp.MH): Parity.EQUAL,
    (BellLabel.PSI_MINUS, CheckOp.M): Parity.OPPOSITE,
    (BellLabel.PSI_MINUS, CheckOp.MH): Parity.OPPOSITE,
}


def check_passes(label: BellLabel, op: CheckOp, dealer_bit: int, participant_bit: int) -> bool:
    """Whether two outcomes satisfy the correlation rule for ``(label, op)``."""
    equal = dealer_bit == participant_bit
    return equal if CORRELATION_RULES[(label, op)] is Parity.EQUAL else not equal


# ── Configuration and randomness ─────────────────────────────


class SessionConfig(BaseModel):
    """Full parameterization of one protocol run."""

    model_config = ConfigDict(frozen=True)

    participants: int = Field(default=3, ge=MIN_PARTICIPANTS, le=MAX_PARTICIPANTS)
    secret_len: int = Field(default=16, ge=1)
    decoys: int = Field(default=16, ge=1)
    abort_threshold: float = Field(default=0.0, ge=0.0, lt=1.0)
    seed: int = Field(default=7, ge=0, le=2**64 - 1)
    secret: str | None = None  # drawn from the dealer stream when omitted

    @model_validator(mode="after")
    def _secret_matches_length(self) -> SessionConfig:
        if self.secret is not None:
            if not self.secret or set(self.secret) - {"0", "1"}:
                raise ValueError(f"secret must be a non-empty bit string, got {self.secret!r}")
            if len(self.secret) != self.secret_len:
                raise ValueError(
                    f"secret has {len(self.secret)} bits but secret_len is {self.secret_len}"
                )
        return self

    @property
    def sequence_length(self) -> int:
        """Slots per transmitted sequence: 2N message qubits plus K decoys."""
        return 2 * self.secret_len + self.decoys


class SessionRandom:
    """A seeded generator split into independent, named substreams."""

    def __init__(self, seed: int) -> None:
        self.seed = seed
        self._streams: dict[str, np.random.Generator] = {}

    def stream(self, label: str) -> np.random.Generator:
        if label not in self._streams:
            sequence = np.random.SeedSequence(
                entropy=self.seed, spawn_key=(zlib.crc32(label.encode()),)
            )
            self._streams[label] = np.random.default_rng(sequence)
        return self._streams[label]

    @property
    def labels(self) -> list[str]:
        return sorted(self._streams)


def participant_stream(index: int) -> str:
    return f"participant-{index}"


def derive_seed(seed: int, index: int) -> int:
    """Independent 64-bit seed for trial ``index`` of a run seeded with ``seed``."""
    state = np.random.SeedSequence(entropy=seed, spawn_key=(index,)).generate_state(
        1, np.uint64
    )
    return int(state[0])


def random_bits(rng: np.random.Generator, length: int) -> str:
    return "".join("1" if b else "0" for b in rng.integers(0, 2, size=length))


def xor_bits(strings: Sequence[str]) -> str:
    """Bitwise XOR of equal-length bit strings."""
    if not strings:
        raise InvalidArgumentError("nothing to XOR")
    length = len(strings[0])
    if any(len(s) != length for s in strings):
        raise InvalidArgumentError("bit strings differ in length")
    acc = np.zeros(length, dtype=np.uint8)
    for s in strings:
        acc ^= np.frombuffer(s.encode(), dtype=np.uint8) - ord("0")
    return "".join("1" if b else "0" for b in acc)


# ── Step 01: encoding ────────────────────────────────────────


@dataclass(frozen=True)
class EncodedSecret:
    k_a: str
    secret_positions: list[int]
    test_positions: list[int]


def encode_secret(secret: str, rng: np.random.Generator) -> EncodedSecret:
    """Embed ``secret`` with as many random test bits at random positions."""
    if not secret:
        raise InvalidArgumentError("secret must not be empty")
    if set(secret) - {"0", "1"}:
        raise InvalidArgumentError(f"not a bit string: {secret!r}")
    n = len(secret)
    secret_positions = sorted(int(p) for p in rng.choice(2 * n, size=n, replace=False))
    chosen = set(secret_positions)
    test_positions = [p for p in range(2 * n) if p not in chosen]
    test_bits = random_bits(rng, n)

    k_a = ["0"] * (2 * n)
    for position, bit in zip(secret_positions, secret, strict=True):
        k_a[position] = bit
    for position, bit in zip(test_positions, test_bits, strict=True):
        k_a[position] = bit
    return EncodedSecret("".join(k_a), secret_positions, test_positions)


@lru_cache(maxsize=MAX_PARTICIPANTS + 1)
def _parity_table(participants: int) -> np.ndarray:
    indices = np.arange(1 << participants)
    parity = np.zeros_like(indices)
    for shift in range(participants):
        parity ^= (indices >> shift) & 1
    return parity


def prepare_message_state(bit: int, participants: int) -> StateVector:
    """(|+>^⊗M ± |->^⊗M)/√2: uniform over the Z strings whose parity equals ``bit``."""
    if not MIN_PARTICIPANTS <= participants <= MAX_PARTICIPANTS:
        raise InvalidArgumentError(
            f"participant count must be in [{MIN_PARTICIPANTS}, {MAX_PARTICIPANTS}]"
        )
    if bit not in (0, 1):
        raise InvalidArgumentError(f"bit must be 0 or 1, got {bit}")
    amplitude = 2.0 ** (-(participants - 1) / 2)
    amps = np.where(_parity_table(participants) == bit, amplitude, 0.0).astype(complex)
    return StateVector(participants, amps)


def prepare_decoy_pair(label: BellLabel) -> StateVector:
    """Bell pair; qubit 0 stays with the dealer, qubit 1 is transmitted."""
    return StateVector(2, np.array(BELL_AMPLITUDES[BellLabel(label)], dtype=complex))


# ── Step 02: sequences and the dealer's ledger ───────────────


@dataclass
class DealerLedger:
    """Everything the dealer keeps track of during a session."""

    secret: str
    k_a: str
    secret_positions: list[int]
    test_positions: list[int]
    decoy_positions: list[list[int]] = field(default_factory=list)
    decoy_labels: list[list[BellLabel]] = field(default_factory=list)
    retained_halves: list[list[QubitHandle]] = field(default_factory=list)

    @classmethod
    def from_encoding(cls, secret: str, encoded: EncodedSecret) -> DealerLedger:
        return cls(
            secret=secret,
            k_a=encoded.k_a,
            secret_positions=encoded.secret_positions,
            test_positions=encoded.test_positions,
        )


@dataclass(frozen=True)
class Slot:
    """One transmitted qubit; the tag is dealer-side knowledge only."""

    handle: QubitHandle
    kind: SlotKind
    index: int


@dataclass
class TransmittedSequence:
    participant: int
    slots: list[Slot]

    def __len__(self) -> int:
        return len(self.slots)


def build_sequences(
    config: SessionConfig,
    ledger: DealerLedger,
    rng: np.random.Generator,
    pool: RegisterPool | None = None,
) -> list[TransmittedSequence]:
    """Prepare message and decoy states and interleave them per participant.

    Records decoy positions, labels and retained halves in ``ledger``.
    """
    pool = pool or RegisterPool()
    m = config.participants
    n_slots = len(ledger.k_a)

    message_handles: list[list[QubitHandle]] = [[] for _ in range(m)]
    for bit in ledger.k_a:
        register = pool.allocate(prepare_message_state(int(bit), m), DEALER)
        for i in range(m):
            message_handles[i].append(register.handle(i))

    labels = list(BellLabel)
    sequences: list[TransmittedSequence] = []
    for i in range(m):
        drawn = [labels[int(x)] for x in rng.integers(0, len(labels), size=config.decoys)]
        retained: list[QubitHandle] = []
        transmitted: list[QubitHandle] = []
        for label in drawn:
            register = pool.allocate(prepare_decoy_pair(label), DEALER)
            retained.append(register.handle(0))
            transmitted.append(register.handle(1))

        total = n_slots + config.decoys
        positions = sorted(int(p) for p in rng.choice(total, size=config.decoys, replace=False))
        decoy_at = set(positions)

        slots: list[Slot] = []
        next_message = 0
        next_decoy = 0
        for position in range(total):
            if position in decoy_at:
                slots.append(Slot(transmitted[next_decoy], SlotKind.DECOY, next_decoy))
                next_decoy += 1
            else:
                slots.append(
                    Slot(message_handles[i][next_message], SlotKind.MESSAGE, next_message)
                )
                next_message += 1

        ledger.decoy_positions.append(positions)
        ledger.decoy_labels.append(drawn)
        ledger.retained_halves.append(retained)
        sequences.append(TransmittedSequence(participant=i, slots=slots))

    return sequences


# ── The one-way quantum channel ──────────────────────────────

Tap = Callable[[int, int, QubitHandle], QubitHandle]


@dataclass(frozen=True)
class Transfer:
    sender: str
    receiver: str
    qubits: int


class Channel:
    """Dealer → participant quantum channel.

    There is no transfer in the other direction.  A tap sees the participant
    index, the slot position and the qubit, never the slot tag, and returns
    the qubit that continues to the participant.
    """

    def __init__(self, tap: Tap | None = None) -> None:
        self._tap = tap
        self.transfers: list[Transfer] = []

    def send(self, sequence: TransmittedSequence) -> TransmittedSequence:
        forwarded = sequence.slots
        if self._tap is not None:
            forwarded = [
                Slot(self._tap(sequence.participant, position, slot.handle), slot.kind, slot.index)
                for position, slot in enumerate(sequence.slots)
            ]
        self.transfers.append(
            Transfer(DEALER, participant_stream(sequence.participant), len(sequence.slots))
        )
        return TransmittedSequence(participant=sequence.participant, slots=forwarded)


# ── Step 03: eavesdropping check ─────────────────────────────


@dataclass(frozen=True)
class CheckEntry:
    participant: int
    pair: int
    label: BellLabel
    op: CheckOp
    dealer_bit: int
    participant_bit: int
    passed: bool


@dataclass
class DecoyCheckResult:
    error_rate: float
    aborted: bool
    entries: list[CheckEntry]

    @property
    def failures(self) -> int:
        return sum(not e.passed for e in self.entries)


def _validate_received(ledger: DealerLedger, sequences: Sequence[TransmittedSequence]) -> None:
    if len(sequences) != len(ledger.decoy_positions):
        raise ProtocolViolationError(
            f"expected {len(ledger.decoy_positions)} sequences, got {len(sequences)}"
        )
    for i, sequence in enumerate(sequences):
        expected = len(ledger.k_a) + len(ledger.decoy_positions[i])
        if sequence.participant != i or len(sequence) != expected:
            raise ProtocolViolationError(
                f"sequence {i} has {len(sequence)} slots, expected {expected}"
            )


def run_decoy_check(
    ledger: DealerLedger,
    sequences: Sequence[TransmittedSequence],
    random: SessionRandom,
    abort_threshold: float = 0.0,
) -> DecoyCheckResult:
    """Participants choose M/MH per decoy, the dealer mirrors, parities are compared."""
    _validate_received(ledger, sequences)
    dealer_rng = random.stream(DEALER)
    entries: list[CheckEntry] = []

    for i, sequence in enumerate(sequences):
        rng = random.stream(participant_stream(i))
        for k, position in enumerate(ledger.decoy_positions[i]):
            op = CheckOp.MH if rng.integers(0, 2) else CheckOp.M
            received = sequence.slots[position].handle
            retained = ledger.retained_halves[i][k]
            if op is CheckOp.MH:
                received.apply(H_MATRIX, "H")
                retained.apply(H_MATRIX, "H")
            participant_bit = received.measure(rng)
            dealer_bit = retained.measure(dealer_rng)

            label = ledger.decoy_labels[i][k]
            passed = check_passes(label, op, dealer_bit, participant_bit)
            entries.append(CheckEntry(i, k, label, op, dealer_bit, participant_bit, passed))
            logger.debug(
                "decoy check participant=%d pair=%d label=%s op=%s pass=%s",
                i, k, label, op, passed,
            )

    failures = sum(not e.passed for e in entries)
    error_rate = failures / len(entries) if entries else 0.0
    aborted = error_rate > abort_threshold
    if aborted:
        logger.warning(
            "Decoy check failed %d/%d pairs (error rate %.4f > %.4f), aborting",
            failures, len(entries), error_rate, abort_threshold,
        )
    return DecoyCheckResult(error_rate=error_rate, aborted=aborted, entries=entries)


# ── Step 04: shares, validity, recovery ──────────────────────


@dataclass(frozen=True)
class ShareSet:
    """One 2N-bit Z-measurement record per participant."""

    shares: list[str]

    def combined(self) -> str:
        return xor_bits(self.shares)


def strip_decoys(
    ledger: DealerLedger, sequences: Sequence[TransmittedSequence]
) -> list[list[QubitHandle]]:
    """Drop the announced decoy positions, keeping message slots in order."""
    _validate_received(ledger, sequences)
    kept: list[list[QubitHandle]] = []
    for i, sequence in enumerate(sequences):
        decoys = set(ledger.decoy_positions[i])
        kept.append([s.handle for p, s in enumerate(sequence.slots) if p not in decoys])
    return kept


def measure_shares(
    message_handles: Sequence[Sequence[QubitHandle]], random: SessionRandom
) -> ShareSet:
    """Every participant Z-measures their message slots in order."""
    shares = []
    for i, handles in enumerate(message_handles):
        rng = random.stream(participant_stream(i))
        shares.append("".join(str(h.measure(rng)) for h in handles))
    return ShareSet(shares)


def validity_check(ledger: DealerLedger, shares: ShareSet) -> bool:
    """XOR of the shares must match K_A at every test position."""
    combined = shares.combined()
    if len(combined) != len(ledger.k_a):
        return False
    return all(combined[p] == ledger.k_a[p] for p in ledger.test_positions)


def recover_secret(ledger: DealerLedger, shares: ShareSet) -> str:
    """XOR of the shares read at the secret positions."""
    if not validity_check(ledger, shares):
        raise ProtocolViolationError("cannot recover the secret after a failed validity check")
    combined = shares.combined()
    return "".join(combined[p] for p in ledger.secret_positions)
