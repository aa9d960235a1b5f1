"""Channel-tap strategies for an eavesdropper on the dealer → participant channel.

Each strategy taps transmitted qubits one at a time (it never sees which
slots are decoys), keeps its own memory, and after the public position
announcements tries to rebuild K_A and the secret.  Dishonest participants
pooling their classical shares are modeled alongside as ``collusion``.
"""

from __future__ import annotations

import json
import logging
from abc import ABC, abstractmethod
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from enum import StrEnum
from pathlib import Path
from typing import Annotated, Any, ClassVar

import numpy as np
from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    PlainSerializer,
    field_validator,
    model_validator,
)

from app.core.errors import InvalidArgumentError
from app.services.protocol import (
    DealerLedger,
    ShareSet,
    random_bits,
    xor_bits,
)
from app.services.qsim import (
    ATOL,
    CNOT_MATRIX,
    Gate,
    QuantumRegister,
    QubitHandle,
    RegisterPool,
    prepare_basis_state,
)

logger = logging.getLogger(__name__)

ADVERSARY = "adversary"


class AdversaryKind(StrEnum):
    NONE = "none"
    DCNA = "dcna"
    IR_MEASURE = "ir_measure"
    IR_FAKE = "ir_fake"
    COLLECTIVE = "collective"
    COLLUSION = "collusion"

    @classmethod
    def parse(cls, value: str) -> AdversaryKind:
        """Accept both ``ir_measure`` and the command-line spelling ``ir-measure``."""
        try:
            return cls(value.strip().lower().replace("-", "_"))
        except ValueError:
            raise InvalidArgumentError(f"unknown adversary kind: {value!r}") from None


# Quantum taps; ``none`` and ``collusion`` leave the channel untouched
TAPPING_KINDS = frozenset(
    {AdversaryKind.DCNA, AdversaryKind.IR_MEASURE, AdversaryKind.IR_FAKE, AdversaryKind.COLLECTIVE}
)


# ── Collective attack specification ──────────────────────────


def _to_pair(value: Any) -> Any:
    if isinstance(value, complex | int | float) and not isinstance(value, bool):
        return (float(value.real), float(value.imag))
    return value


ComplexPair = Annotated[tuple[float, float], BeforeValidator(_to_pair)]
ComplexVector = list[ComplexPair]


def _as_complex(pair: Sequence[float]) -> complex:
    return complex(pair[0], pair[1])


def _as_array(vector: Sequence[Sequence[float]]) -> np.ndarray:
    return np.array([_as_complex(p) for p in vector], dtype=complex)


def _pairs(values: np.ndarray) -> list[tuple[float, float]]:
    return [(float(v.real), float(v.imag)) for v in np.asarray(values).reshape(-1)]


class CollectiveMode(StrEnum):
    STRUCTURED = "structured"
    RANDOM_UNITARY = "random_unitary"


class CollectiveSpec(BaseModel):
    """Eve's coupling U_E between a transit qubit and a fresh ancilla |e> = |0…0>.

    Structured mode:  U_E|0>|e> = a|0>|e00> + b|1>|e01>
                      U_E|1>|e> = c|0>|e10> + d|1>|e11>
    with the ancilla vectors given in ``e_vectors`` (order e00, e01, e10, e11)
    in a 2- or 4-dimensional ancilla space.  Random-unitary mode carries the
    full 4×4 matrix on transit ⊗ one ancilla qubit.
    """

    model_config = ConfigDict(frozen=True)

    mode: CollectiveMode = CollectiveMode.STRUCTURED
    a: ComplexPair = (1.0, 0.0)
    b: ComplexPair = (0.0, 0.0)
    c: ComplexPair = (0.0, 0.0)
    d: ComplexPair = (1.0, 0.0)
    e_vectors: list[ComplexVector] | None = None
    unitary: list[ComplexVector] | None = None  # rows

    @model_validator(mode="after")
    def _check_invariants(self) -> CollectiveSpec:
        if self.mode is CollectiveMode.RANDOM_UNITARY:
            if self.unitary is None:
                raise ValueError("random_unitary mode needs a 4x4 'unitary'")
            matrix = np.array([[_as_complex(p) for p in row] for row in self.unitary])
            if matrix.shape != (4, 4):
                raise ValueError(f"unitary must be 4x4, got {matrix.shape}")
            if not np.allclose(matrix.conj().T @ matrix, np.eye(4), atol=ATOL):
                raise ValueError("unitary is not unitary within 1e-9")
            return self

        if self.e_vectors is None or len(self.e_vectors) != 4:
            raise ValueError("structured mode needs four ancilla vectors e00, e01, e10, e11")
        dims = {len(v) for v in self.e_vectors}
        if len(dims) != 1 or dims.pop() not in (2, 4):
            raise ValueError("ancilla vectors must all have dimension 2 or 4")
        a, b, c, d = (_as_complex(x) for x in (self.a, self.b, self.c, self.d))
        if abs(abs(a) ** 2 + abs(b) ** 2 - 1) > ATOL or abs(abs(c) ** 2 + abs(d) ** 2 - 1) > ATOL:
            raise ValueError("coefficients must satisfy |a|²+|b|² = |c|²+|d|² = 1")
        zero_image, one_image = self.images()
        gram = np.array(
            [
                [np.vdot(zero_image, zero_image), np.vdot(zero_image, one_image)],
                [np.vdot(one_image, zero_image), np.vdot(one_image, one_image)],
            ]
        )
        if not np.allclose(gram, np.eye(2), atol=ATOL):
            raise ValueError("the images of |0>|e> and |1>|e> are not orthonormal")
        return self

    # ── Derived quantities ──

    @property
    def ancilla_dim(self) -> int:
        if self.mode is CollectiveMode.RANDOM_UNITARY or self.e_vectors is None:
            return 2
        return len(self.e_vectors[0])

    @property
    def ancilla_qubits(self) -> int:
        return self.ancilla_dim.bit_length() - 1

    def images(self) -> tuple[np.ndarray, np.ndarray]:
        """U_E|0>|e> and U_E|1>|e> as vectors on transit ⊗ ancilla."""
        if self.mode is CollectiveMode.RANDOM_UNITARY:
            matrix = self.matrix_or_none()
            assert matrix is not None
            return matrix[:, 0], matrix[:, 2]
        assert self.e_vectors is not None
        e00, e01, e10, e11 = (_as_array(v) for v in self.e_vectors)
        zero, one = np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)
        a, b, c, d = (_as_complex(x) for x in (self.a, self.b, self.c, self.d))
        zero_image = a * np.kron(zero, e00) + b * np.kron(one, e01)
        one_image = c * np.kron(zero, e10) + d * np.kron(one, e11)
        return zero_image, one_image

    def matrix_or_none(self) -> np.ndarray | None:
        if self.unitary is None:
            return None
        return np.array([[_as_complex(p) for p in row] for row in self.unitary], dtype=complex)

    # ── Constructors ──

    @classmethod
    def structured(
        cls,
        a: complex,
        b: complex,
        c: complex,
        d: complex,
        e_vectors: Sequence[Sequence[complex]],
    ) -> CollectiveSpec:
        return cls(
            mode=CollectiveMode.STRUCTURED,
            a=_to_pair(a),
            b=_to_pair(b),
            c=_to_pair(c),
            d=_to_pair(d),
            e_vectors=[_pairs(np.asarray(v, dtype=complex)) for v in e_vectors],
        )

    @classmethod
    def transparent(cls) -> CollectiveSpec:
        """b = c = 0, a = d = 1, e00 = e11: the ancilla never couples."""
        return cls.structured(1, 0, 0, 1, [[1, 0], [0, 1], [0, 1], [1, 0]])

    @classmethod
    def cnot_equivalent(cls) -> CollectiveSpec:
        """b = c = 0, a = d = 1, e00 = |0>, e11 = |1>: the CNOT coupling."""
        return cls.structured(1, 0, 0, 1, [[1, 0], [0, 1], [1, 0], [0, 1]])

    @classmethod
    def orthogonal_register(cls) -> CollectiveSpec:
        """b = c = 0, a = d = 1 with e_ij = |ij> in a 4-dimensional ancilla."""
        basis = np.eye(4, dtype=complex)
        return cls.structured(1, 0, 0, 1, [basis[0], basis[1], basis[2], basis[3]])

    @classmethod
    def random(cls, rng: np.random.Generator) -> CollectiveSpec:
        """Haar-random 4×4 coupling on transit ⊗ one ancilla qubit."""
        ginibre = (rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))) / np.sqrt(2)
        q, r = np.linalg.qr(ginibre)
        phases = np.diag(r) / np.abs(np.diag(r))
        matrix = q * phases
        return cls(
            mode=CollectiveMode.RANDOM_UNITARY,
            unitary=[_pairs(row) for row in matrix],
        )

    @classmethod
    def load(cls, path: str | Path) -> CollectiveSpec:
        return cls.model_validate(json.loads(Path(path).read_text(encoding="utf-8")))

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(self.model_dump_json(indent=2), encoding="utf-8")


def build_collective_unitary(spec: CollectiveSpec) -> Gate:
    """Full unitary on transit ⊗ ancilla (transit is local qubit 0).

    Columns for |0>|e> and |1>|e> are the spec's images; the remaining
    columns are a Gram–Schmidt completion over the canonical basis in
    ascending order.
    """
    targets = tuple(range(1 + spec.ancilla_qubits))
    matrix = spec.matrix_or_none()
    if matrix is not None:
        return Gate("U_E", matrix, targets)

    dim = 2 * spec.ancilla_dim
    zero_image, one_image = spec.images()
    for name, vector in (("|0>|e>", zero_image), ("|1>|e>", one_image)):
        if abs(np.linalg.norm(vector) - 1) > ATOL:
            raise InvalidArgumentError(f"image of {name} is not normalized")
    if abs(np.vdot(zero_image, one_image)) > ATOL:
        raise InvalidArgumentError("images of |0>|e> and |1>|e> are not orthogonal")

    columns: dict[int, np.ndarray] = {0: zero_image, spec.ancilla_dim: one_image}
    basis = [zero_image, one_image]
    free = [i for i in range(dim) if i not in columns]
    for candidate in np.eye(dim, dtype=complex):
        if len(basis) == dim:
            break
        v = candidate - sum(np.vdot(u, candidate) * u for u in basis)
        norm = np.linalg.norm(v)
        if norm > 1e-6:
            basis.append(v / norm)
            columns[free.pop(0)] = v / norm

    completed = np.column_stack([columns[i] for i in range(dim)])
    return Gate("U_E", completed, targets)


def collective_decoder(spec: CollectiveSpec) -> dict[int, int]:
    """Maximum-likelihood transit bit for each Z outcome of Eve's ancilla register."""
    matrix = build_collective_unitary(spec).matrix
    dim = spec.ancilla_dim
    decoder: dict[int, int] = {}
    for outcome in range(dim):
        likelihood = [
            sum(abs(matrix[y * dim + outcome, x * dim]) ** 2 for y in (0, 1)) for x in (0, 1)
        ]
        decoder[outcome] = int(likelihood[1] > likelihood[0])
    return decoder


# ── Taps ─────────────────────────────────────────────────────


def dcna_tap(handle: QubitHandle) -> list[QubitHandle]:
    """CNOT the transit qubit onto a fresh |0> ancilla; returns the ancilla."""
    register = handle.register
    (ancilla,) = register.extend(prepare_basis_state("0"), ADVERSARY)
    register.apply(CNOT_MATRIX, [handle.index, ancilla], "CNOT")
    return [register.handle(ancilla)]


def ir_measure_tap(handle: QubitHandle, rng: np.random.Generator) -> int:
    """Z-measure the transit qubit in place; the collapsed qubit travels on."""
    return handle.measure(rng)


def ir_fake_tap(
    handle: QubitHandle, rng: np.random.Generator, pool: RegisterPool | None = None
) -> QubitHandle:
    """Keep the transit qubit and forward a uniformly random Z-basis qubit."""
    fake = prepare_basis_state(str(int(rng.integers(0, 2))))
    register = pool.allocate(fake, ADVERSARY) if pool is not None else QuantumRegister(fake)
    return register.handle(0)


def collective_tap(handle: QubitHandle, spec: CollectiveSpec) -> list[QubitHandle]:
    """Couple the transit qubit to a fresh ancilla register through U_E."""
    register = handle.register
    ancillas = register.extend(prepare_basis_state("0" * spec.ancilla_qubits), ADVERSARY)
    gate = build_collective_unitary(spec)
    register.apply(gate.matrix, [handle.index, *ancillas], "U_E")
    return [register.handle(i) for i in ancillas]


# ── Post-session guesses ─────────────────────────────────────


@dataclass(frozen=True)
class PublicAnnouncement:
    """What the dealer says on the public channel during Steps 03 and 04."""

    decoy_positions: list[list[int]]
    test_positions: list[int]
    key_length: int

    @property
    def secret_positions(self) -> list[int]:
        tests = set(self.test_positions)
        return [p for p in range(self.key_length) if p not in tests]

    @classmethod
    def from_ledger(cls, ledger: DealerLedger) -> PublicAnnouncement:
        return cls(
            decoy_positions=[list(p) for p in ledger.decoy_positions],
            test_positions=list(ledger.test_positions),
            key_length=len(ledger.k_a),
        )


@dataclass(frozen=True)
class EveGuess:
    k_a: str
    secret: str


SlotKey = tuple[int, int]  # (participant, position in the transmitted sequence)


def _message_positions(announcement: PublicAnnouncement, participant: int) -> list[int]:
    decoys = set(announcement.decoy_positions[participant])
    length = announcement.key_length + len(announcement.decoy_positions[participant])
    return [p for p in range(length) if p not in decoys]


def reconstruct_from_slot_bits(
    bits: Mapping[SlotKey, int], announcement: PublicAnnouncement
) -> EveGuess | None:
    """XOR per-slot bits across participants into guesses for K_A and S."""
    shares = []
    for i in range(len(announcement.decoy_positions)):
        positions = _message_positions(announcement, i)
        if any((i, p) not in bits for p in positions):
            return None
        shares.append("".join(str(bits[(i, p)]) for p in positions))
    k_a = xor_bits(shares)
    return EveGuess(k_a, "".join(k_a[p] for p in announcement.secret_positions))


def eve_guess_dcna(
    ancillas: Mapping[SlotKey, Sequence[QubitHandle]],
    announcement: PublicAnnouncement,
    rng: np.random.Generator,
) -> EveGuess | None:
    """Z-measure the ancillas of message slots and XOR them per slot.

    Decoy-slot ancillas are left alone: their positions are known, and they
    carry nothing about K_A.
    """
    bits: dict[SlotKey, int] = {}
    for i in range(len(announcement.decoy_positions)):
        for p in _message_positions(announcement, i):
            if (i, p) in ancillas:
                bits[(i, p)] = ancillas[(i, p)][0].measure(rng)
    return reconstruct_from_slot_bits(bits, announcement)


@dataclass(frozen=True)
class CollusionGuess:
    secret: str
    success: bool


def fill_missing_shares(
    dishonest_shares: Mapping[int, str], participants: int, rng: np.random.Generator
) -> str:
    """XOR of the pooled shares with uniform bits standing in for every withheld one."""
    if not dishonest_shares:
        raise InvalidArgumentError("collusion needs at least one dishonest share")
    length = len(next(iter(dishonest_shares.values())))
    shares = [
        dishonest_shares[i] if i in dishonest_shares else random_bits(rng, length)
        for i in range(participants)
    ]
    return xor_bits(shares)


def guess_missing_shares(
    dishonest_shares: Mapping[int, str],
    participants: int,
    secret_positions: Sequence[int],
    rng: np.random.Generator,
) -> str:
    """Fill every withheld share with uniform bits and read the secret positions."""
    combined = fill_missing_shares(dishonest_shares, participants, rng)
    return "".join(combined[p] for p in secret_positions)


def collusion_guess(
    dishonest_shares: Mapping[int, str],
    ledger: DealerLedger,
    participants: int,
    rng: np.random.Generator,
) -> CollusionGuess:
    """Pool the dishonest shares, guess the rest, and compare with the secret."""
    guess = guess_missing_shares(dishonest_shares, participants, ledger.secret_positions, rng)
    return CollusionGuess(secret=guess, success=guess == ledger.secret)


# ── Configurable, stateful adversaries ───────────────────────


class AdversaryConfig(BaseModel):
    """Which attack to mount, on whom, and with what parameters."""

    model_config = ConfigDict(frozen=True)

    kind: AdversaryKind = AdversaryKind.NONE
    collective: CollectiveSpec | None = None
    dishonest: list[int] | None = None  # collusion; default: all but participant 0
    targets: list[int] | None = None  # tapped participants; default: all

    @field_validator("kind", mode="before")
    @classmethod
    def _parse_kind(cls, value: Any) -> Any:
        if isinstance(value, str):
            return value.strip().lower().replace("-", "_")
        return value

    @model_validator(mode="after")
    def _collective_needs_spec(self) -> AdversaryConfig:
        if self.kind is AdversaryKind.COLLECTIVE and self.collective is None:
            raise ValueError("the collective adversary needs a CollectiveSpec")
        return self

    def check_participants(self, participants: int) -> None:
        if self.dishonest is not None and not self.dishonest:
            raise InvalidArgumentError("collusion needs at least one dishonest participant")
        for name, indices in (("dishonest", self.dishonest), ("targets", self.targets)):
            if indices is None:
                continue
            bad = [i for i in indices if not 0 <= i < participants]
            if bad:
                raise InvalidArgumentError(f"{name} indices out of range: {bad}")

    @property
    def ancilla_qubits(self) -> int:
        """Qubits one tap appends to the tapped slot's register."""
        if self.kind is AdversaryKind.DCNA:
            return 1
        if self.kind is AdversaryKind.COLLECTIVE and self.collective is not None:
            return self.collective.ancilla_qubits
        return 0

    def message_register_qubits(self, participants: int) -> int:
        """Size of one message slot's register once every targeted share is tapped."""
        tapped = participants if self.targets is None else len(set(self.targets))
        return participants + tapped * self.ancilla_qubits


@dataclass
class AdversaryMemory:
    ancillas: dict[SlotKey, list[QubitHandle]] = field(default_factory=dict)
    recorded_bits: dict[SlotKey, int] = field(default_factory=dict)
    stored_qubits: dict[SlotKey, QubitHandle] = field(default_factory=dict)


class Adversary(ABC):
    """A tap on the one-way channel plus a post-session guessing procedure."""

    kind: ClassVar[AdversaryKind]

    def __init__(
        self,
        config: AdversaryConfig,
        rng: np.random.Generator,
        pool: RegisterPool | None = None,
    ) -> None:
        self.config = config
        self.rng = rng
        self.pool = pool
        self.memory = AdversaryMemory()
        self._targets = set(config.targets) if config.targets is not None else None

    @property
    def taps_channel(self) -> bool:
        return self.kind in TAPPING_KINDS

    def tap(self, participant: int, position: int, handle: QubitHandle) -> QubitHandle:
        if self._targets is not None and participant not in self._targets:
            return handle
        return self._tap((participant, position), handle)

    def _tap(self, key: SlotKey, handle: QubitHandle) -> QubitHandle:
        return handle

    @abstractmethod
    def guess_secret(
        self, announcement: PublicAnnouncement, shares: ShareSet | None = None
    ) -> EveGuess | None:
        """Best guess of K_A and S once positions are public, or None if impossible."""


class NoAdversary(Adversary):
    kind = AdversaryKind.NONE

    def guess_secret(
        self, announcement: PublicAnnouncement, shares: ShareSet | None = None
    ) -> EveGuess | None:
        return None


class DcnaAdversary(Adversary):
    kind = AdversaryKind.DCNA

    def _tap(self, key: SlotKey, handle: QubitHandle) -> QubitHandle:
        self.memory.ancillas[key] = dcna_tap(handle)
        return handle

    def guess_secret(
        self, announcement: PublicAnnouncement, shares: ShareSet | None = None
    ) -> EveGuess | None:
        return eve_guess_dcna(self.memory.ancillas, announcement, self.rng)


class InterceptMeasureAdversary(Adversary):
    kind = AdversaryKind.IR_MEASURE

    def _tap(self, key: SlotKey, handle: QubitHandle) -> QubitHandle:
        self.memory.recorded_bits[key] = ir_measure_tap(handle, self.rng)
        return handle

    def guess_secret(
        self, announcement: PublicAnnouncement, shares: ShareSet | None = None
    ) -> EveGuess | None:
        return reconstruct_from_slot_bits(self.memory.recorded_bits, announcement)


class InterceptFakeAdversary(Adversary):
    kind = AdversaryKind.IR_FAKE

    def _tap(self, key: SlotKey, handle: QubitHandle) -> QubitHandle:
        self.memory.stored_qubits[key] = handle
        return ir_fake_tap(handle, self.rng, self.pool)

    def guess_secret(
        self, announcement: PublicAnnouncement, shares: ShareSet | None = None
    ) -> EveGuess | None:
        bits: dict[SlotKey, int] = {}
        for i in range(len(announcement.decoy_positions)):
            for p in _message_positions(announcement, i):
                stored = self.memory.stored_qubits.get((i, p))
                if stored is not None:
                    bits[(i, p)] = stored.measure(self.rng)
        return reconstruct_from_slot_bits(bits, announcement)


class CollectiveAdversary(Adversary):
    kind = AdversaryKind.COLLECTIVE

    def __init__(
        self,
        config: AdversaryConfig,
        rng: np.random.Generator,
        pool: RegisterPool | None = None,
    ) -> None:
        super().__init__(config, rng, pool)
        assert config.collective is not None
        self.spec = config.collective
        self._decoder = collective_decoder(self.spec)

    def _tap(self, key: SlotKey, handle: QubitHandle) -> QubitHandle:
        self.memory.ancillas[key] = collective_tap(handle, self.spec)
        return handle

    def guess_secret(
        self, announcement: PublicAnnouncement, shares: ShareSet | None = None
    ) -> EveGuess | None:
        bits: dict[SlotKey, int] = {}
        for i in range(len(announcement.decoy_positions)):
            for p in _message_positions(announcement, i):
                ancillas = self.memory.ancillas.get((i, p))
                if ancillas is None:
                    continue
                outcome = 0
                for qubit in ancillas:
                    outcome = (outcome << 1) | qubit.measure(self.rng)
                bits[(i, p)] = self._decoder[outcome]
        return reconstruct_from_slot_bits(bits, announcement)


class CollusionAdversary(Adversary):
    """M−1 dishonest participants who follow the protocol and pool their shares."""

    kind = AdversaryKind.COLLUSION

    def dishonest(self, participants: int) -> list[int]:
        if self.config.dishonest is not None:
            return sorted(set(self.config.dishonest))
        return list(range(1, participants))

    def guess_secret(
        self, announcement: PublicAnnouncement, shares: ShareSet | None = None
    ) -> EveGuess | None:
        if shares is None:
            return None
        participants = len(shares.shares)
        pooled = {i: shares.shares[i] for i in self.dishonest(participants)}
        k_a = fill_missing_shares(pooled, participants, self.rng)
        return EveGuess(k_a, "".join(k_a[p] for p in announcement.secret_positions))


_ADVERSARIES: dict[AdversaryKind, type[Adversary]] = {
    cls.kind: cls
    for cls in (
        NoAdversary,
        DcnaAdversary,
        InterceptMeasureAdversary,
        InterceptFakeAdversary,
        CollectiveAdversary,
        CollusionAdversary,
    )
}


def build_adversary(
    config: AdversaryConfig,
    rng: np.random.Generator,
    pool: RegisterPool | None = None,
) -> Adversary:
    """Fresh adversary with empty memory for one session."""
    return _ADVERSARIES[config.kind](config, rng, pool)
