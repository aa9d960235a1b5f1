"""Exact pure-state quantum simulation on small dense registers.

Qubit 0 is the leftmost tensor factor (big-endian): the amplitude of
|q0 q1 ... q(n-1)> sits at index int("q0q1...q(n-1)", 2), so kets read the
same way they are written.  Every function here is pure and returns a new
StateVector; QuantumRegister wraps one for in-place use inside a session.
"""

from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from app.core.config import get_settings
from app.core.errors import InternalSimulationError, InvalidArgumentError

logger = logging.getLogger(__name__)

# Algebraic identities built from exact constructions
ATOL_EXACT = 1e-12
# Chained numerics (norms, traces, unitarity)
ATOL = 1e-9
# Branches below this weight are treated as impossible
_ZERO_PROBABILITY = 1e-15

_SQRT2_INV = 1 / np.sqrt(2)

H_MATRIX = np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT2_INV
X_MATRIX = np.array([[0, 1], [1, 0]], dtype=complex)
# |00><00| + |01><01| + |11><10| + |10><11|, control first
CNOT_MATRIX = np.array(
    [
        [1, 0, 0, 0],
        [0, 1, 0, 0],
        [0, 0, 0, 1],
        [0, 0, 1, 0],
    ],
    dtype=complex,
)


def _max_qubits() -> int:
    return get_settings().max_register_qubits


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized amplitude vector over ``num_qubits`` qubits."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        if self.num_qubits < 1:
            raise InvalidArgumentError("a state needs at least one qubit")
        if self.num_qubits > _max_qubits():
            raise InvalidArgumentError(
                f"{self.num_qubits} qubits exceeds the dense register limit of {_max_qubits()}"
            )
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape[0] != 1 << self.num_qubits:
            raise InvalidArgumentError(
                f"expected {1 << self.num_qubits} amplitudes, got {amps.shape[0]}"
            )
        if not np.all(np.isfinite(amps)):
            raise InvalidArgumentError("amplitudes must be finite")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > ATOL:
            raise InvalidArgumentError(f"state is not normalized (norm² = {norm:.12f})")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes: Sequence[complex] | np.ndarray) -> StateVector:
        """Build a state, inferring the qubit count from the vector length."""
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        size = amps.shape[0]
        if size < 2 or size & (size - 1):
            raise InvalidArgumentError(f"length {size} is not a power of two ≥ 2")
        return cls(size.bit_length() - 1, amps)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per qubit."""
        return self.amplitudes.reshape([2] * self.num_qubits)


@dataclass(frozen=True, eq=False)
class Gate:
    """A unitary acting on an ordered list of target qubits.

    The first target is the most significant bit of the matrix index, so
    ``Gate("CNOT", CNOT_MATRIX, (control, target))`` reads as written.
    """

    name: str
    matrix: np.ndarray
    targets: tuple[int, ...]

    def __post_init__(self) -> None:
        matrix = np.asarray(self.matrix, dtype=complex)
        targets = tuple(int(t) for t in self.targets)
        if not targets:
            raise InvalidArgumentError(f"{self.name}: no target qubits")
        if len(set(targets)) != len(targets):
            raise InvalidArgumentError(f"{self.name}: target qubits must be distinct")
        if min(targets) < 0:
            raise InvalidArgumentError(f"{self.name}: negative qubit index")
        dim = 1 << len(targets)
        if matrix.shape != (dim, dim):
            raise InvalidArgumentError(
                f"{self.name}: matrix shape {matrix.shape} does not act on {len(targets)} qubits"
            )
        if not np.allclose(matrix.conj().T @ matrix, np.eye(dim), atol=ATOL):
            raise InvalidArgumentError(f"{self.name}: matrix is not unitary")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "targets", targets)


def hadamard(qubit: int) -> Gate:
    return Gate("H", H_MATRIX, (qubit,))


def pauli_x(qubit: int) -> Gate:
    return Gate("X", X_MATRIX, (qubit,))


def cnot(control: int, target: int) -> Gate:
    return Gate("CNOT", CNOT_MATRIX, (control, target))


def unitary(matrix: np.ndarray, targets: Sequence[int], name: str = "U") -> Gate:
    return Gate(name, matrix, tuple(targets))


# ── State construction ───────────────────────────────────────


def prepare_basis_state(bits: str) -> StateVector:
    """Computational basis state |bits>."""
    if not bits:
        raise InvalidArgumentError("bit string must not be empty")
    if set(bits) - {"0", "1"}:
        raise InvalidArgumentError(f"not a bit string: {bits!r}")
    amps = np.zeros(1 << len(bits), dtype=complex)
    amps[int(bits, 2)] = 1.0
    return StateVector(len(bits), amps)


def tensor(first: StateVector, second: StateVector) -> StateVector:
    """|first> ⊗ |second>; the qubits of ``second`` are appended on the right."""
    return StateVector(
        first.num_qubits + second.num_qubits,
        np.kron(first.amplitudes, second.amplitudes),
    )


# ── Evolution ────────────────────────────────────────────────


def _check_qubits(state: StateVector, qubits: Sequence[int]) -> None:
    for q in qubits:
        if not 0 <= q < state.num_qubits:
            raise InvalidArgumentError(
                f"qubit {q} out of range for a {state.num_qubits}-qubit state"
            )
    if len(set(qubits)) != len(qubits):
        raise InvalidArgumentError(f"duplicate qubit indices: {list(qubits)}")


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    """Return U|state> for the gate's matrix on its targets."""
    _check_qubits(state, gate.targets)
    k = len(gate.targets)
    front = list(range(k))
    psi = np.moveaxis(state.tensor(), gate.targets, front)
    shape = psi.shape
    psi = (gate.matrix @ psi.reshape(1 << k, -1)).reshape(shape)
    psi = np.moveaxis(psi, front, gate.targets)
    return StateVector(state.num_qubits, psi.reshape(-1))


def apply_cnot_with_fresh_ancilla(state: StateVector, control: int) -> StateVector:
    """Append a |0> ancilla as the last qubit and CNOT the control onto it."""
    _check_qubits(state, [control])
    extended = tensor(state, prepare_basis_state("0"))
    return apply_gate(extended, cnot(control, state.num_qubits))


# ── Measurement ──────────────────────────────────────────────


def project_z(state: StateVector, qubit: int, bit: int) -> tuple[float, StateVector | None]:
    """Probability of reading ``bit`` on ``qubit`` and the renormalized post-state.

    The post-state is None when the branch has (numerically) zero weight.
    """
    _check_qubits(state, [qubit])
    if bit not in (0, 1):
        raise InvalidArgumentError(f"bit must be 0 or 1, got {bit}")
    psi = state.tensor()
    index: list[slice | int] = [slice(None)] * state.num_qubits
    index[qubit] = bit
    branch = psi[tuple(index)]
    probability = float(np.sum(np.abs(branch) ** 2))
    if probability < _ZERO_PROBABILITY:
        return probability, None
    collapsed = np.zeros_like(psi)
    collapsed[tuple(index)] = branch / np.sqrt(probability)
    return probability, StateVector(state.num_qubits, collapsed.reshape(-1))


def measure_z(
    state: StateVector, qubit: int, rng: np.random.Generator
) -> tuple[int, StateVector]:
    """Sample a Z-basis outcome on ``qubit`` and collapse the state."""
    p0, _ = project_z(state, qubit, 0)
    bit = 0 if rng.random() < p0 else 1
    _, post = project_z(state, qubit, bit)
    if post is None:
        raise InternalSimulationError(
            f"sampled a zero-weight branch (qubit {qubit}, bit {bit}, p0={p0})"
        )
    return bit, post


def outcome_distribution(state: StateVector, qubits: Sequence[int]) -> dict[str, float]:
    """Exact joint Z-basis distribution of ``qubits``, keyed by bit string in that order."""
    qubits = list(qubits)
    if not qubits:
        raise InvalidArgumentError("at least one qubit is required")
    _check_qubits(state, qubits)
    probs = np.abs(state.tensor()) ** 2
    others = tuple(i for i in range(state.num_qubits) if i not in qubits)
    marginal = probs.sum(axis=others) if others else probs
    ordered = sorted(qubits)
    marginal = np.transpose(marginal, [ordered.index(q) for q in qubits]).reshape(-1)
    width = len(qubits)
    return {
        format(index, f"0{width}b"): float(p)
        for index, p in enumerate(marginal)
        if p > _ZERO_PROBABILITY
    }


# ── Reduced states ───────────────────────────────────────────


def partial_trace(state: StateVector, keep: Sequence[int]) -> np.ndarray:
    """Density matrix of ``keep`` (in that order) with every other qubit traced out."""
    keep = list(keep)
    if not keep:
        raise InvalidArgumentError("at least one qubit must be kept")
    _check_qubits(state, keep)
    front = list(range(len(keep)))
    psi = np.moveaxis(state.tensor(), keep, front).reshape(1 << len(keep), -1)
    return psi @ psi.conj().T


def reduced_density(state: StateVector, qubit: int) -> np.ndarray:
    """2×2 density matrix of a single qubit."""
    return partial_trace(state, [qubit])


def is_density_matrix(rho: np.ndarray, atol: float = ATOL) -> bool:
    """Hermitian, unit trace and positive semidefinite within ``atol``."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return False
    if not np.allclose(rho, rho.conj().T, atol=atol):
        return False
    if abs(np.trace(rho) - 1.0) > atol:
        return False
    return bool(np.linalg.eigvalsh(rho).min() >= -atol)


def von_neumann_entropy(rho: np.ndarray, cutoff: float = 1e-12) -> float:
    """S(rho) in bits; eigenvalues below ``cutoff`` contribute nothing."""
    eigenvalues = np.linalg.eigvalsh(np.asarray(rho, dtype=complex))
    eigenvalues = eigenvalues[eigenvalues > cutoff]
    return float(-np.sum(eigenvalues * np.log2(eigenvalues)))


def equal_up_to_global_phase(a: StateVector, b: StateVector, atol: float = ATOL) -> bool:
    """True iff |<a|b>| = 1 within ``atol``."""
    if a.num_qubits != b.num_qubits:
        raise InvalidArgumentError(
            f"cannot compare a {a.num_qubits}-qubit state with a {b.num_qubits}-qubit state"
        )
    return abs(abs(np.vdot(a.amplitudes, b.amplitudes)) - 1.0) <= atol


# ── Mutable registers for session use ────────────────────────


class RegisterPool:
    """Creates registers and counts the qubits each owner allocates."""

    def __init__(self) -> None:
        self.allocated: Counter[str] = Counter()

    def allocate(self, state: StateVector, owner: str) -> QuantumRegister:
        self.allocated[owner] += state.num_qubits
        return QuantumRegister(state, pool=self)

    def record(self, owner: str, count: int) -> None:
        self.allocated[owner] += count


class QuantumRegister:
    """One entangled group (plus any ancillas coupled to it), mutated in place."""

    __slots__ = ("state", "pool")

    def __init__(self, state: StateVector, pool: RegisterPool | None = None) -> None:
        self.state = state
        self.pool = pool

    @property
    def num_qubits(self) -> int:
        return self.state.num_qubits

    def handle(self, index: int) -> QubitHandle:
        _check_qubits(self.state, [index])
        return QubitHandle(self, index)

    def apply(self, matrix: np.ndarray, qubits: Sequence[int], name: str = "U") -> None:
        self.state = apply_gate(self.state, Gate(name, matrix, tuple(qubits)))

    def extend(self, ancilla: StateVector, owner: str) -> list[int]:
        """Append ``ancilla`` on the right; returns the new qubit indices."""
        first = self.state.num_qubits
        self.state = tensor(self.state, ancilla)
        if self.pool is not None:
            self.pool.record(owner, ancilla.num_qubits)
        return list(range(first, self.state.num_qubits))

    def measure(self, qubit: int, rng: np.random.Generator) -> int:
        bit, self.state = measure_z(self.state, qubit, rng)
        return bit


@dataclass(frozen=True, eq=False)
class QubitHandle:
    """Reference to one qubit inside a shared register."""

    register: QuantumRegister
    index: int

    def apply(self, matrix: np.ndarray, name: str = "U") -> None:
        self.register.apply(matrix, [self.index], name)

    def measure(self, rng: np.random.Generator) -> int:
        return self.register.measure(self.index, rng)

    def density(self) -> np.ndarray:
        return reduced_density(self.register.state, self.index)
