"""Dense state-vector engine for small qubit registers.

Qubit 0 is the most significant bit of the basis index, so on a 5-qubit
register qubit 4 is the least significant ("bottom") wire.

Two layers live here. The public functions (``zero_state``, ``apply_gate``,
``expectation_z``, ...) work on :class:`StateVector` values and validate
their inputs. The underscore-prefixed kernels work on raw amplitude arrays
of shape ``(..., 2**n)`` so whole batches of registers (training records,
random parameter draws) can be pushed through one gate at a time.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidArgumentError, ResourceLimitError

MAX_QUBITS = 14
MAX_UNITARY_QUBITS = 10


class GateKind(str, enum.Enum):
    RY = "Ry"
    CX = "CX"
    CZ = "CZ"


@dataclass(frozen=True)
class Gate:
    """One gate. ``angle`` is None for a symbolic (unbound) Ry."""

    kind: GateKind
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        kind = GateKind(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        want = 1 if kind is GateKind.RY else 2
        if len(self.qubits) != want:
            raise InvalidArgumentError(f"{kind.value} acts on {want} qubit(s), got {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise InvalidArgumentError(f"negative qubit index in {self.qubits}")
        if want == 2 and self.qubits[0] == self.qubits[1]:
            raise InvalidArgumentError(f"control equals target in {kind.value}{self.qubits}")
        if kind is not GateKind.RY and self.angle is not None:
            raise InvalidArgumentError(f"{kind.value} takes no angle")

    @property
    def is_symbolic(self) -> bool:
        return self.kind is GateKind.RY and self.angle is None

    @classmethod
    def ry(cls, qubit: int, angle: float | None = None) -> "Gate":
        return cls(GateKind.RY, (qubit,), None if angle is None else float(angle))

    @classmethod
    def cx(cls, control: int, target: int) -> "Gate":
        return cls(GateKind.CX, (control, target))

    @classmethod
    def cz(cls, control: int, target: int) -> "Gate":
        return cls(GateKind.CZ, (control, target))


@dataclass(frozen=True, eq=False)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (2 ** self.n_qubits,):
            raise InvalidArgumentError(
                f"expected {2 ** self.n_qubits} amplitudes for {self.n_qubits} qubits, got shape {amps.shape}"
            )
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))


def _check_n_qubits(n_qubits: int) -> None:
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise InvalidArgumentError(f"n_qubits must be in 1..{MAX_QUBITS}, got {n_qubits}")


def _check_qubit(qubit: int, n_qubits: int) -> None:
    if not 0 <= qubit < n_qubits:
        raise InvalidArgumentError(f"qubit index {qubit} out of range for {n_qubits} qubits")


def zero_state(n_qubits: int) -> StateVector:
    _check_n_qubits(n_qubits)
    amps = np.zeros(2 ** n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(n_qubits, amps)


def ry_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]])


# ---------------------------------------------------------------------------
# array kernels
# ---------------------------------------------------------------------------

def _split(amps: np.ndarray, n_qubits: int, qubit: int) -> np.ndarray:
    """View ``(..., 2**n)`` as ``(..., high, 2, low)`` around ``qubit``."""
    return amps.reshape(amps.shape[:-1] + (2 ** qubit, 2, 2 ** (n_qubits - qubit - 1)))


def _apply_ry(amps: np.ndarray, n_qubits: int, qubit: int, theta) -> None:
    """In-place Ry on ``amps``; ``theta`` may be a scalar or one angle per batch row."""
    view = _split(amps, n_qubits, qubit)
    theta = np.asarray(theta, dtype=float)
    if theta.ndim:
        theta = theta.reshape(theta.shape + (1, 1))
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    a0 = view[..., 0, :].copy()
    a1 = view[..., 1, :]
    view[..., 0, :] = c * a0 - s * a1
    view[..., 1, :] = s * a0 + c * a1


@lru_cache(maxsize=None)
def _bit_table(n_qubits: int) -> np.ndarray:
    """``table[q, i]`` is the value of qubit ``q`` in basis index ``i``."""
    idx = np.arange(2 ** n_qubits)
    shifts = n_qubits - 1 - np.arange(n_qubits)
    return ((idx[None, :] >> shifts[:, None]) & 1).astype(np.int8)


def _z_signs(n_qubits: int, qubit: int) -> np.ndarray:
    return 1.0 - 2.0 * _bit_table(n_qubits)[qubit]


def _cx_permutation(n_qubits: int, control: int, target: int) -> np.ndarray:
    idx = np.arange(2 ** n_qubits)
    bits = _bit_table(n_qubits)
    return idx ^ (bits[control].astype(np.int64) << (n_qubits - 1 - target))


def _apply_cx(amps: np.ndarray, n_qubits: int, control: int, target: int) -> None:
    amps[...] = amps[..., _cx_permutation(n_qubits, control, target)]


def _apply_cz(amps: np.ndarray, n_qubits: int, control: int, target: int) -> None:
    bits = _bit_table(n_qubits)
    amps[..., (bits[control] & bits[target]).astype(bool)] *= -1


def _apply_gate_array(amps: np.ndarray, n_qubits: int, gate: Gate) -> None:
    if gate.kind is GateKind.RY:
        if gate.angle is None:
            raise InvalidArgumentError("cannot apply a symbolic Ry gate; bind parameters first")
        _apply_ry(amps, n_qubits, gate.qubits[0], gate.angle)
    elif gate.kind is GateKind.CX:
        _apply_cx(amps, n_qubits, *gate.qubits)
    else:
        _apply_cz(amps, n_qubits, *gate.qubits)


def _expectation_z_array(amps: np.ndarray, n_qubits: int, qubit: int) -> np.ndarray:
    probs = amps.real ** 2 + amps.imag ** 2 if np.iscomplexobj(amps) else amps ** 2
    return probs @ _z_signs(n_qubits, qubit)


def _reduced_rho_array(amps: np.ndarray, n_qubits: int, qubit: int) -> np.ndarray:
    """Single-qubit reduced density matrices, shape ``(..., 2, 2)``."""
    view = _split(amps, n_qubits, qubit)
    # bring the kept qubit axis next to the batch axes, flatten the traced-out rest
    kept = np.moveaxis(view, -2, -3).reshape(amps.shape[:-1] + (2, -1))
    return kept @ np.conj(np.swapaxes(kept, -1, -2))


def _entropy_from_rho_array(rho: np.ndarray) -> np.ndarray:
    lam = np.clip(np.linalg.eigvalsh(rho), 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(lam > 0, -lam * np.log2(np.where(lam > 0, lam, 1.0)), 0.0)
    return terms.sum(axis=-1)


# ---------------------------------------------------------------------------
# validated public API
# ---------------------------------------------------------------------------

def _check_gate(gate: Gate, n_qubits: int) -> None:
    for q in gate.qubits:
        _check_qubit(q, n_qubits)


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    _check_gate(gate, state.n_qubits)
    amps = state.amplitudes.copy()
    _apply_gate_array(amps, state.n_qubits, gate)
    return StateVector(state.n_qubits, amps)


def apply_gates(state: StateVector, gates) -> StateVector:
    amps = state.amplitudes.copy()
    for gate in gates:
        _check_gate(gate, state.n_qubits)
        _apply_gate_array(amps, state.n_qubits, gate)
    return StateVector(state.n_qubits, amps)


def expectation_z(state: StateVector, qubit: int) -> float:
    _check_qubit(qubit, state.n_qubits)
    return float(_expectation_z_array(state.amplitudes, state.n_qubits, qubit))


def fidelity(a: StateVector, b: StateVector) -> float:
    """Squared overlap ``|<a|b>|**2``."""
    if a.n_qubits != b.n_qubits:
        raise InvalidArgumentError(f"register size mismatch: {a.n_qubits} vs {b.n_qubits}")
    return float(min(1.0, abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2))


def reduced_density_matrix(state: StateVector, qubit: int) -> np.ndarray:
    """Partial trace over every qubit except ``qubit``; returns a 2x2 matrix."""
    if state.n_qubits < 2:
        raise InvalidArgumentError("reduced density matrix needs at least 2 qubits")
    _check_qubit(qubit, state.n_qubits)
    return _reduced_rho_array(state.amplitudes, state.n_qubits, qubit)


def validate_density_matrix(rho: np.ndarray, atol: float = 1e-10) -> np.ndarray:
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (2, 2):
        raise InvalidArgumentError(f"expected a 2x2 density matrix, got shape {rho.shape}")
    if not np.allclose(rho, rho.conj().T, atol=atol, rtol=0):
        raise InvalidArgumentError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > atol:
        raise InvalidArgumentError(f"density matrix trace is {np.trace(rho).real:.12g}, expected 1")
    lam = np.linalg.eigvalsh(rho)
    if lam.min() < -atol or lam.max() > 1 + atol:
        raise InvalidArgumentError(f"density matrix eigenvalues {lam} outside [0, 1]")
    return rho


def entropy_log2(rho: np.ndarray) -> float:
    """Von Neumann entropy in bits, ``-sum(l * log2(l))`` with ``0 log 0 = 0``."""
    rho = validate_density_matrix(rho)
    return float(_entropy_from_rho_array(rho))


def circuit_unitary(circuit) -> np.ndarray:
    """Full ``2**n x 2**n`` matrix of a concrete circuit; column j is C|j>."""
    n = circuit.n_qubits
    if n > MAX_UNITARY_QUBITS:
        raise ResourceLimitError(f"circuit_unitary supports at most {MAX_UNITARY_QUBITS} qubits, got {n}")
    _check_n_qubits(n)
    # row j of the batch is basis state |j>
    amps = np.eye(2 ** n, dtype=np.complex128)
    for gate in circuit.gates:
        _check_gate(gate, n)
        _apply_gate_array(amps, n, gate)
    return amps.T.copy()
