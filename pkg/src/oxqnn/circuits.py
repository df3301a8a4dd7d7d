"""Encoder/ansatz specifications, entangler topologies and circuit equivalence."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidArgumentError
from .state import Gate, GateKind, circuit_unitary


class EntanglerKind(str, enum.Enum):
    LINEAR = "linear"
    CIRCULAR = "circular"
    CIRCULAR2 = "circular2"
    CIRCULAR4 = "circular4"
    FULL = "full"
    NONE = "none"

    @property
    def min_width(self) -> int:
        return {EntanglerKind.CIRCULAR2: 3, EntanglerKind.CIRCULAR4: 5, EntanglerKind.NONE: 1}.get(self, 2)


class EncoderLayout(str, enum.Enum):
    FIVE_X = "5x"
    TEN_XX = "10xx"
    TEN_XX2 = "10xx2"

    @property
    def n_qubits(self) -> int:
        return 5 if self is EncoderLayout.FIVE_X else 10


class AngleMap(str, enum.Enum):
    PI_X = "pix"
    ARCTAN_SHIFT = "arctan"


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = ()
    parameter_slots: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "parameter_slots", tuple(int(i) for i in self.parameter_slots))
        for gate in self.gates:
            if any(q >= self.n_qubits for q in gate.qubits):
                raise InvalidArgumentError(f"gate {gate} addresses a qubit outside a {self.n_qubits}-qubit register")
        for i in self.parameter_slots:
            if not 0 <= i < len(self.gates) or self.gates[i].kind is not GateKind.RY:
                raise InvalidArgumentError(f"parameter slot {i} does not point at an Ry gate")

    @property
    def n_parameters(self) -> int:
        return len(self.parameter_slots)

    @property
    def is_concrete(self) -> bool:
        return not any(g.is_symbolic for g in self.gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.n_qubits != self.n_qubits:
            raise InvalidArgumentError("cannot concatenate circuits of different widths")
        offset = len(self.gates)
        return Circuit(
            self.n_qubits,
            self.gates + other.gates,
            self.parameter_slots + tuple(i + offset for i in other.parameter_slots),
        )


@dataclass(frozen=True)
class AnsatzSpec:
    width: int
    depth: int
    entangler: EntanglerKind = EntanglerKind.LINEAR
    two_qubit_gate: GateKind = GateKind.CX

    def __post_init__(self):
        object.__setattr__(self, "entangler", EntanglerKind(self.entangler))
        object.__setattr__(self, "two_qubit_gate", GateKind(self.two_qubit_gate))
        if not 1 <= self.width <= 12:
            raise InvalidArgumentError(f"ansatz width must be in 1..12, got {self.width}")
        if self.depth < 0:
            raise InvalidArgumentError(f"ansatz depth must be >= 0, got {self.depth}")
        if self.two_qubit_gate is GateKind.RY:
            raise InvalidArgumentError("two_qubit_gate must be CX or CZ")
        if self.width < self.entangler.min_width:
            raise InvalidArgumentError(
                f"{self.entangler.value} entangler needs width >= {self.entangler.min_width}, got {self.width}"
            )

    @property
    def parameter_count(self) -> int:
        return self.width * self.depth

    @property
    def label(self) -> str:
        return f"{self.entangler.value}-{self.two_qubit_gate.value}-w{self.width}-d{self.depth}"


@dataclass(frozen=True)
class EncoderSpec:
    layout: EncoderLayout = EncoderLayout.FIVE_X
    angle_map: AngleMap = AngleMap.ARCTAN_SHIFT

    def __post_init__(self):
        object.__setattr__(self, "layout", EncoderLayout(self.layout))
        object.__setattr__(self, "angle_map", AngleMap(self.angle_map))

    @property
    def n_qubits(self) -> int:
        return self.layout.n_qubits


def entangler_pairs(kind: EntanglerKind | str, width: int) -> list[tuple[int, int]]:
    """Ordered (control, target) pairs of one entangler block.

    Linear is ``(i, i+1)`` ascending, Circular appends ``(width-1, 0)``,
    CircularK runs ``k = 1..K`` and for each ``k`` every ``(i, (i+k) % width)``,
    Full is every ``(i, j)`` with ``i < j`` in lexicographic order.
    """
    kind = EntanglerKind(kind)
    if width < kind.min_width:
        raise InvalidArgumentError(f"{kind.value} entangler needs width >= {kind.min_width}, got {width}")
    if kind is EntanglerKind.NONE:
        return []
    if kind is EntanglerKind.LINEAR:
        return [(i, i + 1) for i in range(width - 1)]
    if kind is EntanglerKind.CIRCULAR:
        return [(i, i + 1) for i in range(width - 1)] + [(width - 1, 0)]
    if kind is EntanglerKind.FULL:
        return [(i, j) for i in range(width) for j in range(i + 1, width)]
    reach = 2 if kind is EntanglerKind.CIRCULAR2 else 4
    return [(i, (i + k) % width) for k in range(1, reach + 1) for i in range(width)]


def entangler_circuit(pairs: Sequence[tuple[int, int]], width: int, gate: GateKind | str = GateKind.CX) -> Circuit:
    gate = GateKind(gate)
    make = Gate.cx if gate is GateKind.CX else Gate.cz
    return Circuit(width, tuple(make(c, t) for c, t in pairs))


def build_ansatz(spec: AnsatzSpec) -> Circuit:
    """``depth`` blocks of [symbolic Ry on every qubit, then the entangler]."""
    pairs = entangler_pairs(spec.entangler, spec.width)
    make = Gate.cx if spec.two_qubit_gate is GateKind.CX else Gate.cz
    gates: list[Gate] = []
    slots: list[int] = []
    for _ in range(spec.depth):
        for q in range(spec.width):
            slots.append(len(gates))
            gates.append(Gate.ry(q))
        gates.extend(make(c, t) for c, t in pairs)
    return Circuit(spec.width, tuple(gates), tuple(slots))


def build_encoder(spec: EncoderSpec, angles: Sequence[float]) -> Circuit:
    angles = [float(a) for a in angles]
    if len(angles) != spec.n_qubits:
        raise InvalidArgumentError(f"{spec.layout.value} encoder needs {spec.n_qubits} angles, got {len(angles)}")
    return Circuit(spec.n_qubits, tuple(Gate.ry(q, a) for q, a in enumerate(angles)))


def bind_parameters(circuit: Circuit, params: Sequence[float]) -> Circuit:
    """Fill the parameter slots in order. Bound slots stay slots, so rebinding works."""
    params = [float(p) for p in params]
    if len(params) != circuit.n_parameters:
        raise InvalidArgumentError(f"circuit has {circuit.n_parameters} parameter slots, got {len(params)} values")
    gates = list(circuit.gates)
    for slot, value in zip(circuit.parameter_slots, params):
        gates[slot] = Gate.ry(gates[slot].qubits[0], value)
    return Circuit(circuit.n_qubits, tuple(gates), circuit.parameter_slots)


@dataclass(frozen=True)
class EquivalenceResult:
    equivalent: bool
    max_deviation: float
    phase: complex = field(default=1.0 + 0j)

    def __bool__(self) -> bool:
        return self.equivalent


def unitary_equivalent(a: Circuit, b: Circuit, up_to_global_phase: bool = True, atol: float = 1e-9) -> EquivalenceResult:
    if a.n_qubits != b.n_qubits:
        raise InvalidArgumentError(f"register size mismatch: {a.n_qubits} vs {b.n_qubits}")
    if not (a.is_concrete and b.is_concrete):
        raise InvalidArgumentError("both circuits must be fully bound")
    ua, ub = circuit_unitary(a), circuit_unitary(b)
    phase = 1.0 + 0j
    if up_to_global_phase:
        overlap = np.vdot(ub, ua)  # tr(ub^dagger ua)
        if abs(overlap) > 1e-12:
            phase = overlap / abs(overlap)
    deviation = float(np.max(np.abs(ua - phase * ub)))
    return EquivalenceResult(deviation <= atol, deviation, complex(phase))
